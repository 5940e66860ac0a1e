#include <cmath>
#include <vector>

#include "doctest.h"
#include "dqd/random.hpp"

using dqd::RandomSource;

TEST_SUITE_BEGIN("random");

TEST_CASE("same seed and stream reproduce the same sequence") {
    RandomSource a(12345, 7);
    RandomSource b(12345, 7);
    for (int k = 0; k < 1000; ++k) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("different streams of one seed are distinct sequences") {
    RandomSource a(12345, 0);
    RandomSource b(12345, 1);
    int same = 0;
    for (int k = 0; k < 1000; ++k) {
        same += a.next_u64() == b.next_u64();
    }
    CHECK(same == 0);
}

TEST_CASE("different seeds are distinct sequences") {
    RandomSource a(1, 0);
    RandomSource b(2, 0);
    int same = 0;
    for (int k = 0; k < 1000; ++k) {
        same += a.next_u64() == b.next_u64();
    }
    CHECK(same == 0);
}

TEST_CASE("uniform01 stays inside (0, 1]") {
    RandomSource rng(99);
    double lo = 1.0, hi = 0.0;
    for (int k = 0; k < 1000000; ++k) {
        const double u = rng.uniform01();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo > 0.0);
    CHECK(hi <= 1.0);
    // the mapping ((x >> 11) + 1) * 2^-53 cannot produce 0 even in principle
    CHECK(lo >= 0x1.0p-53);
}

TEST_CASE("uniform01 mean and variance match the flat distribution") {
    RandomSource rng(4242);
    const int n = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < n; ++k) {
        const double u = rng.uniform01();
        sum += u;
        sumsq += u * u;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    // se(mean) = 1/sqrt(12 n); se(var) ~ sqrt(1/180/n)
    CHECK(std::abs(mean - 0.5) < 4.0 / std::sqrt(12.0 * n));
    CHECK(std::abs(var - 1.0 / 12.0) < 4.0 * std::sqrt(1.0 / 180.0 / n));
}

TEST_CASE("normal() moments match the standard Gaussian") {
    RandomSource rng(31337);
    const int n = 1000000;
    double sum = 0.0, sumsq = 0.0, sumcube = 0.0;
    for (int k = 0; k < n; ++k) {
        const double x = rng.normal();
        sum += x;
        sumsq += x * x;
        sumcube += x * x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    const double skew = sumcube / n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(skew) < 4.0 * std::sqrt(15.0 / n));
}

TEST_CASE("normal(mean, stddev) is an affine map of normal()") {
    RandomSource a(5, 3);
    RandomSource b(5, 3);
    for (int k = 0; k < 100; ++k) {
        const double x = a.normal();
        const double y = b.normal(2.0, 0.5);
        CHECK(y == doctest::Approx(2.0 + 0.5 * x).epsilon(1e-15));
    }
}

TEST_CASE("normal consumes exactly two 64-bit draws") {
    RandomSource a(777, 1);
    RandomSource b(777, 1);
    for (int k = 0; k < 25; ++k) a.normal();
    for (int k = 0; k < 50; ++k) b.next_u64();
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() == b.next_u64());
}

TEST_SUITE_END();
