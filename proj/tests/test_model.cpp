#include <cmath>
#include <limits>

#include "doctest.h"
#include "dqd/model.hpp"
#include "dqd/random.hpp"

using namespace dqd;

TEST_SUITE_BEGIN("model");

TEST_CASE("purity defect distinguishes pure, mixed and unphysical states") {
    CHECK(purity_defect({0.5, 0.0, 0.0}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(purity_defect({1.0, 0.0, 0.0}) == 0.0);
    CHECK(purity_defect({0.5, 0.5, 0.0}) == 0.0);
    CHECK(purity_defect({0.9, 0.3, 0.0}) == doctest::Approx(0.0).scale(1).epsilon(1e-15));
    CHECK(purity_defect({0.5, 0.5, 0.5}) < 0.0);

    // every Bloch-circle point cos^2 + parametrized coherence is exactly pure
    for (int k = 0; k < 12; ++k) {
        const double theta = 0.5 * k;
        const double phi = 0.3 * k;
        const double p = std::cos(theta / 2) * std::cos(theta / 2);
        const double amp = 0.5 * std::sin(theta);
        const DensityMatrix rho{p, amp * std::cos(phi), amp * std::sin(phi)};
        CHECK(std::abs(purity_defect(rho)) < 1e-15);
    }
}

TEST_CASE("offdiag_abs is the coherence magnitude") {
    CHECK(offdiag_abs({0.5, 0.3, -0.4}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(offdiag_abs({1.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("detector current levels straddle the average, state 1 low") {
    const DetectorParams det{10.0, 1.0, 1.0, 0.0};
    CHECK(det.i1() == doctest::Approx(9.5));
    CHECK(det.i2() == doctest::Approx(10.5));
}

TEST_CASE("derived quantities: rates, localization time, precession frequency") {
    SystemParams sys;
    DetectorParams det;
    det.delta_i = 0.2;
    det.s_i = 1.0;
    const DerivedQuantities d = derived_quantities(sys, det);
    CHECK(d.gamma_d_meas == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(d.tau_loc == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(d.omega == 0.0);
    CHECK_FALSE(d.coupling_c.has_value());
}

TEST_CASE("dephasing rate scales quadratically with the detector response") {
    RandomSource rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        SystemParams sys;
        DetectorParams det;
        det.delta_i = 0.1 + rng.uniform01();
        det.s_i = 0.5 + rng.uniform01();
        const double k = 0.5 + 3.0 * rng.uniform01();
        DetectorParams scaled = det;
        scaled.delta_i *= k;
        const double base = derived_quantities(sys, det).gamma_d_meas;
        const double boosted = derived_quantities(sys, scaled).gamma_d_meas;
        CHECK(boosted == doctest::Approx(k * k * base).epsilon(1e-12));
    }
}

TEST_CASE("dimensionless detector coupling") {
    SystemParams sys;
    sys.h_coupling = 1.0;
    DetectorParams det;
    det.delta_i = std::sqrt(3.0);
    det.s_i = 1.0;
    const DerivedQuantities d = derived_quantities(sys, det);
    REQUIRE(d.coupling_c.has_value());
    CHECK(*d.coupling_c == doctest::Approx(3.0).epsilon(1e-12));

    sys.eps = 1.0;
    CHECK(derived_quantities(sys, det).omega == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("validate_params rejects bad inputs by family") {
    SystemParams sys;
    DetectorParams det;

    det.s_i = 0.0;
    CHECK_THROWS_AS(validate_params(sys, det), NonPositiveSpectralDensity);
    det.s_i = -1.0;
    CHECK_THROWS_AS(validate_params(sys, det), NonPositiveSpectralDensity);
    det.s_i = 1.0;

    det.gamma_d_extra = -0.1;
    CHECK_THROWS_AS(validate_params(sys, det), NegativeExcessDecoherence);
    det.gamma_d_extra = 0.0;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    sys.eps = nan;
    CHECK_THROWS_AS(validate_params(sys, det), NonFiniteParameter);
    sys.eps = 0.0;
    sys.h_coupling = inf;
    CHECK_THROWS_AS(validate_params(sys, det), NonFiniteParameter);
    sys.h_coupling = 0.0;
    det.i0 = -inf;
    CHECK_THROWS_AS(validate_params(sys, det), NonFiniteParameter);
    det.i0 = 0.0;

    sys.hbar = 0.0;
    CHECK_THROWS_AS(validate_params(sys, det), ValidationError);
    sys.hbar = 1.0;

    CHECK(validate_params(sys, det).warnings.empty());
}

TEST_CASE("strong response triggers a weak-coupling advisory, not an error") {
    SystemParams sys;
    DetectorParams det;
    det.i0 = 1.0;
    det.delta_i = 1.0;
    det.s_i = 1.0;
    const ValidatedModel model = validate_params(sys, det);
    REQUIRE(model.warnings.size() == 1);
    CHECK(model.warnings[0].find("weak-coupling") != std::string::npos);

    det.i0 = 10.0;
    CHECK(validate_params(sys, det).warnings.empty());
}

TEST_CASE("validate_state accepts the physical region and rejects the rest") {
    CHECK_NOTHROW(validate_state({0.5, 0.5, 0.0}));
    CHECK_NOTHROW(validate_state({1.0, 0.0, 0.0}));
    CHECK_NOTHROW(validate_state({0.0, 0.0, 0.0}));
    CHECK_NOTHROW(validate_state({0.5, 0.0, 0.0}));

    CHECK_THROWS_AS(validate_state({-0.01, 0.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(validate_state({1.01, 0.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(validate_state({0.5, 0.5, 0.1}), ValidationError);
    CHECK_THROWS_AS(validate_state({1.0, 0.1, 0.0}), ValidationError);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate_state({nan, 0.0, 0.0}), NonFiniteParameter);
    CHECK_THROWS_AS(validate_state({0.5, nan, 0.0}), NonFiniteParameter);
}

TEST_SUITE_END();
