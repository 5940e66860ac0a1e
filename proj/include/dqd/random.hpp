#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dqd {

// Small counter-based generator in the SplittableRandom style: the state
// advances by a per-stream odd increment and the output is a 64-bit finalizer
// of the state. A stream is fully determined by (seed, stream), so trajectory
// k of an ensemble can be handed stream k and produce the same numbers no
// matter which thread runs it or in which order.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0) {
        const std::uint64_t base = mix64(seed + 0x9E3779B97F4A7C15ull);
        state_ = mix64(base ^ mix64(stream * 0xC2B2AE3D27D4EB4Full + 0x165667B19E3779F9ull));
        gamma_ = mix64(state_ + 0x9E3779B97F4A7C15ull) | 1ull;
    }

    std::uint64_t next_u64() {
        state_ += gamma_;
        return mix64(state_);
    }

    // Uniform on (0, 1]; never returns 0, so log(uniform01()) is finite.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (cosine branch). Consumes exactly two
    // 64-bit draws per call, which keeps replay accounting simple.
    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
    std::uint64_t gamma_;
};

}  // namespace dqd
