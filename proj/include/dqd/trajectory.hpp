#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dqd/model.hpp"
#include "dqd/random.hpp"

namespace dqd {

// One averaged detector readout: the current record mean over
// [t_start, t_start + dt].
struct CurrentSample {
    double t_start = 0.0;
    double dt = 0.0;
    double i_avg = 0.0;
};

// White-noise increment driving the Langevin scheme. xi is the noise average
// over one step; its variance is s_i / (2 dt).
struct NoiseSample {
    double xi = 0.0;
};

enum class Scheme {
    BayesSplit,     // exact per-window Bayes update, Strang-split with the unitary
    EulerLangevin,  // literal first-order integration of the Langevin equations
};

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);  // throws ParseError

// A whole simulated run: states has one more entry than currents, state k is
// the conditioned density matrix at time k*dt and currents[k] covers the step
// from k*dt to (k+1)*dt.
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<CurrentSample> currents;
    ModelParams params;
    Scheme scheme = Scheme::BayesSplit;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    double dt = 0.0;
};

// Largest step the split scheme accepts: min(0.1 tau_loc, 0.1/omega).
// Infinite when both the detector response and the Hamiltonian vanish.
double max_timestep(const SystemParams& sys, const DetectorParams& det);

// Exact free evolution over dt: rotates the Bloch vector about the axis set by
// (eps, h_coupling). Preserves purity to machine precision; dt may be "large"
// here because the rotation is closed-form.
DensityMatrix hamiltonian_evolve(const DensityMatrix& rho, double dt, const SystemParams& sys);

// Draws one readout for a window of length dt and applies the matching Bayes
// update. The returned sample has t_start = 0; run_trajectory fills it in.
std::pair<DensityMatrix, CurrentSample> measurement_substep(const DensityMatrix& rho, double dt,
                                                            const DetectorParams& det,
                                                            RandomSource& rng);

// One full step of the split scheme: half unitary rotation, measurement
// window, half unitary rotation. Throws TimestepTooLarge for dt above
// max_timestep unless allow_large_dt is set.
std::pair<DensityMatrix, CurrentSample> step(const DensityMatrix& rho, double dt,
                                             const SystemParams& sys, const DetectorParams& det,
                                             RandomSource& rng, bool allow_large_dt = false);

// Literal first-order update of the stochastic equations of motion, kept as a
// cross-check instrument. Clamps sigma11 to [0, 1]; the state-dependent
// coefficient of the stochastic off-diagonal term is taken as zero at
// sigma11 = 0 or 1. Carries a known O(dt) mean bias in sigma11, documented by
// the matched-noise tests.
DensityMatrix euler_langevin_step(const DensityMatrix& rho, double dt, const SystemParams& sys,
                                  const DetectorParams& det, const NoiseSample& noise);

// Simulates round(t_end/dt) steps with the per-(seed, stream) random sequence,
// so results do not depend on scheduling. Throws NumericalBlowup if the state
// leaves the representable range (only the Euler scheme can do that).
TrajectoryRecord run_trajectory(const DensityMatrix& rho0, double t_end, double dt,
                                const SystemParams& sys, const DetectorParams& det,
                                std::uint64_t seed, Scheme scheme = Scheme::BayesSplit,
                                std::uint64_t stream = 0, bool allow_large_dt = false);

// Boxcar average of the step currents over floor(window/dt) steps; values are
// aligned with the window end, and shorter prefixes average what is available.
// Throws WindowTooShort when window < dt.
std::vector<double> filter_current(const TrajectoryRecord& record, double window);

// Running mean of all step currents from t = 0 up to each step end.
std::vector<double> cumulative_average(const TrajectoryRecord& record);

}  // namespace dqd
