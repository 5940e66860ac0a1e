#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dqd/model.hpp"
#include "dqd/trajectory.hpp"

namespace dqd {

// Pulse parameters that rotate a pure post-measurement state onto state 1:
// hold (eps_rec, h_rec) for delta_t_rec with the detector off.
struct RecoveryControls {
    double eps_rec = 0.0;
    double h_rec = 0.0;
    double delta_t_rec = 0.0;
    double omega_rec = 0.0;  // sqrt(4 h_rec^2 + eps_rec^2) / hbar
};

// Derives the recovery pulse for a pure state with nonzero coherence.
// Preconditions, checked in this order: purity_defect < 1e-6 (NotPure),
// |sigma12| > 1e-6 (NoCoherence), and |Im sigma12| hbar omega / h_rec <= 1
// (ArcsinDomain). h_rec must be nonzero.
RecoveryControls recovery_controls(const DensityMatrix& rho, double h_rec, double hbar = 1.0);

// Applies the pulse coherently (detector off) and returns the final state.
DensityMatrix verify_recovery(const DensityMatrix& rho, const RecoveryControls& controls,
                              double hbar = 1.0);

enum class RecoveryOutcome {
    Recovered,         // pulse derived and applied
    AlreadyLocalized,  // measurement left sigma11 at 1; nothing to do
};

struct RecoveryReport {
    DensityMatrix conditioned;  // state after the measurement phase
    std::optional<RecoveryControls> controls;
    double final_sigma11 = 0.0;
    RecoveryOutcome outcome = RecoveryOutcome::Recovered;
};

// Full proposed experiment: measure the symmetric pure state with the dots
// uncoupled for tau_meas, then derive and apply the recovery pulse with
// tunnel coupling h_rec. The detector must be ideal (gamma_d_extra = 0);
// a state left with no usable coherence raises NoCoherence unless it is
// already localized in state 1.
RecoveryReport measurement_then_recovery(double tau_meas, double dt, const DetectorParams& det,
                                         double h_rec, double hbar, std::uint64_t seed,
                                         std::uint64_t stream = 0);

struct PurityTrace {
    std::vector<double> times;
    std::vector<double> defect;
};

// Tracks purity_defect along a single monitored trajectory started from the
// fully mixed state. With an ideal detector the defect decays toward zero;
// with delta_i = 0 it stays at exactly 0.25.
PurityTrace purification_experiment(double t_end, double dt, const SystemParams& sys,
                                    const DetectorParams& det, std::uint64_t seed,
                                    std::uint64_t stream = 0, bool allow_large_dt = false);

}  // namespace dqd
