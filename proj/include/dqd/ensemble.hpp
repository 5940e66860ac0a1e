#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dqd/trajectory.hpp"

namespace dqd {

// Per-time averages over an ensemble of trajectories, with standard errors of
// the mean. abs_mean_offdiag is |mean sigma12|, the quantity whose decay gives
// the ensemble dephasing rate.
struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> mean_sigma11, se_sigma11;
    std::vector<double> mean_re_sigma12, se_re_sigma12;
    std::vector<double> mean_im_sigma12, se_im_sigma12;
    std::vector<double> abs_mean_offdiag;
    std::vector<double> mean_purity_defect, se_purity_defect;
    std::size_t n_traj = 0;
};

// Runs n_traj independent trajectories (streams 0..n_traj-1 of master_seed)
// and accumulates the statistics with a fixed pairwise reduction tree, so the
// result is bit-identical for any worker count. workers = 0 picks the
// hardware concurrency. Trajectory errors are rethrown with the failing
// stream index in the message.
EnsembleStats run_ensemble(const DensityMatrix& rho0, double t_end, double dt,
                           const SystemParams& sys, const DetectorParams& det,
                           std::uint64_t master_seed, std::size_t n_traj,
                           Scheme scheme = Scheme::BayesSplit, unsigned workers = 0,
                           bool allow_large_dt = false);

struct FitResult {
    double rate = 0.0;       // |slope| of the least-squares line through (t, ln y)
    double intercept = 0.0;  // fitted ln y at t = 0
    double r_squared = 0.0;
};

// Log-linear decay fit. Throws NonPositiveValue if any y <= 0 and
// DegenerateFit for fewer than 3 points or an all-equal time axis.
FitResult fit_decay_rate(std::span<const double> times, std::span<const double> values);

struct LocalizationStats {
    double frac_dot1 = 0.0;       // sigma11 >= threshold
    double frac_dot2 = 0.0;       // sigma11 <= 1 - threshold
    double frac_undecided = 0.0;  // everything in between
    std::size_t n_traj = 0;
};

// Classifies sigma11 at the recorded time nearest t_eval for each record.
// threshold must lie in (0.5, 1).
LocalizationStats classify_localization(std::span<const TrajectoryRecord> records,
                                        double threshold, double t_eval);

// Streaming variant: generates n_traj trajectories up to t_eval (streams
// 0..n_traj-1 of master_seed, BayesSplit) and classifies their final states
// without keeping whole records in memory.
LocalizationStats localization_stats(const DensityMatrix& rho0, double t_eval, double dt,
                                     const SystemParams& sys, const DetectorParams& det,
                                     std::uint64_t master_seed, std::size_t n_traj,
                                     double threshold = 0.99, unsigned workers = 0);

struct Spectrum {
    std::vector<double> omega;  // angular frequency of each bin, k = 1 .. N/2
    std::vector<double> power;
};

// Periodogram of a uniformly sampled series (mean removed, zero bin dropped).
// Throws SeriesTooShort for fewer than 16 samples.
Spectrum oscillation_spectrum(std::span<const double> series, double dt);

// Angular frequency of the strongest periodogram bin.
double peak_frequency(const Spectrum& spectrum);

struct DwellTimes {
    std::vector<double> dot1;  // completed stretches spent localized near state 1
    std::vector<double> dot2;
};

// Telegraph analysis of sigma11(t) with Schmitt-trigger hysteresis: the
// reconstructed state flips to 1 when sigma11 >= hi and to 2 when
// sigma11 <= lo. Dwells cut off by either end of the record are discarded.
DwellTimes dwell_times(const TrajectoryRecord& record, double hi = 0.9, double lo = 0.1);

}  // namespace dqd
