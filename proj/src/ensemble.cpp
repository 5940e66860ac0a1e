#include "dqd/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <utility>

namespace dqd {
namespace {

// Per-time running sums for one block of trajectories. Blocks combine by
// elementwise addition in a reduction tree whose shape depends only on
// n_traj, so the float rounding, and hence the result, is identical no
// matter how many workers execute the leaves.
struct Accumulator {
    std::vector<double> s11, s11_sq;
    std::vector<double> re, re_sq;
    std::vector<double> im, im_sq;
    std::vector<double> pd, pd_sq;

    explicit Accumulator(std::size_t n_times)
        : s11(n_times, 0.0), s11_sq(n_times, 0.0),
          re(n_times, 0.0), re_sq(n_times, 0.0),
          im(n_times, 0.0), im_sq(n_times, 0.0),
          pd(n_times, 0.0), pd_sq(n_times, 0.0) {}

    void absorb(const Accumulator& other) {
        const std::size_t n = s11.size();
        for (std::size_t k = 0; k < n; ++k) {
            s11[k] += other.s11[k];
            s11_sq[k] += other.s11_sq[k];
            re[k] += other.re[k];
            re_sq[k] += other.re_sq[k];
            im[k] += other.im[k];
            im_sq[k] += other.im_sq[k];
            pd[k] += other.pd[k];
            pd_sq[k] += other.pd_sq[k];
        }
    }
};

struct EnsembleJob {
    DensityMatrix rho0;
    double t_end = 0.0;
    double dt = 0.0;
    SystemParams sys;
    DetectorParams det;
    std::uint64_t master_seed = 0;
    Scheme scheme = Scheme::BayesSplit;
    bool allow_large_dt = false;
    std::size_t n_times = 0;
};

Accumulator simulate_leaf(const EnsembleJob& job, std::size_t index) {
    TrajectoryRecord record;
    try {
        record = run_trajectory(job.rho0, job.t_end, job.dt, job.sys, job.det,
                                job.master_seed, job.scheme, index, job.allow_large_dt);
    } catch (const NumericalBlowup& err) {
        // The only error that depends on the drawn noise; tag it with the
        // trajectory that blew up. Parameter problems propagate untouched.
        throw NumericalBlowup("trajectory " + std::to_string(index) + ": " + err.what());
    }
    Accumulator acc(job.n_times);
    for (std::size_t k = 0; k < job.n_times; ++k) {
        const DensityMatrix& rho = record.states[k];
        const double defect = purity_defect(rho);
        acc.s11[k] = rho.sigma11;
        acc.s11_sq[k] = rho.sigma11 * rho.sigma11;
        acc.re[k] = rho.re_sigma12;
        acc.re_sq[k] = rho.re_sigma12 * rho.re_sigma12;
        acc.im[k] = rho.im_sigma12;
        acc.im_sq[k] = rho.im_sigma12 * rho.im_sigma12;
        acc.pd[k] = defect;
        acc.pd_sq[k] = defect * defect;
    }
    return acc;
}

// Reduces trajectories [lo, hi). The split point and the left-then-right
// absorb order are functions of the index range alone; parallelism only
// decides which thread computes a subtree, never the arithmetic.
Accumulator reduce_range(const EnsembleJob& job, std::size_t lo, std::size_t hi, unsigned depth) {
    if (hi - lo == 1) {
        return simulate_leaf(job, lo);
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    if (depth > 0) {
        auto right = std::async(std::launch::async, reduce_range, std::cref(job), mid, hi,
                                depth - 1);
        Accumulator left = reduce_range(job, lo, mid, depth - 1);
        left.absorb(right.get());
        return left;
    }
    Accumulator left = reduce_range(job, lo, mid, 0);
    left.absorb(reduce_range(job, mid, hi, 0));
    return left;
}

unsigned async_depth(unsigned workers, std::size_t n_traj) {
    unsigned resolved = workers != 0 ? workers : std::thread::hardware_concurrency();
    if (resolved <= 1) return 0;
    resolved = std::min<unsigned>(resolved, 64);
    unsigned depth = 0;
    while ((1u << depth) < resolved && (std::size_t{1} << depth) < n_traj) {
        ++depth;
    }
    return depth;
}

double standard_error(double sum, double sum_sq, std::size_t n) {
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mean = sum / static_cast<double>(n);
    const double var = (sum_sq - sum * mean) / static_cast<double>(n - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
}

}  // namespace

EnsembleStats run_ensemble(const DensityMatrix& rho0, double t_end, double dt,
                           const SystemParams& sys, const DetectorParams& det,
                           std::uint64_t master_seed, std::size_t n_traj, Scheme scheme,
                           unsigned workers, bool allow_large_dt) {
    if (n_traj == 0) {
        throw NonPositiveValue("ensemble needs at least one trajectory");
    }
    validate_params(sys, det);
    validate_state(rho0);
    if (!(dt > 0.0) || !(t_end > 0.0) || !std::isfinite(dt) || !std::isfinite(t_end)) {
        throw NonPositiveValue("timestep and end time must be positive and finite");
    }

    const auto n_steps = static_cast<std::size_t>(std::llround(t_end / dt));
    if (n_steps == 0) {
        throw NonPositiveValue("end time shorter than one timestep");
    }
    EnsembleJob job{rho0, t_end, dt, sys, det, master_seed, scheme, allow_large_dt,
                    n_steps + 1};

    const Accumulator total =
        reduce_range(job, 0, n_traj, async_depth(workers, n_traj));

    EnsembleStats stats;
    stats.n_traj = n_traj;
    const auto n = static_cast<double>(n_traj);
    stats.times.resize(job.n_times);
    stats.mean_sigma11.resize(job.n_times);
    stats.se_sigma11.resize(job.n_times);
    stats.mean_re_sigma12.resize(job.n_times);
    stats.se_re_sigma12.resize(job.n_times);
    stats.mean_im_sigma12.resize(job.n_times);
    stats.se_im_sigma12.resize(job.n_times);
    stats.abs_mean_offdiag.resize(job.n_times);
    stats.mean_purity_defect.resize(job.n_times);
    stats.se_purity_defect.resize(job.n_times);
    for (std::size_t k = 0; k < job.n_times; ++k) {
        stats.times[k] = static_cast<double>(k) * dt;
        stats.mean_sigma11[k] = total.s11[k] / n;
        stats.se_sigma11[k] = standard_error(total.s11[k], total.s11_sq[k], n_traj);
        stats.mean_re_sigma12[k] = total.re[k] / n;
        stats.se_re_sigma12[k] = standard_error(total.re[k], total.re_sq[k], n_traj);
        stats.mean_im_sigma12[k] = total.im[k] / n;
        stats.se_im_sigma12[k] = standard_error(total.im[k], total.im_sq[k], n_traj);
        stats.abs_mean_offdiag[k] = std::hypot(stats.mean_re_sigma12[k], stats.mean_im_sigma12[k]);
        stats.mean_purity_defect[k] = total.pd[k] / n;
        stats.se_purity_defect[k] = standard_error(total.pd[k], total.pd_sq[k], n_traj);
    }
    return stats;
}

FitResult fit_decay_rate(std::span<const double> times, std::span<const double> values) {
    if (times.size() != values.size()) {
        throw DegenerateFit("time and value series differ in length");
    }
    if (times.size() < 3) {
        throw DegenerateFit("decay fit needs at least 3 points");
    }
    const auto n = static_cast<double>(times.size());
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(values[k] > 0.0)) {
            throw NonPositiveValue("decay fit requires strictly positive values");
        }
        const double y = std::log(values[k]);
        st += times[k];
        sy += y;
        stt += times[k] * times[k];
        sty += times[k] * y;
        syy += y * y;
    }
    const double var_t = stt - st * st / n;
    if (!(var_t > 0.0)) {
        throw DegenerateFit("decay fit needs at least two distinct times");
    }
    const double cov_ty = sty - st * sy / n;
    const double slope = cov_ty / var_t;
    const double var_y = syy - sy * sy / n;

    FitResult fit;
    fit.rate = std::abs(slope);
    fit.intercept = (sy - slope * st) / n;
    fit.r_squared = var_y > 0.0 ? (cov_ty * cov_ty) / (var_t * var_y) : 1.0;
    return fit;
}

namespace {

std::size_t nearest_index(const std::vector<double>& times, double t_eval) {
    const auto it = std::lower_bound(times.begin(), times.end(), t_eval);
    if (it == times.begin()) return 0;
    if (it == times.end()) return times.size() - 1;
    const auto after = static_cast<std::size_t>(it - times.begin());
    return (*it - t_eval < t_eval - times[after - 1]) ? after : after - 1;
}

void check_threshold(double threshold) {
    if (!(threshold > 0.5) || !(threshold < 1.0)) {
        throw ValidationError("localization threshold must lie in (0.5, 1)");
    }
}

LocalizationStats classify_counts(std::size_t in_dot1, std::size_t in_dot2, std::size_t n) {
    LocalizationStats stats;
    stats.n_traj = n;
    stats.frac_dot1 = static_cast<double>(in_dot1) / static_cast<double>(n);
    stats.frac_dot2 = static_cast<double>(in_dot2) / static_cast<double>(n);
    stats.frac_undecided = static_cast<double>(n - in_dot1 - in_dot2) / static_cast<double>(n);
    return stats;
}

}  // namespace

LocalizationStats classify_localization(std::span<const TrajectoryRecord> records,
                                        double threshold, double t_eval) {
    check_threshold(threshold);
    if (records.empty()) {
        throw NonPositiveValue("localization needs at least one record");
    }
    std::size_t in_dot1 = 0, in_dot2 = 0;
    for (const TrajectoryRecord& record : records) {
        const double s11 = record.states[nearest_index(record.times, t_eval)].sigma11;
        if (s11 >= threshold) {
            ++in_dot1;
        } else if (s11 <= 1.0 - threshold) {
            ++in_dot2;
        }
    }
    return classify_counts(in_dot1, in_dot2, records.size());
}

LocalizationStats localization_stats(const DensityMatrix& rho0, double t_eval, double dt,
                                     const SystemParams& sys, const DetectorParams& det,
                                     std::uint64_t master_seed, std::size_t n_traj,
                                     double threshold, unsigned workers) {
    check_threshold(threshold);
    if (n_traj == 0) {
        throw NonPositiveValue("localization needs at least one trajectory");
    }
    // Counting is order-independent, so a plain strided split over workers is
    // enough here; no reduction tree needed.
    const unsigned n_workers =
        std::max(1u, std::min<unsigned>(workers != 0 ? workers : std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(std::min<std::size_t>(n_traj, 64))));
    auto count_stride = [&](unsigned offset) {
        std::pair<std::size_t, std::size_t> counts{0, 0};
        for (std::size_t i = offset; i < n_traj; i += n_workers) {
            const TrajectoryRecord record =
                run_trajectory(rho0, t_eval, dt, sys, det, master_seed, Scheme::BayesSplit, i);
            const double s11 = record.states.back().sigma11;
            if (s11 >= threshold) {
                ++counts.first;
            } else if (s11 <= 1.0 - threshold) {
                ++counts.second;
            }
        }
        return counts;
    };

    std::vector<std::future<std::pair<std::size_t, std::size_t>>> futures;
    for (unsigned w = 1; w < n_workers; ++w) {
        futures.push_back(std::async(std::launch::async, count_stride, w));
    }
    auto [in_dot1, in_dot2] = count_stride(0);
    for (auto& fut : futures) {
        const auto [d1, d2] = fut.get();
        in_dot1 += d1;
        in_dot2 += d2;
    }
    return classify_counts(in_dot1, in_dot2, n_traj);
}

Spectrum oscillation_spectrum(std::span<const double> series, double dt) {
    const std::size_t n = series.size();
    if (n < 16) {
        throw SeriesTooShort("periodogram needs at least 16 samples");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw NonPositiveValue("sample spacing must be positive and finite");
    }
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);

    const std::size_t n_bins = n / 2;
    Spectrum spectrum;
    spectrum.omega.resize(n_bins);
    spectrum.power.resize(n_bins);
    const double base = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
    for (std::size_t k = 1; k <= n_bins; ++k) {
        // Goertzel-style recurrence: evaluates the k-th DFT bin with one
        // cosine per bin instead of one per sample.
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        const double coeff = 2.0 * std::cos(w);
        double s_prev = 0.0, s_prev2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double s = (series[j] - mean) + coeff * s_prev - s_prev2;
            s_prev2 = s_prev;
            s_prev = s;
        }
        const double power =
            s_prev * s_prev + s_prev2 * s_prev2 - coeff * s_prev * s_prev2;
        spectrum.omega[k - 1] = base * static_cast<double>(k);
        spectrum.power[k - 1] = power / static_cast<double>(n);
    }
    return spectrum;
}

double peak_frequency(const Spectrum& spectrum) {
    if (spectrum.power.empty()) {
        throw SeriesTooShort("empty spectrum has no peak");
    }
    const auto it = std::max_element(spectrum.power.begin(), spectrum.power.end());
    return spectrum.omega[static_cast<std::size_t>(it - spectrum.power.begin())];
}

DwellTimes dwell_times(const TrajectoryRecord& record, double hi, double lo) {
    if (!(lo < 0.5) || !(hi > 0.5)) {
        throw ValidationError("hysteresis thresholds must straddle 0.5");
    }
    DwellTimes dwells;
    // Schmitt trigger over sigma11: 0 = undecided (before the first
    // threshold crossing), 1 = in dot 1, 2 = in dot 2.
    int state = 0;
    double entered = 0.0;
    bool left_censored = false;
    for (std::size_t k = 0; k < record.times.size(); ++k) {
        const double s11 = record.states[k].sigma11;
        int next = state;
        if (s11 >= hi) {
            next = 1;
        } else if (s11 <= lo) {
            next = 2;
        }
        if (next == state) continue;
        if (state != 0 && !left_censored) {
            const double duration = record.times[k] - entered;
            (state == 1 ? dwells.dot1 : dwells.dot2).push_back(duration);
        }
        // A dwell already in progress at the first sample has an unknown
        // start; the one in progress when the record ends never emits.
        left_censored = state == 0 && k == 0;
        state = next;
        entered = record.times[k];
    }
    return dwells;
}

}  // namespace dqd
