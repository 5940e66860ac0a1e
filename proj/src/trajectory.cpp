#include "dqd/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dqd/bayes.hpp"

namespace dqd {

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::BayesSplit: return "bayes";
        case Scheme::EulerLangevin: return "euler";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "bayes") return Scheme::BayesSplit;
    if (name == "euler") return Scheme::EulerLangevin;
    throw ParseError("unknown scheme '" + name + "' (expected 'bayes' or 'euler')");
}

double max_timestep(const SystemParams& sys, const DetectorParams& det) {
    const DerivedQuantities d = derived_quantities(sys, det);
    double dt_max = 0.1 * d.tau_loc;
    if (d.omega > 0.0) {
        dt_max = std::min(dt_max, 0.1 / d.omega);
    }
    return dt_max;
}

DensityMatrix hamiltonian_evolve(const DensityMatrix& rho, double dt,
                                 const SystemParams& sys) {
    // Coherent evolution is a rotation of the Bloch vector
    //   (x, y, z) = (2 Re s12, 2 Im s12, 2 s11 - 1)
    // about the axis (-2 h / hbar, 0, eps / hbar).  Apply it in closed form
    // so the step is exactly norm preserving at any dt.
    const double wx = -2.0 * sys.h_coupling / sys.hbar;
    const double wz = sys.eps / sys.hbar;
    const double omega = std::hypot(wx, wz);
    if (omega == 0.0 || dt == 0.0) return rho;

    const double x = 2.0 * rho.re_sigma12;
    const double y = 2.0 * rho.im_sigma12;
    const double z = 2.0 * rho.sigma11 - 1.0;

    const double nx = wx / omega;
    const double nz = wz / omega;
    const double theta = omega * dt;
    const double c = std::cos(theta);
    const double s = std::sin(theta);

    // Rodrigues rotation with the axis in the x-z plane (ny = 0).
    const double dot = nx * x + nz * z;
    const double cross_x = -nz * y;
    const double cross_y = nz * x - nx * z;
    const double cross_z = nx * y;

    const double x2 = x * c + cross_x * s + nx * dot * (1.0 - c);
    const double y2 = y * c + cross_y * s;
    const double z2 = z * c + cross_z * s + nz * dot * (1.0 - c);

    return {0.5 * (z2 + 1.0), 0.5 * x2, 0.5 * y2};
}

std::pair<DensityMatrix, CurrentSample> measurement_substep(const DensityMatrix& rho,
                                                            double dt,
                                                            const DetectorParams& det,
                                                            RandomSource& rng) {
    const OutcomeDistribution dist = outcome_distribution(rho, dt, det);
    const double i_avg = sample_outcome(dist, rng);
    DensityMatrix next = bayes_update(rho, i_avg, dt, det);
    return {next, CurrentSample{0.0, dt, i_avg}};
}

std::pair<DensityMatrix, CurrentSample> step(const DensityMatrix& rho, double dt,
                                             const SystemParams& sys, const DetectorParams& det,
                                             RandomSource& rng, bool allow_large_dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw NonPositiveValue("timestep must be positive and finite");
    }
    if (!allow_large_dt) {
        const double dt_max = max_timestep(sys, det);
        if (dt > dt_max * (1.0 + 1e-12)) {
            throw TimestepTooLarge("timestep " + std::to_string(dt) +
                                   " exceeds stability bound " + std::to_string(dt_max));
        }
    }
    DensityMatrix rho1 = hamiltonian_evolve(rho, 0.5 * dt, sys);
    auto [rho2, sample] = measurement_substep(rho1, dt, det, rng);
    return {hamiltonian_evolve(rho2, 0.5 * dt, sys), sample};
}

DensityMatrix euler_langevin_step(const DensityMatrix& rho, double dt,
                                  const SystemParams& sys, const DetectorParams& det,
                                  const NoiseSample& noise) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw NonPositiveValue("timestep must be positive and finite");
    }
    const double p = rho.sigma11;
    const double q = rho.sigma22();
    const double re = rho.re_sigma12;
    const double im = rho.im_sigma12;

    const double gamma_d = det.gamma_d_extra;
    const double wx = -2.0 * sys.h_coupling / sys.hbar;
    const double wz = sys.eps / sys.hbar;

    // Shared stochastic factor: the conditioned drift plus the white-noise
    // kick from the detector output.
    const double r_factor =
        -p * q * (2.0 * det.delta_i / det.s_i) *
        ((q - p) * det.delta_i / 2.0 + noise.xi);

    const double dp = -wx * im + r_factor;

    // The coherence couples to the same noise through (q - p) / (2 p q); at a
    // localized state sigma12 is zero, so the singular prefactor is moot and
    // the stochastic term is dropped there.
    double stoch12 = 0.0;
    if (p > 0.0 && q > 0.0) {
        stoch12 = (q - p) / (2.0 * p * q) * r_factor;
    }
    const double dre = -wz * im + re * stoch12 - gamma_d * re;
    const double dim = wz * re + 0.5 * wx * (2.0 * p - 1.0) + im * stoch12 - gamma_d * im;

    DensityMatrix next{p + dp * dt, re + dre * dt, im + dim * dt};
    next.sigma11 = std::clamp(next.sigma11, 0.0, 1.0);
    return next;
}

TrajectoryRecord run_trajectory(const DensityMatrix& rho0, double t_end, double dt,
                                const SystemParams& sys, const DetectorParams& det,
                                std::uint64_t seed, Scheme scheme, std::uint64_t stream,
                                bool allow_large_dt) {
    validate_params(sys, det);
    validate_state(rho0);
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw NonPositiveValue("timestep must be positive and finite");
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw NonPositiveValue("end time must be positive and finite");
    }
    if (scheme == Scheme::BayesSplit && !allow_large_dt) {
        const double dt_max = max_timestep(sys, det);
        if (dt > dt_max * (1.0 + 1e-12)) {
            throw TimestepTooLarge("timestep " + std::to_string(dt) +
                                   " exceeds stability bound " + std::to_string(dt_max));
        }
    }

    const auto n_steps = static_cast<std::size_t>(std::llround(t_end / dt));
    if (n_steps == 0) {
        throw NonPositiveValue("end time shorter than one timestep");
    }

    RandomSource rng(seed, stream);
    TrajectoryRecord record;
    record.params = {sys, det};
    record.scheme = scheme;
    record.seed = seed;
    record.stream = stream;
    record.dt = dt;
    record.times.reserve(n_steps + 1);
    record.states.reserve(n_steps + 1);
    record.currents.reserve(n_steps);

    DensityMatrix rho = rho0;
    record.times.push_back(0.0);
    record.states.push_back(rho);

    const double xi_sd = std::sqrt(det.s_i / (2.0 * dt));
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t0 = static_cast<double>(k) * dt;
        if (scheme == Scheme::BayesSplit) {
            // The bound on dt was checked once above, so skip it per step.
            auto [next, sample] = step(rho, dt, sys, det, rng, true);
            rho = next;
            sample.t_start = t0;
            record.currents.push_back(sample);
        } else {
            const double xi = xi_sd * rng.normal();
            // Record the same observable the conditioning scheme sees: the
            // window-averaged detector output.
            const double i_avg = det.i0 + (rho.sigma22() - rho.sigma11) * det.delta_i / 2.0 + xi;
            rho = euler_langevin_step(rho, dt, sys, det, NoiseSample{xi});
            record.currents.push_back(CurrentSample{t0, dt, i_avg});
        }
        if (!std::isfinite(rho.sigma11) || !std::isfinite(rho.re_sigma12) ||
            !std::isfinite(rho.im_sigma12)) {
            throw NumericalBlowup("state became non-finite at t = " +
                                  std::to_string(t0 + dt));
        }
        record.times.push_back(static_cast<double>(k + 1) * dt);
        record.states.push_back(rho);
    }
    return record;
}

std::vector<double> filter_current(const TrajectoryRecord& record, double window) {
    const std::size_t n = record.currents.size();
    if (!(window > 0.0)) {
        throw NonPositiveWindow("filter window must be positive");
    }
    if (n == 0) return {};
    const double dt = record.dt;
    if (std::isinf(window)) {
        // An infinite window is the running average over everything seen so
        // far; handle it directly rather than saturating the sample count.
        return cumulative_average(record);
    }
    // floor() with a relative nudge so window = m*dt lands on m despite
    // rounding in the division.
    const auto width = static_cast<std::size_t>(std::floor(window / dt * (1.0 + 1e-12)));
    if (width == 0) {
        throw WindowTooShort("filter window shorter than one sample");
    }

    // Prefix sums give each trailing average in O(1).
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        prefix[k + 1] = prefix[k] + record.currents[k].i_avg;
    }
    std::vector<double> filtered(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = (k + 1 >= width) ? k + 1 - width : 0;
        filtered[k] = (prefix[k + 1] - prefix[lo]) / static_cast<double>(k + 1 - lo);
    }
    return filtered;
}

std::vector<double> cumulative_average(const TrajectoryRecord& record) {
    const std::size_t n = record.currents.size();
    std::vector<double> out(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sum += record.currents[k].i_avg;
        out[k] = sum / static_cast<double>(k + 1);
    }
    return out;
}

}  // namespace dqd
