#include "dqd/bayes.hpp"

#include <cmath>

namespace dqd {

OutcomeDistribution outcome_distribution(const DensityMatrix& rho, double tau,
                                         const DetectorParams& det) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw NonPositiveWindow("averaging window must be positive and finite");
    }
    OutcomeDistribution dist;
    dist.weight1 = rho.sigma11;
    dist.weight2 = rho.sigma22();
    dist.mean1 = det.i1();
    dist.mean2 = det.i2();
    dist.variance = det.s_i / (2.0 * tau);
    return dist;
}

double sample_outcome(const OutcomeDistribution& dist, RandomSource& rng) {
    const double u = rng.uniform01();
    const double mean = u <= dist.weight1 ? dist.mean1 : dist.mean2;
    return mean + std::sqrt(dist.variance) * rng.normal();
}

DensityMatrix bayes_update(const DensityMatrix& rho, double i_avg, double tau,
                           const DetectorParams& det) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw NonPositiveWindow("averaging window must be positive and finite");
    }
    const double p = rho.sigma11;
    // Localized states are fixed points of the measurement, and the purity
    // bound forces sigma12 = 0 there.
    if (p <= 0.0) return {0.0, 0.0, 0.0};
    if (p >= 1.0) return {1.0, 0.0, 0.0};

    const double q = 1.0 - p;
    // Gaussian likelihood ratio for the two current levels, in log-odds form.
    // Readouts below i0 (nearer i1) increase sigma11.
    const double shift = -2.0 * det.delta_i * tau / det.s_i * (i_avg - det.i0);
    const double logit = std::log(p / q) + shift;

    double p_new, q_new;
    if (logit >= 0.0) {
        const double e = std::exp(-logit);
        p_new = 1.0 / (1.0 + e);
        q_new = e / (1.0 + e);
    } else {
        const double e = std::exp(logit);
        p_new = e / (1.0 + e);
        q_new = 1.0 / (1.0 + e);
    }

    // Conditioning rescales the coherence so that a pure state stays pure;
    // only detector nonideality damps it on top of that.
    double scale = std::sqrt((p_new * q_new) / (p * q));
    if (det.gamma_d_extra > 0.0) {
        scale *= std::exp(-det.gamma_d_extra * tau);
    }
    return {p_new, rho.re_sigma12 * scale, rho.im_sigma12 * scale};
}

DensityMatrix condition_on_record(const DensityMatrix& rho0, std::span<const CurrentSample> record,
                                  const SystemParams& sys, const DetectorParams& det) {
    validate_state(rho0);
    DensityMatrix rho = rho0;
    for (const CurrentSample& window : record) {
        // Same operation order as the generating scheme, so replaying a
        // record reproduces the generated states exactly.
        rho = hamiltonian_evolve(rho, 0.5 * window.dt, sys);
        rho = bayes_update(rho, window.i_avg, window.dt, det);
        rho = hamiltonian_evolve(rho, 0.5 * window.dt, sys);
    }
    return rho;
}

}  // namespace dqd
