#pragma once

#include <span>

#include "dqd/model.hpp"
#include "dqd/random.hpp"
#include "dqd/trajectory.hpp"

namespace dqd {

// Distribution of the time-averaged current over a window of length tau: a
// two-component Gaussian mixture weighted by the occupation probabilities.
// Both components share the shot-noise variance s_i / (2 tau).
struct OutcomeDistribution {
    double weight1 = 0.0;  // sigma11
    double weight2 = 0.0;  // sigma22
    double mean1 = 0.0;    // i0 - delta_i/2
    double mean2 = 0.0;    // i0 + delta_i/2
    double variance = 0.0;
};

// Throws NonPositiveWindow when tau <= 0.
OutcomeDistribution outcome_distribution(const DensityMatrix& rho, double tau,
                                         const DetectorParams& det);

// Draws one averaged readout from the mixture: picks the component, then adds
// Gaussian noise. Consumes one uniform and one normal deviate.
double sample_outcome(const OutcomeDistribution& dist, RandomSource& rng);

// Conditions the state on an averaged readout i_avg over a window tau.
// The diagonal moves in log-odds form,
//   logit(sigma11') = logit(sigma11) - 2 delta_i tau / s_i * (i_avg - i0),
// so readouts near i1 push sigma11 up. The off-diagonal is rescaled by
// sqrt(sigma11' sigma22' / (sigma11 sigma22)) and damped by
// exp(-gamma_d_extra tau). Fully localized states (sigma11 = 0 or 1) are fixed
// points with sigma12 = 0.
DensityMatrix bayes_update(const DensityMatrix& rho, double i_avg, double tau,
                           const DetectorParams& det);

// Replays a stored current record through the same split-step updates the
// generator used, reconstructing the conditioned state from rho0. With no
// tunneling the result is independent of how the record is binned.
DensityMatrix condition_on_record(const DensityMatrix& rho0, std::span<const CurrentSample> record,
                                  const SystemParams& sys, const DetectorParams& det);

}  // namespace dqd
