#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dqd/errors.hpp"

namespace dqd {

// Conditioned density matrix of the two-level system. Only three real numbers
// are stored; sigma22 = 1 - sigma11 and sigma21 = conj(sigma12) are implicit,
// so the trace and Hermiticity cannot be violated by construction.
struct DensityMatrix {
    double sigma11 = 0.5;
    double re_sigma12 = 0.0;
    double im_sigma12 = 0.0;

    double sigma22() const { return 1.0 - sigma11; }

    friend bool operator==(const DensityMatrix&, const DensityMatrix&) = default;
};

// sigma11*sigma22 - |sigma12|^2. Zero for a pure state, 0.25 for the fully
// mixed symmetric state, negative values mean the state is unphysical.
double purity_defect(const DensityMatrix& rho);

// |sigma12|
double offdiag_abs(const DensityMatrix& rho);

// Two-level system Hamiltonian parameters: energy asymmetry eps between the
// dots and tunnel coupling h_coupling across the barrier.
struct SystemParams {
    double eps = 0.0;
    double h_coupling = 0.0;
    double hbar = 1.0;

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

// Point-contact detector: average current i0, response delta_i (current
// difference between the two localized states), one-sided current spectral
// density s_i, and any extra dephasing rate beyond the measurement back-action
// (zero for an ideal detector).
struct DetectorParams {
    double i0 = 0.0;
    double delta_i = 0.0;
    double s_i = 1.0;
    double gamma_d_extra = 0.0;

    // Currents for the two localized states; state 1 sits below the average.
    double i1() const { return i0 - 0.5 * delta_i; }
    double i2() const { return i0 + 0.5 * delta_i; }

    friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

// Quantities derived from the raw parameters.
//   gamma_d_meas: measurement-induced ensemble dephasing rate, delta_i^2/(4 s_i)
//   tau_loc:      single-run localization time, 2 s_i/delta_i^2 (inf if delta_i = 0)
//   omega:        free precession frequency sqrt(4 h^2 + eps^2)/hbar
//   coupling_c:   dimensionless detector coupling hbar delta_i^2/(s_i h);
//                 empty when h_coupling = 0
struct DerivedQuantities {
    double gamma_d_meas = 0.0;
    double tau_loc = 0.0;
    double omega = 0.0;
    std::optional<double> coupling_c;
};

DerivedQuantities derived_quantities(const SystemParams& sys, const DetectorParams& det);

// System + detector bundle carried along with trajectory records.
struct ModelParams {
    SystemParams sys;
    DetectorParams det;
};

struct ValidatedModel {
    SystemParams sys;
    DetectorParams det;
    DerivedQuantities derived;
    std::vector<std::string> warnings;
};

// Checks parameters, computes derived quantities and collects advisories.
// Throws NonPositiveSpectralDensity, NegativeExcessDecoherence or
// NonFiniteParameter. A response outside the weak-coupling regime
// (|delta_i| > 0.3 i0) produces a warning, not an error.
ValidatedModel validate_params(const SystemParams& sys, const DetectorParams& det);

// Rejects states outside the physical region: sigma11 in [0, 1], finite
// entries, purity defect no more negative than -1e-12.
void validate_state(const DensityMatrix& rho);

}  // namespace dqd
