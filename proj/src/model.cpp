#include "dqd/model.hpp"

#include <cmath>
#include <limits>

namespace dqd {

double purity_defect(const DensityMatrix& rho) {
    const double off2 = rho.re_sigma12 * rho.re_sigma12 + rho.im_sigma12 * rho.im_sigma12;
    return rho.sigma11 * rho.sigma22() - off2;
}

double offdiag_abs(const DensityMatrix& rho) {
    return std::hypot(rho.re_sigma12, rho.im_sigma12);
}

DerivedQuantities derived_quantities(const SystemParams& sys, const DetectorParams& det) {
    DerivedQuantities d;
    const double di2 = det.delta_i * det.delta_i;
    d.gamma_d_meas = di2 / (4.0 * det.s_i);
    d.tau_loc = det.delta_i == 0.0 ? std::numeric_limits<double>::infinity()
                                   : 2.0 * det.s_i / di2;
    d.omega = std::sqrt(4.0 * sys.h_coupling * sys.h_coupling + sys.eps * sys.eps) / sys.hbar;
    if (sys.h_coupling != 0.0) {
        d.coupling_c = sys.hbar * di2 / (det.s_i * sys.h_coupling);
    }
    return d;
}

namespace {

void require_finite(double value, const char* name) {
    if (!std::isfinite(value)) {
        throw NonFiniteParameter(std::string("parameter is not finite: ") + name);
    }
}

}  // namespace

ValidatedModel validate_params(const SystemParams& sys, const DetectorParams& det) {
    require_finite(sys.eps, "system.eps");
    require_finite(sys.h_coupling, "system.h");
    require_finite(sys.hbar, "system.hbar");
    require_finite(det.i0, "detector.i0");
    require_finite(det.delta_i, "detector.delta_i");
    require_finite(det.s_i, "detector.s_i");
    require_finite(det.gamma_d_extra, "detector.gamma_d");

    if (sys.hbar <= 0.0) {
        throw ValidationError("system.hbar must be positive");
    }
    if (det.s_i <= 0.0) {
        throw NonPositiveSpectralDensity("detector.s_i must be positive");
    }
    if (det.gamma_d_extra < 0.0) {
        throw NegativeExcessDecoherence("detector.gamma_d must be non-negative");
    }

    ValidatedModel model{sys, det, derived_quantities(sys, det), {}};
    if (std::abs(det.delta_i) > 0.3 * std::abs(det.i0)) {
        model.warnings.push_back(
            "detector response |delta_i| exceeds 0.3 i0; outside the weak-coupling regime "
            "the linear-detector treatment degrades");
    }
    return model;
}

void validate_state(const DensityMatrix& rho) {
    if (!std::isfinite(rho.sigma11) || !std::isfinite(rho.re_sigma12) ||
        !std::isfinite(rho.im_sigma12)) {
        throw NonFiniteParameter("density matrix entries must be finite");
    }
    if (rho.sigma11 < 0.0 || rho.sigma11 > 1.0) {
        throw ValidationError("sigma11 must lie in [0, 1]");
    }
    if (purity_defect(rho) < -1e-12) {
        throw ValidationError("density matrix violates |sigma12|^2 <= sigma11 sigma22");
    }
}

}  // namespace dqd
