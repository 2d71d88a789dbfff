#pragma once

#include "sandinv/common/types.hpp"
#include "sandinv/mpm/material.hpp"

namespace sandinv::mpm {

struct ReturnResult {
  Mat3 deformation_gradient;
  Mat3 kirchhoff_stress;
  bool plastic = false;
};

/// Drucker-Prager return mapping in Hencky strain space with St. Venant-Kirchhoff
/// (Hencky) elasticity. Admissible states come back bit-unchanged; shear-yielding
/// states are projected radially in the deviatoric plane at fixed volume;
/// states beyond the cone apex go to the apex.
/// Throws SimulationBlowup (no frame/particle) on a non-finite decomposition.
ReturnResult drucker_prager_return(const Mat3& f_trial, const MaterialParams& params);

/// Kirchhoff stress of the Hencky model for deformation gradient f.
Mat3 hencky_kirchhoff(const Mat3& f, const MaterialParams& params);

/// f = sqrt(J2(tau)) + alpha * tr(tau) - k. Admissible when <= 0.
double drucker_prager_yield(const Mat3& kirchhoff, const MaterialParams& params);

}  // namespace sandinv::mpm
