#include "sandinv/mpm/plasticity.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "sandinv/common/error.hpp"

namespace sandinv::mpm {

namespace {

struct Principal {
  Mat3 u;        // eigenvectors of F F^T (left singular vectors)
  Vec3 sigma;    // singular values
  Vec3 strain;   // log(sigma)
};

Principal decompose(const Mat3& f) {
  const Mat3 b = f * f.transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(b);
  const Vec3 lam = eig.eigenvalues();
  Principal p;
  p.u = eig.eigenvectors();
  for (int i = 0; i < 3; ++i) {
    if (!(lam[i] > 0.0) || !std::isfinite(lam[i])) {
      throw SimulationBlowup("non-finite or degenerate singular values in return mapping",
                             -1, SimulationBlowup::kNoParticle);
    }
    p.sigma[i] = std::sqrt(lam[i]);
    p.strain[i] = 0.5 * std::log(lam[i]);
  }
  return p;
}

Vec3 principal_stress(const Vec3& strain, double mu, double lambda) {
  return (2.0 * mu * strain.array() + lambda * strain.sum()).matrix();
}

}  // namespace

Mat3 hencky_kirchhoff(const Mat3& f, const MaterialParams& params) {
  const Principal p = decompose(f);
  const Vec3 tau = principal_stress(p.strain, params.shear_modulus(), params.lame_lambda());
  return p.u * tau.asDiagonal() * p.u.transpose();
}

double drucker_prager_yield(const Mat3& kirchhoff, const MaterialParams& params) {
  const double trace = kirchhoff.trace();
  const Mat3 dev = kirchhoff - trace / 3.0 * Mat3::Identity();
  const double sqrt_j2 = std::sqrt(0.5 * dev.squaredNorm());
  return sqrt_j2 + params.dp_alpha() * trace - params.dp_cohesion();
}

ReturnResult drucker_prager_return(const Mat3& f_trial, const MaterialParams& params) {
  const Principal p = decompose(f_trial);
  const double mu = params.shear_modulus();
  const double lambda = params.lame_lambda();
  const double alpha = params.dp_alpha();
  const double k = params.dp_cohesion();
  const double bulk = params.bulk_stiffness();

  const double tr = p.strain.sum();
  const Vec3 dev = p.strain.array() - tr / 3.0;
  const double dev_norm = dev.norm();
  // sqrt(J2) = sqrt(2) * mu * |dev strain|, I1 = (3 lambda + 2 mu) tr strain
  const double pressure_term = alpha * bulk * tr - k;
  const double yield = std::sqrt(2.0) * mu * dev_norm + pressure_term;

  ReturnResult out;
  if (yield <= 0.0) {
    out.deformation_gradient = f_trial;
    out.kirchhoff_stress =
        p.u * principal_stress(p.strain, mu, lambda).asDiagonal() * p.u.transpose();
    return out;
  }

  Vec3 strain;
  if (pressure_term >= 0.0) {
    // Beyond the apex: no deviatoric stress can be carried at this volume.
    const double tr_apex = alpha > 0.0 ? k / (alpha * bulk) : 0.0;
    strain = Vec3::Constant(tr_apex / 3.0);
  } else {
    const double target = -pressure_term / (std::sqrt(2.0) * mu);
    strain = (tr / 3.0 + dev.array() * (target / dev_norm)).matrix();
  }

  const Vec3 sigma_new = strain.array().exp();
  const Vec3 scale = sigma_new.cwiseQuotient(p.sigma);
  // F = U S V^T  =>  U S' V^T = U diag(S'/S) U^T F
  out.deformation_gradient = p.u * scale.asDiagonal() * p.u.transpose() * f_trial;
  out.kirchhoff_stress =
      p.u * principal_stress(strain, mu, lambda).asDiagonal() * p.u.transpose();
  out.plastic = true;
  return out;
}

}  // namespace sandinv::mpm
