#pragma once

namespace sandinv::mpm {

/// Constitutive parameters of the sand. Only the friction angle is inverted;
/// the rest must be shared between the observation run and every candidate.
struct MaterialParams {
  double friction_angle_deg = 35.0;
  double youngs_modulus = 1.0e7;  // Pa
  double poissons_ratio = 0.3;
  double density = 1600.0;  // kg/m^3
  double cohesion = 0.0;    // Pa

  void validate() const;

  double shear_modulus() const;
  double lame_lambda() const;
  double bulk_stiffness() const { return 3.0 * lame_lambda() + 2.0 * shear_modulus(); }
  double wave_speed() const;

  /// Drucker-Prager cone slope for f = sqrt(J2) + alpha * I1 - k,
  /// matched to Mohr-Coulomb in triaxial compression.
  double dp_alpha() const;
  /// Cohesion intercept k of the same cone.
  double dp_cohesion() const;
};

}  // namespace sandinv::mpm
