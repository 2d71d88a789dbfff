#include "sandinv/mpm/material.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sandinv/common/error.hpp"

namespace sandinv::mpm {

namespace {
double radians(double deg) { return deg * std::numbers::pi / 180.0; }
}  // namespace

void MaterialParams::validate() const {
  if (!(friction_angle_deg > 0.0 && friction_angle_deg < 90.0)) {
    throw InvalidArgument("friction_angle_deg must be in (0, 90), got " +
                          std::to_string(friction_angle_deg));
  }
  if (!(poissons_ratio > 0.0 && poissons_ratio < 0.5)) {
    throw InvalidArgument("poissons_ratio must be in (0, 0.5)");
  }
  if (!(youngs_modulus > 0.0)) throw InvalidArgument("youngs_modulus must be > 0");
  if (!(density > 0.0)) throw InvalidArgument("density must be > 0");
  if (!(cohesion >= 0.0)) throw InvalidArgument("cohesion must be >= 0");
}

double MaterialParams::shear_modulus() const {
  return youngs_modulus / (2.0 * (1.0 + poissons_ratio));
}

double MaterialParams::lame_lambda() const {
  return youngs_modulus * poissons_ratio /
         ((1.0 + poissons_ratio) * (1.0 - 2.0 * poissons_ratio));
}

double MaterialParams::wave_speed() const { return std::sqrt(youngs_modulus / density); }

double MaterialParams::dp_alpha() const {
  const double s = std::sin(radians(friction_angle_deg));
  return 2.0 * s / (std::sqrt(3.0) * (3.0 - s));
}

double MaterialParams::dp_cohesion() const {
  const double phi = radians(friction_angle_deg);
  return 6.0 * cohesion * std::cos(phi) / (std::sqrt(3.0) * (3.0 - std::sin(phi)));
}

}  // namespace sandinv::mpm
