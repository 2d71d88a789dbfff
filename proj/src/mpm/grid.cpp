#include "sandinv/mpm/grid.hpp"

#include "sandinv/common/error.hpp"

namespace sandinv::mpm {

void GridSpec::validate() const {
  if (!(spacing > 0.0)) throw InvalidArgument("grid spacing must be > 0");
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 4) throw InvalidArgument("grid needs >= 4 nodes per axis");
  }
}

void BackgroundGrid::reset(const GridSpec& s) {
  spec = s;
  node_mass.assign(s.node_count(), 0.0);
  node_momentum.assign(s.node_count(), Vec3::Zero());
  node_velocity.assign(s.node_count(), Vec3::Zero());
}

void BackgroundGrid::clear() {
  std::fill(node_mass.begin(), node_mass.end(), 0.0);
  std::fill(node_momentum.begin(), node_momentum.end(), Vec3::Zero());
  std::fill(node_velocity.begin(), node_velocity.end(), Vec3::Zero());
}

double BackgroundGrid::total_mass() const {
  double m = 0.0;
  for (double v : node_mass) m += v;
  return m;
}

Vec3 BackgroundGrid::total_momentum() const {
  Vec3 p = Vec3::Zero();
  for (const Vec3& v : node_momentum) p += v;
  return p;
}

}  // namespace sandinv::mpm
