#include "sandinv/mpm/state.hpp"

namespace sandinv::mpm {

double SimState::total_particle_mass() const {
  double m = 0.0;
  for (const auto& p : particles) m += p.mass;
  return m;
}

Vec3 SimState::total_particle_momentum() const {
  Vec3 m = Vec3::Zero();
  for (const auto& p : particles) m += p.mass * p.velocity;
  return m;
}

Snapshot snapshot_of(const SimState& state) {
  Snapshot s;
  s.frame = state.frame;
  s.plow = state.plow_pose;
  s.positions.reserve(state.particles.size());
  for (const auto& p : state.particles) s.positions.push_back(p.position);
  return s;
}

}  // namespace sandinv::mpm
