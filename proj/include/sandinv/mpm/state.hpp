#pragma once

#include <vector>

#include "sandinv/common/types.hpp"
#include "sandinv/mpm/grid.hpp"

namespace sandinv::mpm {

struct Particle {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double mass = 0.0;
  double initial_volume = 0.0;
  Mat3 deformation_gradient = Mat3::Identity();
  Mat3 affine_velocity = Mat3::Zero();  // APIC C matrix
  Mat3 kirchhoff_stress = Mat3::Zero();  // cached from the last return mapping
};

struct SimState {
  std::vector<Particle> particles;
  BackgroundGrid grid;
  Pose plow_pose;
  int frame = 0;

  double total_particle_mass() const;
  Vec3 total_particle_momentum() const;
};

/// Position-only view of a frame, the unit that gets rendered and written.
struct Snapshot {
  int frame = 0;
  Pose plow;
  std::vector<Vec3> positions;

  bool operator==(const Snapshot& o) const {
    return frame == o.frame && plow == o.plow && positions == o.positions;
  }
};

Snapshot snapshot_of(const SimState& state);

}  // namespace sandinv::mpm
