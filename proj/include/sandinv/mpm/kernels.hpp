#pragma once

#include <optional>

#include "sandinv/common/exec.hpp"
#include "sandinv/common/types.hpp"
#include "sandinv/mpm/material.hpp"
#include "sandinv/mpm/state.hpp"

namespace sandinv::mpm {

using sandinv::Exec;

/// Rigid plow as seen by the grid in one substep.
struct PlowContact {
  Pose pose;
  Vec3 half_extents = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

struct GridForces {
  Vec3 gravity{0.0, 0.0, -9.81};
  double friction = 0.4;
  int boundary_cells = 3;  // wall nodes: this many layers outside the bed plus the bed face itself
  bool boundaries = true;
  std::optional<PlowContact> plow;
};

/// Number of cells a particle must keep to every grid face.
inline constexpr double kParticleMargin = 2.0;

/// Scatters mass and APIC momentum (including the MLS stress impulse
/// -dt * V0 * 4/h^2 * tau) to the grid. Clears the grid first.
/// Throws SimulationBlowup naming the lowest escaped particle index.
void p2g_transfer(SimState& state, double dt, Exec exec = Exec::parallel);

/// Node velocities from momenta, gravity, plow contact and wall conditions.
void grid_update(BackgroundGrid& grid, double dt, const GridForces& forces,
                 Exec exec = Exec::parallel);

/// Gathers velocity and affine field, advects positions, and forms the trial
/// deformation gradient (I + dt grad v) F. Throws on non-finite particle state.
void g2p_transfer(SimState& state, double dt, Exec exec = Exec::parallel);

/// Drucker-Prager projection of every particle's trial F; refreshes the cached
/// Kirchhoff stress. Throws on det(F) <= 0 or a failed decomposition.
void apply_plasticity(SimState& state, const MaterialParams& params,
                      Exec exec = Exec::parallel);

/// Moves particles that ended up inside the plow box onto its nearest face and
/// drops any velocity component pointing back into it. The grid alone cannot
/// expel material from a tool only a couple of cells thick.
void push_out_of_plow(SimState& state, const PlowContact& plow, Exec exec = Exec::parallel);

/// Contact rule shared by plow faces and walls: if the velocity relative to
/// the obstacle moves into it along `normal`, the normal part is removed and
/// the tangential part is reduced by Coulomb friction. Separating motion is kept.
Vec3 separable_contact(const Vec3& velocity, const Vec3& obstacle_velocity,
                       const Vec3& normal, double friction);

}  // namespace sandinv::mpm
