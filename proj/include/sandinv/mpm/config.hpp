#pragma once

#include <cstdint>

#include "sandinv/common/types.hpp"
#include "sandinv/mpm/grid.hpp"
#include "sandinv/mpm/material.hpp"
#include "sandinv/mpm/trajectory.hpp"

namespace sandinv::mpm {

enum class SnapshotFormat { text, binary };

/// Simulation settings. The sand bed occupies [0, bed_size] in world
/// coordinates; the floor is z = 0 and the side walls bound the bed.
struct SimConfig {
  double dt_frame = 0.02;
  int substeps_per_frame = 0;  // 0: smallest count satisfying the CFL bound
  int n_frames = 200;
  Vec3 gravity{0.0, 0.0, -9.81};
  GridSpec grid;
  PlowTrajectory trajectory;
  std::uint64_t seed = 1;

  Vec3 bed_size{1.0, 0.5, 0.25};
  double cfl = 0.3;
  double contact_friction = 0.4;
  int boundary_cells = 3;
  bool plow_enabled = true;
  SnapshotFormat snapshot_format = SnapshotFormat::text;

  Aabb bed_box() const { return {Vec3::Zero(), bed_size}; }
  double bed_volume() const { return bed_box().volume(); }

  void validate(const MaterialParams& params) const;
};

/// Grid enclosing the bed with `boundary_cells` wall layers on every side and
/// `headroom` metres of free space above the bed surface.
GridSpec grid_for_bed(const Vec3& bed_size, double spacing, double headroom,
                      int boundary_cells);

/// Substeps per frame: the configured value (validated against the CFL bound)
/// or the smallest count with dt_sub <= cfl * spacing / wave_speed.
int resolve_substeps(const SimConfig& cfg, const MaterialParams& params);

}  // namespace sandinv::mpm
