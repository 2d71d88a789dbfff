#pragma once

#include <array>

#include "sandinv/common/types.hpp"

namespace sandinv::mpm {

/// Four-stage plow path: lower, push forward, pause, pull back. The push
/// direction is the local +x axis of the start pose; lowering is along world -z.
struct PlowTrajectory {
  std::array<int, 4> stage_frames{25, 75, 25, 75};
  double lower_depth = 0.10;
  double push_distance = 0.40;
  Vec3 plow_shape{0.02, 0.12, 0.10};  // box half-extents in the plow frame
  Pose start_pose;

  int total_frames() const {
    return stage_frames[0] + stage_frames[1] + stage_frames[2] + stage_frames[3];
  }
  void validate() const;
};

/// Pose at an integer frame in [0, total_frames]; throws outside.
Pose plow_pose_at(int frame, const PlowTrajectory& traj);
/// Continuous version used for substep interpolation (clamped to the path).
Pose plow_pose_at(double frame, const PlowTrajectory& traj);
/// Translational velocity (m/s) on the open frame interval containing `frame`.
Vec3 plow_velocity(double frame, const PlowTrajectory& traj, double dt_frame);

}  // namespace sandinv::mpm
