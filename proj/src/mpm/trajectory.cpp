#include "sandinv/mpm/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sandinv/common/error.hpp"

namespace sandinv::mpm {

void PlowTrajectory::validate() const {
  for (int s : stage_frames) {
    if (s < 0) throw InvalidArgument("stage_frames must be non-negative");
  }
  for (int a = 0; a < 3; ++a) {
    if (!(plow_shape[a] > 0.0)) throw InvalidArgument("plow_shape half-extents must be > 0");
  }
  if (!(lower_depth >= 0.0)) throw InvalidArgument("lower_depth must be >= 0");
}

namespace {

// Offset from the start pose as a function of continuous frame.
Vec3 path_offset(double f, const PlowTrajectory& traj) {
  const auto& st = traj.stage_frames;
  const Vec3 down(0.0, 0.0, -traj.lower_depth);
  const Vec3 forward = traj.start_pose.rotation.col(0) * traj.push_distance;
  auto frac = [](double t, int len) { return len > 0 ? std::clamp(t / len, 0.0, 1.0) : 1.0; };

  const double e1 = st[0];
  const double e2 = e1 + st[1];
  const double e3 = e2 + st[2];
  if (f <= e1) return down * frac(f, st[0]);
  if (f <= e2) return down + forward * frac(f - e1, st[1]);
  if (f <= e3) return down + forward;
  return down + forward * (1.0 - frac(f - e3, st[3]));
}

}  // namespace

Pose plow_pose_at(int frame, const PlowTrajectory& traj) {
  if (frame < 0 || frame > traj.total_frames()) {
    throw InvalidArgument("plow frame " + std::to_string(frame) + " outside [0, " +
                          std::to_string(traj.total_frames()) + "]");
  }
  return plow_pose_at(static_cast<double>(frame), traj);
}

Pose plow_pose_at(double frame, const PlowTrajectory& traj) {
  const double f = std::clamp(frame, 0.0, static_cast<double>(traj.total_frames()));
  Pose p = traj.start_pose;
  p.translation += path_offset(f, traj);
  return p;
}

Vec3 plow_velocity(double frame, const PlowTrajectory& traj, double dt_frame) {
  const double f0 = std::floor(frame);
  const Vec3 a = plow_pose_at(f0, traj).translation;
  const Vec3 b = plow_pose_at(f0 + 1.0, traj).translation;
  return (b - a) / dt_frame;
}

}  // namespace sandinv::mpm
