#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sandinv {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid pose: x_world = rotation * x_local + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& local) const { return rotation * local + translation; }
  Vec3 apply_inverse(const Vec3& world) const {
    return rotation.transpose() * (world - translation);
  }

  /// Row-major 3x4 [R | t].
  std::array<double, 12> to_row_major() const;
  static Pose from_row_major(const std::array<double, 12>& values);

  bool operator==(const Pose& other) const {
    return rotation == other.rotation && translation == other.translation;
  }
};

struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 size() const { return hi - lo; }
  double volume() const {
    const Vec3 s = size();
    return s.x() * s.y() * s.z();
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

}  // namespace sandinv
