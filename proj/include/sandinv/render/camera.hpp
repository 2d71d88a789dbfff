#pragma once

#include <string>
#include <vector>

#include "sandinv/common/types.hpp"

namespace sandinv::render {

struct Camera {
  Vec3 position{0.0, 0.0, 1.0};
  Vec3 look_at = Vec3::Zero();
  Vec3 up{0.0, 0.0, 1.0};
  double vertical_fov_deg = 45.0;
  int width = 256;
  int height = 256;

  void validate() const;
};

/// Result of projecting a world point. Pixel coordinates are continuous with
/// (0, 0) at the top-left image corner; pixel (i, j) has its centre at
/// (i + 0.5, j + 0.5). Depth is the distance along the viewing axis.
struct Projection {
  double px = 0.0;
  double py = 0.0;
  double depth = 0.0;
  bool behind = false;
};

/// Precomputed camera basis. Camera frame is right-handed: x right, y up,
/// looking down -z.
class PinholeView {
 public:
  explicit PinholeView(const Camera& cam);

  Projection project(const Vec3& world) const;
  Vec3 unproject(double px, double py, double depth) const;

  const Camera& camera() const { return cam_; }
  double focal_px() const { return focal_; }
  const Vec3& forward() const { return forward_; }

 private:
  Camera cam_;
  Vec3 right_;
  Vec3 up_;
  Vec3 forward_;
  double focal_;
};

Projection project(const Camera& cam, const Vec3& world);

/// n cameras equally spaced in azimuth (starting at azimuth 0, measured from
/// +x towards +y) on a circle of `radius` at `elevation_deg`, all aimed at
/// `center`. Intrinsics and up vector come from `tmpl`.
std::vector<Camera> multi_view_rig(int n, const Vec3& center, double radius,
                                   double elevation_deg, const Camera& tmpl);

/// Camera aimed at `center` from the given azimuth/elevation.
Camera orbit_camera(const Vec3& center, double radius, double azimuth_deg,
                    double elevation_deg, const Camera& tmpl);

/// Blocks of `position=`, `look_at=`, `up=`, `fov_deg=`, `width=`, `height=`
/// separated by blank lines.
std::string format_cameras(const std::vector<Camera>& cams);
std::vector<Camera> parse_cameras(const std::string& contents);
void write_cameras(const std::string& path, const std::vector<Camera>& cams);
std::vector<Camera> read_cameras(const std::string& path);

}  // namespace sandinv::render
