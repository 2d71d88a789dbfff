#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sandinv/common/exec.hpp"
#include "sandinv/common/types.hpp"
#include "sandinv/render/camera.hpp"
#include "sandinv/render/image.hpp"

namespace sandinv::render {

/// Palette, light and splat sizing. Colours are linear RGB in [0, 1].
struct SceneStyle {
  Vec3 sand_albedo{0.76, 0.70, 0.50};
  Vec3 plow_albedo{0.35, 0.35, 0.40};
  Vec3 background{0.10, 0.10, 0.12};
  Vec3 light_direction{-1.0, -1.0, -2.0};  // direction the light travels
  double ambient = 0.25;
  double particle_spacing = 1.0 / 96.0;  // metres
  double splat_scale = 0.7;              // disc radius / particle spacing
};

struct PlowBox {
  Pose pose;
  Vec3 half_extents = Vec3::Zero();
};

struct RenderInput {
  std::span<const Vec3> positions;
  std::optional<PlowBox> plow;
};

/// ambient + (1 - ambient) * max(0, n . towards_light), times albedo.
Vec3 shade(const Vec3& albedo, const Vec3& normal, const SceneStyle& style);

/// Surface normals from the gradient of a smoothed particle density field.
/// Falls back to +z where the gradient vanishes.
std::vector<Vec3> estimate_normals(std::span<const Vec3> positions, double spacing);

/// Z-buffered point splatting plus the plow's six faces. Every pixel shows the
/// primitive with the smallest depth at the pixel centre (ties: lowest
/// primitive index, particles before plow triangles).
Image render(const RenderInput& input, const Camera& cam, const SceneStyle& style,
             Exec exec = Exec::parallel);

/// Screen-space splat radius in pixels for a particle at `depth`.
double splat_radius_px(const PinholeView& view, double depth, const SceneStyle& style);

}  // namespace sandinv::render
