#pragma once

#include <string>
#include <vector>

#include "sandinv/bo/gp.hpp"
#include "sandinv/bo/optimizer.hpp"
#include "sandinv/mpm/config.hpp"
#include "sandinv/mpm/material.hpp"
#include "sandinv/render/camera.hpp"
#include "sandinv/render/rasterizer.hpp"

namespace sandinv::pipeline {

/// Everything an observation or inversion run needs. Plain key-value files map
/// onto these fields one-to-one (see apply_setting for the key list).
struct PipelineConfig {
  mpm::SimConfig sim;
  mpm::MaterialParams material;
  double grid_spacing = 1.0 / 64.0;
  double grid_headroom = 0.15;

  render::SceneStyle style;
  int image_width = 256;
  int image_height = 256;
  double fov_deg = 45.0;

  int n_views = 40;
  double rig_elevation_deg = 0.0;
  double rig_radius = 2.0;
  double fixed_elevation_deg = 30.0;
  double fixed_azimuth_deg = 35.0;
  double fixed_radius = 1.6;
  Vec3 fixed_target{0.45, 0.25, 0.25};

  std::vector<int> key_frames{50, 100, 150, 199};

  double silhouette_threshold = 0.05;
  double carve_spacing_factor = 0.5;
  double carve_headroom = 0.05;
  int points_per_voxel = 1;

  bo::Bounds bounds{25.0, 55.0};
  int budget = 10;
  int n_init = 1;
  bo::KernelHyper hyper;

  /// Rebuilds derived fields (grid from bed and spacing, splat spacing) and
  /// validates the whole configuration. Throws ConfigError.
  void finalize();

  render::Camera camera_template() const;
  /// Centre of the undisturbed bed surface; the multi-view rig aims here.
  Vec3 surface_center() const;
  std::vector<render::Camera> view_cameras() const;
  std::vector<render::Camera> fixed_cameras() const;
};

/// Desk-scale defaults: 1/64 m grid, 1.0 x 0.5 x 0.25 m bed, 200 frames.
PipelineConfig default_config();
/// CI profile: 1/48 m grid, 100 frames, stages 12/38/12/38.
PipelineConfig fast_config();

/// Sets one key; unknown keys and malformed values throw ConfigError.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// `key = value` lines with `#` comments, applied on top of `base`, then finalized.
PipelineConfig parse_config(const std::string& contents, PipelineConfig base);
PipelineConfig load_config(const std::string& path, PipelineConfig base);

/// Canonical text form; parse_config(format_config(c), any) reproduces c.
std::string format_config(const PipelineConfig& cfg);
std::string config_hash(const PipelineConfig& cfg);

}  // namespace sandinv::pipeline
