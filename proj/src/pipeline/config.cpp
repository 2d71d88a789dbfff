#include "sandinv/pipeline/config.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "sandinv/common/error.hpp"
#include "sandinv/common/hash.hpp"
#include "sandinv/common/text.hpp"

namespace sandinv::pipeline {

namespace {

std::vector<double> numbers(const std::string& value, const std::string& key, std::size_t n) {
  std::string v = value;
  std::replace(v.begin(), v.end(), ',', ' ');
  const auto parts = text::split_ws(v);
  if (parts.size() != n) {
    throw ConfigError("config key '" + key + "' expects " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(text::parse_double(p, key));
  return out;
}

Vec3 vec3(const std::string& value, const std::string& key) {
  const auto n = numbers(value, key, 3);
  return {n[0], n[1], n[2]};
}

std::vector<int> int_list(const std::string& value, const std::string& key) {
  std::string v = value;
  std::replace(v.begin(), v.end(), ',', ' ');
  std::vector<int> out;
  for (const auto& p : text::split_ws(v)) {
    out.push_back(static_cast<int>(text::parse_int(p, key)));
  }
  return out;
}

bool boolean(const std::string& value, const std::string& key) {
  const std::string v = text::trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "' expects true/false");
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    out += text::fmt_double(xs[i]);
  }
  return out;
}

std::string join(const Vec3& v) { return join(std::vector<double>{v.x(), v.y(), v.z()}); }

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [](auto getter) {
      return [getter](PipelineConfig& c, const std::string& k, const std::string& v) {
        getter(c) = text::parse_double(v, k);
      };
    };
    auto integer = [](auto getter) {
      return [getter](PipelineConfig& c, const std::string& k, const std::string& v) {
        getter(c) = static_cast<int>(text::parse_int(v, k));
      };
    };
    auto v3 = [](auto getter) {
      return [getter](PipelineConfig& c, const std::string& k, const std::string& v) {
        getter(c) = vec3(v, k);
      };
    };
    // MaterialParams
    t["friction_angle_deg"] = dbl([](PipelineConfig& c) -> double& { return c.material.friction_angle_deg; });
    t["youngs_modulus"] = dbl([](PipelineConfig& c) -> double& { return c.material.youngs_modulus; });
    t["poissons_ratio"] = dbl([](PipelineConfig& c) -> double& { return c.material.poissons_ratio; });
    t["density"] = dbl([](PipelineConfig& c) -> double& { return c.material.density; });
    t["cohesion"] = dbl([](PipelineConfig& c) -> double& { return c.material.cohesion; });
    // SimConfig
    t["dt_frame"] = dbl([](PipelineConfig& c) -> double& { return c.sim.dt_frame; });
    t["substeps_per_frame"] = integer([](PipelineConfig& c) -> int& { return c.sim.substeps_per_frame; });
    t["n_frames"] = integer([](PipelineConfig& c) -> int& { return c.sim.n_frames; });
    t["gravity"] = v3([](PipelineConfig& c) -> Vec3& { return c.sim.gravity; });
    t["grid_spacing"] = dbl([](PipelineConfig& c) -> double& { return c.grid_spacing; });
    t["grid_headroom"] = dbl([](PipelineConfig& c) -> double& { return c.grid_headroom; });
    t["seed"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      const long long s = text::parse_int(v, k);
      if (s < 0) throw ConfigError("seed must be non-negative");
      c.sim.seed = static_cast<std::uint64_t>(s);
    };
    t["bed_size"] = v3([](PipelineConfig& c) -> Vec3& { return c.sim.bed_size; });
    t["cfl"] = dbl([](PipelineConfig& c) -> double& { return c.sim.cfl; });
    t["contact_friction"] = dbl([](PipelineConfig& c) -> double& { return c.sim.contact_friction; });
    t["boundary_cells"] = integer([](PipelineConfig& c) -> int& { return c.sim.boundary_cells; });
    t["plow_enabled"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      c.sim.plow_enabled = boolean(v, k);
    };
    t["snapshot_format"] = [](PipelineConfig& c, const std::string&, const std::string& v) {
      const std::string f = text::trim(v);
      if (f == "text") {
        c.sim.snapshot_format = mpm::SnapshotFormat::text;
      } else if (f == "binary") {
        c.sim.snapshot_format = mpm::SnapshotFormat::binary;
      } else {
        throw ConfigError("snapshot_format must be text or binary");
      }
    };
    // PlowTrajectory
    t["stage_frames"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      const auto s = int_list(v, k);
      if (s.size() != 4) throw ConfigError("stage_frames expects 4 integers");
      std::copy(s.begin(), s.end(), c.sim.trajectory.stage_frames.begin());
    };
    t["lower_depth"] = dbl([](PipelineConfig& c) -> double& { return c.sim.trajectory.lower_depth; });
    t["push_distance"] = dbl([](PipelineConfig& c) -> double& { return c.sim.trajectory.push_distance; });
    t["plow_shape"] = v3([](PipelineConfig& c) -> Vec3& { return c.sim.trajectory.plow_shape; });
    t["start_pose"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      const auto n = numbers(v, k, 12);
      std::array<double, 12> a{};
      std::copy(n.begin(), n.end(), a.begin());
      c.sim.trajectory.start_pose = Pose::from_row_major(a);
    };
    // Rendering and cameras
    t["image_width"] = integer([](PipelineConfig& c) -> int& { return c.image_width; });
    t["image_height"] = integer([](PipelineConfig& c) -> int& { return c.image_height; });
    t["fov_deg"] = dbl([](PipelineConfig& c) -> double& { return c.fov_deg; });
    t["n_views"] = integer([](PipelineConfig& c) -> int& { return c.n_views; });
    t["rig_elevation_deg"] = dbl([](PipelineConfig& c) -> double& { return c.rig_elevation_deg; });
    t["rig_radius"] = dbl([](PipelineConfig& c) -> double& { return c.rig_radius; });
    t["fixed_elevation_deg"] = dbl([](PipelineConfig& c) -> double& { return c.fixed_elevation_deg; });
    t["fixed_azimuth_deg"] = dbl([](PipelineConfig& c) -> double& { return c.fixed_azimuth_deg; });
    t["fixed_radius"] = dbl([](PipelineConfig& c) -> double& { return c.fixed_radius; });
    t["fixed_target"] = v3([](PipelineConfig& c) -> Vec3& { return c.fixed_target; });
    t["key_frames"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      c.key_frames = int_list(v, k);
    };
    // Reconstruction
    t["silhouette_threshold"] = dbl([](PipelineConfig& c) -> double& { return c.silhouette_threshold; });
    t["carve_spacing_factor"] = dbl([](PipelineConfig& c) -> double& { return c.carve_spacing_factor; });
    t["carve_headroom"] = dbl([](PipelineConfig& c) -> double& { return c.carve_headroom; });
    t["points_per_voxel"] = integer([](PipelineConfig& c) -> int& { return c.points_per_voxel; });
    // Bayesian optimization
    t["bounds"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      const auto n = numbers(v, k, 2);
      c.bounds = {n[0], n[1]};
    };
    t["budget"] = integer([](PipelineConfig& c) -> int& { return c.budget; });
    t["n_init"] = integer([](PipelineConfig& c) -> int& { return c.n_init; });
    t["length_scale"] = dbl([](PipelineConfig& c) -> double& { return c.hyper.length_scale; });
    t["signal_variance"] = dbl([](PipelineConfig& c) -> double& { return c.hyper.signal_variance; });
    t["noise_variance"] = dbl([](PipelineConfig& c) -> double& { return c.hyper.noise_variance; });
    return t;
  }();
  return table;
}

}  // namespace

void PipelineConfig::finalize() {
  sim.grid = mpm::grid_for_bed(sim.bed_size, grid_spacing, grid_headroom, sim.boundary_cells);
  style.particle_spacing = grid_spacing * carve_spacing_factor;
  for (int a = 0; a < 3; ++a) {
    if (!(sim.bed_size[a] > 0.0)) throw ConfigError("bed_size must be positive");
  }
  sim.validate(material);
  if (key_frames.empty()) throw ConfigError("key_frames must not be empty");
  for (int f : key_frames) {
    if (f < 0 || f >= sim.n_frames) {
      throw ConfigError("key frame " + std::to_string(f) + " outside [0, n_frames)");
    }
  }
  if (!std::is_sorted(key_frames.begin(), key_frames.end()) ||
      std::adjacent_find(key_frames.begin(), key_frames.end()) != key_frames.end()) {
    throw ConfigError("key_frames must be strictly increasing");
  }
  if (n_views < 2) throw ConfigError("n_views must be >= 2");
  if (!(silhouette_threshold > 0.0)) throw ConfigError("silhouette_threshold must be > 0");
  if (!(carve_spacing_factor > 0.0)) throw ConfigError("carve_spacing_factor must be > 0");
  if (!(carve_headroom >= 0.0) || carve_headroom > grid_headroom) {
    throw ConfigError("carve_headroom must be in [0, grid_headroom]");
  }
  if (points_per_voxel < 1) throw ConfigError("points_per_voxel must be >= 1");
  if (!(bounds.hi > bounds.lo)) throw ConfigError("bounds must satisfy lo < hi");
  if (bounds.lo <= 0.0 || bounds.hi >= 90.0) throw ConfigError("bounds must lie in (0, 90)");
  if (n_init < 1 || budget < n_init) throw ConfigError("need budget >= n_init >= 1");
  camera_template().validate();
}

render::Camera PipelineConfig::camera_template() const {
  render::Camera c;
  c.width = image_width;
  c.height = image_height;
  c.vertical_fov_deg = fov_deg;
  c.up = Vec3::UnitZ();
  c.position = Vec3(0, 0, 1);
  c.look_at = Vec3(1, 0, 0);
  return c;
}

Vec3 PipelineConfig::surface_center() const {
  return {0.5 * sim.bed_size.x(), 0.5 * sim.bed_size.y(), sim.bed_size.z()};
}

std::vector<render::Camera> PipelineConfig::view_cameras() const {
  return render::multi_view_rig(n_views, surface_center(), rig_radius, rig_elevation_deg,
                                camera_template());
}

std::vector<render::Camera> PipelineConfig::fixed_cameras() const {
  // Left and right oblique views, symmetric about the push axis (+x).
  return {render::orbit_camera(fixed_target, fixed_radius, fixed_azimuth_deg,
                               fixed_elevation_deg, camera_template()),
          render::orbit_camera(fixed_target, fixed_radius, -fixed_azimuth_deg,
                               fixed_elevation_deg, camera_template())};
}

PipelineConfig default_config() {
  PipelineConfig c;
  c.material = mpm::MaterialParams{};
  c.grid_spacing = 1.0 / 64.0;
  c.grid_headroom = 0.15;
  c.sim.bed_size = Vec3(1.0, 0.5, 0.25);
  c.sim.n_frames = 200;
  c.sim.trajectory.stage_frames = {25, 75, 25, 75};
  c.sim.trajectory.plow_shape = Vec3(0.02, 0.12, 0.10);
  c.sim.trajectory.lower_depth = 0.14;
  c.sim.trajectory.push_distance = 0.40;
  c.sim.trajectory.start_pose.translation = Vec3(0.25, 0.25, 0.25 + 0.10 + 0.02);
  c.key_frames = {50, 100, 150, 199};
  c.rig_radius = 2.0;
  c.fixed_radius = 0.9;
  c.fixed_target = Vec3(0.45, 0.25, 0.25);
  c.finalize();
  return c;
}

PipelineConfig fast_config() {
  PipelineConfig c;
  c.material = mpm::MaterialParams{};
  c.material.youngs_modulus = 1.0e5;
  c.grid_spacing = 1.0 / 48.0;
  c.grid_headroom = 0.10;
  c.sim.bed_size = Vec3(0.5, 0.25, 0.125);
  c.sim.n_frames = 100;
  c.sim.trajectory.stage_frames = {12, 38, 12, 38};
  c.sim.trajectory.plow_shape = Vec3(0.02, 0.07, 0.06);
  c.sim.trajectory.lower_depth = 0.08;
  c.sim.trajectory.push_distance = 0.20;
  c.sim.trajectory.start_pose.translation = Vec3(0.13, 0.125, 0.125 + 0.06 + 0.02);
  c.key_frames = {25, 50, 75, 99};
  c.carve_headroom = 0.04;
  c.rig_radius = 1.0;
  c.fixed_radius = 0.45;
  c.fixed_target = Vec3(0.23, 0.125, 0.125);
  c.finalize();
  return c;
}

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second(cfg, key, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

PipelineConfig parse_config(const std::string& contents, PipelineConfig base) {
  std::istringstream in(contents);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = text::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(base, text::trim(t.substr(0, eq)), text::trim(t.substr(eq + 1)));
  }
  base.finalize();
  return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
  return parse_config(text::read_file(path), std::move(base));
}

std::string format_config(const PipelineConfig& c) {
  std::ostringstream o;
  const auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << "\n"; };
  const auto d = [](double v) { return text::fmt_double(v); };
  kv("friction_angle_deg", d(c.material.friction_angle_deg));
  kv("youngs_modulus", d(c.material.youngs_modulus));
  kv("poissons_ratio", d(c.material.poissons_ratio));
  kv("density", d(c.material.density));
  kv("cohesion", d(c.material.cohesion));
  kv("dt_frame", d(c.sim.dt_frame));
  kv("substeps_per_frame", std::to_string(c.sim.substeps_per_frame));
  kv("n_frames", std::to_string(c.sim.n_frames));
  kv("gravity", join(c.sim.gravity));
  kv("grid_spacing", d(c.grid_spacing));
  kv("grid_headroom", d(c.grid_headroom));
  kv("seed", std::to_string(c.sim.seed));
  kv("bed_size", join(c.sim.bed_size));
  kv("cfl", d(c.sim.cfl));
  kv("contact_friction", d(c.sim.contact_friction));
  kv("boundary_cells", std::to_string(c.sim.boundary_cells));
  kv("plow_enabled", c.sim.plow_enabled ? "true" : "false");
  kv("snapshot_format", c.sim.snapshot_format == mpm::SnapshotFormat::text ? "text" : "binary");
  const auto& st = c.sim.trajectory.stage_frames;
  kv("stage_frames", std::to_string(st[0]) + " " + std::to_string(st[1]) + " " +
                         std::to_string(st[2]) + " " + std::to_string(st[3]));
  kv("lower_depth", d(c.sim.trajectory.lower_depth));
  kv("push_distance", d(c.sim.trajectory.push_distance));
  kv("plow_shape", join(c.sim.trajectory.plow_shape));
  const auto pose = c.sim.trajectory.start_pose.to_row_major();
  kv("start_pose", join(std::vector<double>(pose.begin(), pose.end())));
  kv("image_width", std::to_string(c.image_width));
  kv("image_height", std::to_string(c.image_height));
  kv("fov_deg", d(c.fov_deg));
  kv("n_views", std::to_string(c.n_views));
  kv("rig_elevation_deg", d(c.rig_elevation_deg));
  kv("rig_radius", d(c.rig_radius));
  kv("fixed_elevation_deg", d(c.fixed_elevation_deg));
  kv("fixed_azimuth_deg", d(c.fixed_azimuth_deg));
  kv("fixed_radius", d(c.fixed_radius));
  kv("fixed_target", join(c.fixed_target));
  std::string frames;
  for (std::size_t i = 0; i < c.key_frames.size(); ++i) {
    if (i) frames += ",";
    frames += std::to_string(c.key_frames[i]);
  }
  kv("key_frames", frames);
  kv("silhouette_threshold", d(c.silhouette_threshold));
  kv("carve_spacing_factor", d(c.carve_spacing_factor));
  kv("carve_headroom", d(c.carve_headroom));
  kv("points_per_voxel", std::to_string(c.points_per_voxel));
  kv("bounds", d(c.bounds.lo) + " " + d(c.bounds.hi));
  kv("budget", std::to_string(c.budget));
  kv("n_init", std::to_string(c.n_init));
  kv("length_scale", d(c.hyper.length_scale));
  kv("signal_variance", d(c.hyper.signal_variance));
  kv("noise_variance", d(c.hyper.noise_variance));
  return o.str();
}

std::string config_hash(const PipelineConfig& cfg) { return hex64(fnv1a(format_config(cfg))); }

}  // namespace sandinv::pipeline
