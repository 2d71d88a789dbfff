#include "sandinv/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>

#include "sandinv/common/error.hpp"
#include "sandinv/common/hash.hpp"
#include "sandinv/common/text.hpp"
#include "sandinv/mpm/simulator.hpp"
#include "sandinv/render/rasterizer.hpp"

namespace sandinv::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.txt";
constexpr const char* kMeta = "meta.txt";
constexpr const char* kConfig = "config.txt";
constexpr const char* kViewCams = "cameras_views.txt";
constexpr const char* kFixedCams = "cameras_fixed.txt";

// Sampling seeds for the analytic bed and the carved bed are kept apart so the
// two point sets never coincide by construction.
constexpr std::uint64_t kReconSeedOffset = 0x5EED0001;

std::string view_png(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "views/view_%02d.png", i);
  return buf;
}

std::string frame_png(int frame, int cam) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "frames/frame_%04d_cam%d.png", frame, cam);
  return buf;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[text::trim(line.substr(0, eq))] = text::trim(line.substr(eq + 1));
  }
  return kv;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key,
                           const std::string& path) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError(path + ": missing '" + key + "'");
  return it->second;
}

render::RenderInput frame_input(const mpm::Snapshot& snap, const PipelineConfig& cfg) {
  render::RenderInput in{snap.positions, std::nullopt};
  if (cfg.sim.plow_enabled) in.plow = render::PlowBox{snap.plow, cfg.sim.trajectory.plow_shape};
  return in;
}

}  // namespace

std::vector<Vec3> ground_truth_particles(const PipelineConfig& cfg) {
  return mpm::sample_box(cfg.sim.bed_box(), cfg.grid_spacing * cfg.carve_spacing_factor,
                         cfg.sim.seed);
}

std::vector<render::Image> render_views(std::span<const Vec3> points, const PipelineConfig& cfg,
                                        Exec exec) {
  std::vector<render::Image> out;
  const render::RenderInput in{points, std::nullopt};
  for (const auto& cam : cfg.view_cameras()) out.push_back(render::render(in, cam, cfg.style, exec));
  return out;
}

std::vector<std::vector<render::Image>> simulate_key_frames(std::span<const Vec3> points,
                                                            double bed_volume,
                                                            const PipelineConfig& cfg,
                                                            const mpm::MaterialParams& params,
                                                            Exec exec) {
  mpm::SimConfig sim = cfg.sim;
  sim.n_frames = cfg.key_frames.back() + 1;
  const auto cams = cfg.fixed_cameras();
  const mpm::SimState init = mpm::init_simulation(points, params, sim, bed_volume);

  std::vector<std::vector<render::Image>> out;
  std::size_t next = 0;
  mpm::run_stages(
      init, sim, params,
      [&](const mpm::Snapshot& snap) {
        if (next >= cfg.key_frames.size() || snap.frame != cfg.key_frames[next]) return;
        std::vector<render::Image> row;
        for (const auto& cam : cams) row.push_back(render::render(frame_input(snap, cfg), cam, cfg.style, exec));
        out.push_back(std::move(row));
        ++next;
      },
      exec);
  return out;
}

std::string build_manifest(const std::string& dir) {
  const fs::path root(dir);
  const auto meta = read_kv((root / kMeta).string());
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), root).generic_string();
    if (rel != kManifest) files.push_back(rel);
  }
  std::sort(files.begin(), files.end());

  std::ostringstream o;
  o << "phi_true=" << require(meta, "phi_true", kMeta) << "\n";
  o << "seed=" << require(meta, "seed", kMeta) << "\n";
  o << "config_hash=" << require(meta, "config_hash", kMeta) << "\n";
  o << "key_frames=" << require(meta, "key_frames", kMeta) << "\n";
  for (const auto& f : files) {
    const std::string bytes = text::read_file((root / f).string());
    o << "file=" << f << " size=" << bytes.size() << " fnv1a=" << hex64(fnv1a(bytes)) << "\n";
  }
  return o.str();
}

bool manifest_matches(const std::string& dir) {
  const fs::path path = fs::path(dir) / kManifest;
  if (!fs::exists(path)) return false;
  try {
    return text::read_file(path.string()) == build_manifest(dir);
  } catch (const Error&) {
    return false;
  }
}

ObservationDataset generate_observation(const PipelineConfig& base, double phi_true,
                                        const std::string& out_dir) {
  PipelineConfig cfg = base;
  cfg.material.friction_angle_deg = phi_true;
  cfg.finalize();

  const fs::path root(out_dir);
  fs::create_directories(root / "views");
  fs::create_directories(root / "frames");

  const std::vector<Vec3> points = ground_truth_particles(cfg);
  const auto views = render_views(points, cfg);
  const auto frames = simulate_key_frames(points, cfg.sim.bed_volume(), cfg, cfg.material);

  text::write_file((root / kConfig).string(), format_config(cfg));
  std::ostringstream meta;
  meta << "phi_true=" << text::fmt_double(phi_true) << "\n"
       << "seed=" << cfg.sim.seed << "\n"
       << "config_hash=" << config_hash(cfg) << "\n"
       << "key_frames=" << join_ints(cfg.key_frames) << "\n";
  text::write_file((root / kMeta).string(), meta.str());
  render::write_cameras((root / kViewCams).string(), cfg.view_cameras());
  render::write_cameras((root / kFixedCams).string(), cfg.fixed_cameras());
  for (std::size_t i = 0; i < views.size(); ++i) {
    render::write_png((root / view_png(static_cast<int>(i))).string(), views[i]);
  }
  for (std::size_t k = 0; k < frames.size(); ++k) {
    for (std::size_t c = 0; c < frames[k].size(); ++c) {
      render::write_png((root / frame_png(cfg.key_frames[k], static_cast<int>(c))).string(),
                        frames[k][c]);
    }
  }
  text::write_file((root / kManifest).string(), build_manifest(out_dir));
  return load_dataset(out_dir);
}

ObservationDataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  const auto need = [&](const std::string& rel) {
    const fs::path p = root / rel;
    if (!fs::exists(p)) throw IoError("dataset file missing: " + p.string());
    return p.string();
  };

  ObservationDataset d;
  d.root = dir;
  const std::string manifest = text::read_file(need(kManifest));
  const auto meta = read_kv(need(kMeta));
  d.config = load_config(need(kConfig), default_config());
  d.phi_true = text::parse_double(require(meta, "phi_true", kMeta), "phi_true");
  d.config_hash = require(meta, "config_hash", kMeta);
  if (d.config_hash != config_hash(d.config)) {
    throw ConfigError(dir + ": config hash does not match config.txt");
  }
  d.key_frames = d.config.key_frames;
  d.view_cameras = render::read_cameras(need(kViewCams));
  d.fixed_cameras = render::read_cameras(need(kFixedCams));
  if (d.fixed_cameras.size() != 2) throw ConfigError(dir + ": expected 2 fixed cameras");

  for (std::size_t i = 0; i < d.view_cameras.size(); ++i) {
    d.views.push_back(render::read_png(need(view_png(static_cast<int>(i)))));
  }
  for (int f : d.key_frames) {
    std::vector<render::Image> row;
    for (int c = 0; c < 2; ++c) row.push_back(render::read_png(need(frame_png(f, c))));
    d.frames.push_back(std::move(row));
  }

  const auto check_dims = [&](const render::Image& img, const render::Camera& cam) {
    if (img.width != cam.width || img.height != cam.height) {
      throw ConfigError(dir + ": image size does not match its camera");
    }
  };
  for (std::size_t i = 0; i < d.views.size(); ++i) check_dims(d.views[i], d.view_cameras[i]);
  for (const auto& row : d.frames) {
    for (int c = 0; c < 2; ++c) check_dims(row[c], d.fixed_cameras[c]);
  }
  if (manifest != build_manifest(dir)) {
    throw ConfigError(dir + ": manifest does not match directory contents");
  }
  return d;
}

recon::VoxelGridSpec carve_grid(const PipelineConfig& cfg) {
  recon::VoxelGridSpec spec;
  spec.spacing = cfg.grid_spacing * cfg.carve_spacing_factor;
  spec.origin = Vec3::Zero();
  const Vec3 extent = cfg.sim.bed_size + Vec3(0, 0, cfg.carve_headroom);
  for (int a = 0; a < 3; ++a) {
    spec.dims[a] = std::max(1, static_cast<int>(std::ceil(extent[a] / spec.spacing - 1e-9)));
  }
  return spec;
}

Reconstruction reconstruct(const ObservationDataset& data, Exec exec) {
  const PipelineConfig& cfg = data.config;
  // Splats overhang the particle centres by their radius; each silhouette is
  // shrunk by half the splat radius seen from that camera's distance to the bed.
  std::vector<recon::Mask> masks;
  for (std::size_t i = 0; i < data.views.size(); ++i) {
    const render::Camera& cam = data.view_cameras[i];
    const render::PinholeView view(cam);
    const double depth = (cam.look_at - cam.position).norm();
    const double radius = 0.5 * render::splat_radius_px(view, depth, cfg.style);
    masks.push_back(recon::erode_mask(
        recon::silhouette(data.views[i], cfg.style.background, cfg.silhouette_threshold), radius));
  }
  Reconstruction r{recon::carve(masks, data.view_cameras, carve_grid(cfg), exec), {}, 0.0};
  r.points = recon::sample_points(r.occupancy, cfg.points_per_voxel, cfg.sim.seed + kReconSeedOffset);
  r.volume = r.occupancy.occupied_volume();
  return r;
}

double key_frame_loss(const std::vector<std::vector<render::Image>>& rendered,
                      const ObservationDataset& data) {
  if (rendered.size() != data.frames.size()) {
    throw InvalidArgument("key_frame_loss: frame count mismatch");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < rendered.size(); ++k) {
    for (std::size_t c = 0; c < rendered[k].size(); ++c) {
      total += render::image_loss(rendered[k][c], data.frames[k][c]);
    }
  }
  return total;
}

ImageLossObjective::ImageLossObjective(std::shared_ptr<const ObservationDataset> data, Exec exec)
    : data_(std::move(data)), exec_(exec), recon_(reconstruct(*data_, exec)) {}

double ImageLossObjective::operator()(double phi_deg) {
  const auto hit = cache_.find(phi_deg);
  if (hit != cache_.end()) return hit->second;

  mpm::MaterialParams params = data_->config.material;
  params.friction_angle_deg = phi_deg;
  double loss;
  try {
    ++simulations_;
    const auto frames = simulate_key_frames(recon_.points, recon_.volume, data_->config, params, exec_);
    loss = key_frame_loss(frames, *data_);
  } catch (const SimulationBlowup&) {
    loss = std::numeric_limits<double>::infinity();
  }
  cache_.emplace(phi_deg, loss);
  return loss;
}

bo::BOResult invert(ImageLossObjective& objective, std::uint64_t seed,
                    const std::optional<std::string>& out_dir) {
  const PipelineConfig& cfg = objective.dataset().config;
  const bo::BOResult result = bo::run_bo([&](double phi) { return objective(phi); }, cfg.bounds,
                                         cfg.budget, cfg.n_init, seed, cfg.hyper);
  if (!out_dir) return result;

  const fs::path root(*out_dir);
  fs::create_directories(root);
  text::write_file((root / "trace.csv").string(), bo::format_trace(result));

  auto evals = result.history;
  std::stable_sort(evals.begin(), evals.end(),
                   [](const bo::Evaluation& a, const bo::Evaluation& b) { return a.x < b.x; });
  std::string loss_csv = "x,y\n";
  for (const auto& e : evals) loss_csv += text::fmt_double(e.x) + "," + text::fmt_double(e.y) + "\n";
  text::write_file((root / "loss_vs_phi.csv").string(), loss_csv);

  std::vector<double> xs, ys;
  for (const auto& e : result.history) {
    xs.push_back(e.x);
    ys.push_back(e.y);
  }
  const auto gp = bo::GPModel::fit(xs, ys, cfg.hyper);
  std::string gp_csv = "x,y\n";
  constexpr int kSamples = 301;
  for (int i = 0; i < kSamples; ++i) {
    const double x = cfg.bounds.lo + (cfg.bounds.hi - cfg.bounds.lo) * i / (kSamples - 1);
    gp_csv += text::fmt_double(x) + "," + text::fmt_double(gp.predict(x).mean) + "\n";
  }
  text::write_file((root / "gp_mean.csv").string(), gp_csv);
  return result;
}

TrialReport summarize_trials(double phi_true, std::vector<double> estimates) {
  TrialReport r;
  r.phi_true = phi_true;
  r.estimates = std::move(estimates);
  const std::size_t n = r.estimates.size();
  r.single_trial = n == 1;
  if (n == 0) return r;
  std::vector<double> err;
  for (double e : r.estimates) err.push_back(std::abs(e - phi_true));
  r.mae = std::accumulate(err.begin(), err.end(), 0.0) / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double e : err) ss += (e - r.mae) * (e - r.mae);
    r.std_dev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return r;
}

std::string format_report(const std::vector<TrialReport>& reports) {
  std::string out = "phi_true,mae,std,estimates...\n";
  for (const auto& r : reports) {
    out += text::fmt_short(r.phi_true) + "," + text::fmt_short(r.mae) + "," + text::fmt_short(r.std_dev);
    for (double e : r.estimates) out += "," + text::fmt_short(e);
    out += "\n";
  }
  for (const auto& r : reports) {
    if (r.single_trial) {
      out += "# phi_true=" + text::fmt_short(r.phi_true) + ": single trial, std = 0 by convention\n";
    }
    for (const auto& f : r.failures) out += "# phi_true=" + text::fmt_short(r.phi_true) + ": " + f + "\n";
  }
  return out;
}

std::vector<TrialReport> evaluate_trials(const PipelineConfig& cfg,
                                         const std::vector<double>& phi_trues, int n_trials,
                                         std::uint64_t seed, const std::string& out_dir) {
  if (n_trials < 1) throw InvalidArgument("evaluate_trials: n_trials must be >= 1");
  const fs::path root(out_dir);
  fs::create_directories(root);

  std::vector<TrialReport> reports;
  for (double phi_true : phi_trues) {
    const std::string tag = "phi_" + text::fmt_short(phi_true);
    const fs::path data_dir = root / ("obs_" + tag);

    PipelineConfig want = cfg;
    want.material.friction_angle_deg = phi_true;
    want.finalize();

    std::shared_ptr<const ObservationDataset> data;
    std::vector<std::string> failures;
    try {
      if (manifest_matches(data_dir.string())) {
        auto loaded = std::make_shared<ObservationDataset>(load_dataset(data_dir.string()));
        if (loaded->config_hash == config_hash(want)) data = loaded;
      }
      if (!data) {
        fs::remove_all(data_dir);
        data = std::make_shared<ObservationDataset>(
            generate_observation(cfg, phi_true, data_dir.string()));
      }
    } catch (const Error& e) {
      failures.push_back(std::string("dataset: ") + e.what());
    }

    std::vector<double> estimates;
    if (data) {
      ImageLossObjective objective(data);
      for (int t = 0; t < n_trials; ++t) {
        const fs::path trial_dir = root / "trials" / tag / ("trial_" + std::to_string(t));
        try {
          const auto res = invert(objective, seed + static_cast<std::uint64_t>(t), trial_dir.string());
          estimates.push_back(res.best_x);
        } catch (const Error& e) {
          failures.push_back("trial " + std::to_string(t) + ": " + e.what());
        }
      }
    }
    TrialReport r = summarize_trials(phi_true, estimates);
    r.failures = std::move(failures);
    reports.push_back(std::move(r));
    text::write_file((root / "report.csv").string(), format_report(reports));
  }
  return reports;
}

}  // namespace sandinv::pipeline
