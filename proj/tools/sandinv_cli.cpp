#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "sandinv/common/error.hpp"
#include "sandinv/common/text.hpp"
#include "sandinv/mpm/simulator.hpp"
#include "sandinv/mpm/snapshot_io.hpp"
#include "sandinv/pipeline/pipeline.hpp"
#include "sandinv/recon/carve.hpp"
#include "sandinv/render/rasterizer.hpp"

namespace fs = std::filesystem;
using namespace sandinv;

namespace {

struct ProfileArgs {
  std::string config_path;
  bool fast = false;

  pipeline::PipelineConfig load() const {
    auto base = fast ? pipeline::fast_config() : pipeline::default_config();
    if (config_path.empty()) return base;
    return pipeline::load_config(config_path, base);
  }
};

void add_profile(CLI::App* cmd, ProfileArgs& p, bool config_required) {
  auto* opt = cmd->add_option("--config", p.config_path, "key = value config file")
                  ->check(CLI::ExistingFile);
  if (config_required) opt->required();
  cmd->add_flag("--fast", p.fast, "start from the fast (CI) profile before applying --config");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : text::split(s, ',')) {
    if (!text::trim(part).empty()) out.push_back(text::parse_double(text::trim(part), "--phis"));
  }
  if (out.empty()) throw ConfigError("--phis is empty");
  return out;
}

std::string kind_of(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid_argument";
  if (dynamic_cast<const SimulationBlowup*>(&e)) return "simulation_blowup";
  if (dynamic_cast<const bo::BoAborted*>(&e)) return "bo_aborted";
  return "internal";
}

int cmd_simulate(const ProfileArgs& prof, double phi, const std::string& out) {
  auto cfg = prof.load();
  cfg.material.friction_angle_deg = phi;
  cfg.finalize();
  fs::create_directories(out);
  const auto points = pipeline::ground_truth_particles(cfg);
  const auto init = mpm::init_simulation(points, cfg.material, cfg.sim);
  mpm::run_stages(init, cfg.sim, cfg.material, [&](const mpm::Snapshot& s) {
    const auto name = mpm::snapshot_filename(s.frame, cfg.sim.snapshot_format);
    mpm::write_snapshot((fs::path(out) / name).string(), s, cfg.sim.snapshot_format);
  });
  std::printf("simulated %d frames, %zu particles -> %s\n", cfg.sim.n_frames, points.size(), out.c_str());
  return 0;
}

int cmd_render(const ProfileArgs& prof, const std::string& snap_dir, const std::string& cam_file,
               const std::string& out) {
  const auto cfg = prof.load();
  const auto cams = render::read_cameras(cam_file);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(snap_dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".txt" || ext == ".mpms")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no snapshots in " + snap_dir);
  fs::create_directories(out);
  for (const auto& f : files) {
    const auto snap = mpm::read_snapshot(f.string());
    render::RenderInput in{snap.positions, std::nullopt};
    if (cfg.sim.plow_enabled) in.plow = render::PlowBox{snap.plow, cfg.sim.trajectory.plow_shape};
    for (std::size_t c = 0; c < cams.size(); ++c) {
      char name[48];
      std::snprintf(name, sizeof name, "frame_%04d_cam%zu.png", snap.frame, c);
      render::write_png((fs::path(out) / name).string(), render::render(in, cams[c], cfg.style));
    }
  }
  std::printf("rendered %zu snapshots x %zu cameras -> %s\n", files.size(), cams.size(), out.c_str());
  return 0;
}

int cmd_reconstruct(const std::string& dataset, const std::string& out) {
  const auto data = pipeline::load_dataset(dataset);
  const auto r = pipeline::reconstruct(data);
  recon::write_occupancy(out, r.occupancy);
  std::printf("occupied voxels %zu, volume %.6g m^3, bed volume %.6g m^3 -> %s\n",
              r.occupancy.occupied_count(), r.volume, data.config.sim.bed_volume(), out.c_str());
  return 0;
}

int cmd_invert(const std::string& dataset, const std::string& config_path, std::uint64_t seed,
               const std::string& out) {
  auto data = std::make_shared<pipeline::ObservationDataset>(pipeline::load_dataset(dataset));
  if (!config_path.empty()) {
    // Scene and simulation settings stay those the dataset was generated with.
    const auto over = pipeline::load_config(config_path, data->config);
    data->config.bounds = over.bounds;
    data->config.budget = over.budget;
    data->config.n_init = over.n_init;
    data->config.hyper = over.hyper;
    data->config.finalize();
  }
  pipeline::ImageLossObjective objective(data);
  const auto res = pipeline::invert(objective, seed, out);
  std::printf("best_phi=%.6f loss=%.9g evals=%d -> %s\n", res.best_x, res.best_y, res.n_evals,
              out.c_str());
  return 0;
}

int cmd_evaluate(const ProfileArgs& prof, const std::string& phis, int trials, std::uint64_t seed,
                 const std::string& out) {
  const auto reports = pipeline::evaluate_trials(prof.load(), parse_list(phis), trials, seed, out);
  std::cout << pipeline::format_report(reports);
  for (const auto& r : reports) {
    if (!r.failures.empty()) return 3;
  }
  return 0;
}

int cmd_observe(const ProfileArgs& prof, double phi, const std::string& out) {
  const auto data = pipeline::generate_observation(prof.load(), phi, out);
  std::printf("dataset phi_true=%g: %zu views, %zu key frames -> %s\n", data.phi_true,
              data.views.size(), data.frames.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Friction-angle identification for granular media from rendered images"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP thread count (default: runtime choice)")
      ->check(CLI::PositiveNumber);

  ProfileArgs prof;
  double phi = 35.0;
  std::string out, snapshots, cameras, dataset, phis = "25,30,35,45";
  std::uint64_t seed = 0;
  int trials = 10;

  auto* sim = app.add_subcommand("simulate", "run the MPM scene and write per-frame snapshots");
  add_profile(sim, prof, false);
  sim->add_option("--phi", phi, "friction angle, degrees")->required();
  sim->add_option("--out", out, "output directory")->required();

  auto* ren = app.add_subcommand("render", "render snapshots through a camera file");
  add_profile(ren, prof, false);
  ren->add_option("--snapshots", snapshots, "snapshot directory")->required()->check(CLI::ExistingDirectory);
  ren->add_option("--cameras", cameras, "camera file")->required()->check(CLI::ExistingFile);
  ren->add_option("--out", out, "output directory")->required();

  auto* rec = app.add_subcommand("reconstruct", "carve the dataset's initial views into voxels");
  rec->add_option("--dataset", dataset, "dataset directory")->required()->check(CLI::ExistingDirectory);
  rec->add_option("--out", out, "occupancy output file")->required();

  auto* inv = app.add_subcommand("invert", "estimate the friction angle of a dataset");
  inv->add_option("--dataset", dataset, "dataset directory")->required()->check(CLI::ExistingDirectory);
  inv->add_option("--config", prof.config_path, "optimizer settings")->check(CLI::ExistingFile);
  inv->add_option("--seed", seed, "optimizer seed")->required();
  inv->add_option("--out", out, "output directory")->required();

  auto* ev = app.add_subcommand("evaluate", "repeated inversions over several ground truths");
  add_profile(ev, prof, false);
  ev->add_option("--phis", phis, "comma-separated ground-truth angles");
  ev->add_option("--trials", trials, "inversions per angle")->check(CLI::PositiveNumber);
  ev->add_option("--seed", seed, "base seed; trial t uses seed + t")->required();
  ev->add_option("--out", out, "output directory")->required();

  auto* obs = app.add_subcommand("observe", "generate a synthetic observation dataset");
  add_profile(obs, prof, false);
  obs->add_option("--phi", phi, "ground-truth friction angle, degrees")->required();
  obs->add_option("--out", out, "dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*sim) return cmd_simulate(prof, phi, out);
    if (*ren) return cmd_render(prof, snapshots, cameras, out);
    if (*rec) return cmd_reconstruct(dataset, out);
    if (*inv) return cmd_invert(dataset, prof.config_path, seed, out);
    if (*ev) return cmd_evaluate(prof, phis, trials, seed, out);
    if (*obs) return cmd_observe(prof, phi, out);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::fprintf(stderr, "error kind=%s message=\"%s\"\n", kind_of(e).c_str(), msg.c_str());
    return 1;
  }
  return 0;
}
