#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <memory>

#include "sandinv/common/error.hpp"
#include "sandinv/common/text.hpp"
#include "sandinv/pipeline/config.hpp"
#include "sandinv/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using namespace sandinv;
using namespace sandinv::pipeline;

namespace {

PipelineConfig tiny_config() {
  PipelineConfig c = fast_config();
  c.grid_spacing = 0.025;
  c.sim.bed_size = Vec3(0.2, 0.1, 0.05);
  c.sim.n_frames = 12;
  c.sim.trajectory.stage_frames = {2, 4, 2, 4};
  c.sim.trajectory.plow_shape = Vec3(0.01, 0.03, 0.03);
  c.sim.trajectory.lower_depth = 0.03;
  c.sim.trajectory.push_distance = 0.06;
  c.sim.trajectory.start_pose.translation = Vec3(0.05, 0.05, 0.05 + 0.03 + 0.01);
  c.key_frames = {5, 11};
  c.image_width = 48;
  c.image_height = 48;
  c.n_views = 8;
  c.rig_radius = 0.6;
  c.fixed_radius = 0.3;
  c.fixed_target = Vec3(0.09, 0.05, 0.05);
  c.budget = 3;
  c.finalize();
  return c;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string str(const std::string& sub = "") const { return (path_ / sub).string(); }

 private:
  fs::path path_;
};

std::size_t count_png(const std::string& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.path().extension() == ".png";
  return n;
}

}  // namespace

TEST(PipelineConfig, FormatParseRoundTrip) {
  for (const PipelineConfig& c : {default_config(), fast_config(), tiny_config()}) {
    const PipelineConfig back = parse_config(format_config(c), default_config());
    EXPECT_EQ(format_config(back), format_config(c));
    EXPECT_EQ(config_hash(back), config_hash(c));
  }
}

TEST(PipelineConfig, ParsesCommentsAndOverrides) {
  const auto c = parse_config("# comment\n\nfriction_angle_deg = 41.5  # trailing\nkey_frames = 10, 20\n",
                              fast_config());
  EXPECT_EQ(c.material.friction_angle_deg, 41.5);
  EXPECT_EQ(c.key_frames, (std::vector<int>{10, 20}));
  EXPECT_NE(config_hash(c), config_hash(fast_config()));
}

TEST(PipelineConfig, RejectsBadInput) {
  EXPECT_THROW(parse_config("no_such_key = 1\n", fast_config()), ConfigError);
  EXPECT_THROW(parse_config("budget = ten\n", fast_config()), ConfigError);
  EXPECT_THROW(parse_config("budget\n", fast_config()), ConfigError);
  EXPECT_THROW(parse_config("gravity = 0 0\n", fast_config()), ConfigError);
  EXPECT_THROW(parse_config("key_frames = 20, 10\n", fast_config()), ConfigError);
  EXPECT_THROW(parse_config("key_frames = 100\n", fast_config()), ConfigError);
  EXPECT_THROW(parse_config("bounds = 40 30\n", fast_config()), ConfigError);
  EXPECT_THROW(parse_config("n_init = 11\n", fast_config()), ConfigError);
  EXPECT_THROW(parse_config("substeps_per_frame = 1\n", fast_config()), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.txt", fast_config()), IoError);
}

TEST(PipelineConfig, CamerasAimAtTheBed) {
  const auto c = fast_config();
  const auto views = c.view_cameras();
  ASSERT_EQ(views.size(), 40u);
  for (const auto& v : views) EXPECT_EQ(v.look_at, c.surface_center());
  const auto fixed = c.fixed_cameras();
  ASSERT_EQ(fixed.size(), 2u);
  // Mirror images of each other across the push axis.
  EXPECT_NEAR(fixed[0].position.x(), fixed[1].position.x(), 1e-12);
  EXPECT_NEAR(fixed[0].position.y() - c.fixed_target.y(), c.fixed_target.y() - fixed[1].position.y(), 1e-12);
}

TEST(SummarizeTrials, MeanAndSampleStdOfAbsoluteErrors) {
  const auto r = summarize_trials(45.0, {44.0, 46.0, 45.0});
  EXPECT_NEAR(r.mae, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.std_dev, std::sqrt(1.0 / 3.0), 1e-15);
  EXPECT_FALSE(r.single_trial);

  const auto one = summarize_trials(35.0, {36.5});
  EXPECT_TRUE(one.single_trial);
  EXPECT_EQ(one.mae, 1.5);
  EXPECT_EQ(one.std_dev, 0.0);
  const std::string report = format_report({r, one});
  EXPECT_EQ(report.rfind("phi_true,mae,std,estimates...\n45,", 0), 0u);
  EXPECT_NE(report.find("\n35,1.5,0,36.5\n"), std::string::npos);
  EXPECT_NE(report.find("# phi_true=35: single trial"), std::string::npos);
}

TEST(CarveGrid, CoversBedAndHeadroom) {
  const auto c = fast_config();
  const auto g = carve_grid(c);
  EXPECT_EQ(g.origin, Vec3::Zero());
  EXPECT_NEAR(g.spacing, c.grid_spacing * c.carve_spacing_factor, 1e-15);
  for (int a = 0; a < 3; ++a) {
    const double need = c.sim.bed_size[a] + (a == 2 ? c.carve_headroom : 0.0);
    EXPECT_GE(g.dims[a] * g.spacing, need - 1e-12);
    EXPECT_LT((g.dims[a] - 1) * g.spacing, need);
  }
}

TEST(Observation, LayoutManifestAndDeterminism) {
  TempDir tmp("sandinv_obs_test");
  const auto cfg = tiny_config();
  const auto d = generate_observation(cfg, 40.0, tmp.str("a"));
  EXPECT_EQ(d.views.size(), 8u);
  ASSERT_EQ(d.frames.size(), 2u);
  EXPECT_EQ(d.fixed_cameras.size(), 2u);
  EXPECT_EQ(d.phi_true, 40.0);
  EXPECT_EQ(count_png(tmp.str("a")), 8u + 2u * 2u);
  EXPECT_TRUE(manifest_matches(tmp.str("a")));
  EXPECT_EQ(text::read_file(tmp.str("a/manifest.txt")), build_manifest(tmp.str("a")));

  generate_observation(cfg, 40.0, tmp.str("b"));
  EXPECT_EQ(text::read_file(tmp.str("a/manifest.txt")), text::read_file(tmp.str("b/manifest.txt")));

  const auto e = generate_observation(cfg, 25.0, tmp.str("c"));
  EXPECT_NE(text::read_file(tmp.str("a/manifest.txt")), text::read_file(tmp.str("c/manifest.txt")));
  EXPECT_GT(render::image_loss(d.frames[1][0], e.frames[1][0]), 0.0);
}

TEST(Observation, MissingOrTamperedFilesAreReported) {
  TempDir tmp("sandinv_obs_bad_test");
  generate_observation(tiny_config(), 40.0, tmp.str("d"));
  const std::string victim = tmp.str("d") + "/" + [&] {
    for (const auto& e : fs::recursive_directory_iterator(tmp.str("d"))) {
      if (e.path().extension() == ".png") return fs::relative(e.path(), tmp.str("d")).string();
    }
    return std::string();
  }();
  const std::string bytes = text::read_file(victim);

  fs::remove(victim);
  try {
    load_dataset(tmp.str("d"));
    FAIL();
  } catch (const IoError& err) {
    EXPECT_NE(std::string(err.what()).find(fs::path(victim).filename().string()), std::string::npos);
  }

  std::string changed = bytes;
  changed[changed.size() / 2] ^= 0x01;
  text::write_file(victim, changed);
  EXPECT_FALSE(manifest_matches(tmp.str("d")));
  EXPECT_THROW(load_dataset(tmp.str("d")), Error);

  text::write_file(victim, bytes);
  EXPECT_NO_THROW(load_dataset(tmp.str("d")));
  EXPECT_THROW(load_dataset(tmp.str("missing")), IoError);
}

TEST(Objective, MemoizedDeterministicAndAboveZeroAtTruth) {
  TempDir tmp("sandinv_objective_test");
  auto data = std::make_shared<const ObservationDataset>(generate_observation(tiny_config(), 40.0, tmp.str()));
  ImageLossObjective obj(data);
  EXPECT_TRUE(obj.reconstruction().occupancy == reconstruct(*data).occupancy);
  EXPECT_EQ(obj.reconstruction().points, reconstruct(*data).points);
  EXPECT_GT(obj.reconstruction().volume, 0.0);

  const double at_truth = obj(40.0);
  EXPECT_GT(at_truth, 0.0);
  EXPECT_EQ(obj(40.0), at_truth);
  EXPECT_EQ(obj.simulations_run(), 1);

  ImageLossObjective fresh(data);
  EXPECT_EQ(fresh(40.0), at_truth);
  EXPECT_TRUE(std::isfinite(obj(30.0)));
  EXPECT_EQ(obj.simulations_run(), 2);
}

TEST(Invert, BudgetOneReturnsTheInitialSampleAndWritesArtifacts) {
  TempDir tmp("sandinv_invert_test");
  PipelineConfig cfg = tiny_config();
  cfg.budget = 1;
  cfg.finalize();
  auto data = std::make_shared<const ObservationDataset>(generate_observation(cfg, 40.0, tmp.str("obs")));
  ImageLossObjective obj(data);
  const auto r = invert(obj, 5, tmp.str("out"));
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.best_x, r.history[0].x);
  EXPECT_GE(r.best_x, cfg.bounds.lo);
  EXPECT_LE(r.best_x, cfg.bounds.hi);
  for (const char* f : {"trace.csv", "loss_vs_phi.csv", "gp_mean.csv"}) {
    EXPECT_TRUE(fs::exists(tmp.str(std::string("out/") + f))) << f;
  }
  EXPECT_EQ(text::read_file(tmp.str("out/trace.csv")), bo::format_trace(r));
}

TEST(EvaluateTrials, SingleTrialRowsAndDatasetReuse) {
  TempDir tmp("sandinv_trials_test");
  const auto cfg = tiny_config();
  const auto first = evaluate_trials(cfg, {30.0, 45.0}, 1, 11, tmp.str());
  ASSERT_EQ(first.size(), 2u);
  for (const auto& r : first) {
    EXPECT_TRUE(r.single_trial);
    EXPECT_TRUE(r.failures.empty());
    ASSERT_EQ(r.estimates.size(), 1u);
    EXPECT_NEAR(r.mae, std::abs(r.estimates[0] - r.phi_true), 1e-12);
  }
  const std::string report = text::read_file(tmp.str("report.csv"));
  EXPECT_EQ(report, format_report(first));
  const auto stamp = fs::last_write_time(tmp.str("obs_phi_30/manifest.txt"));

  const auto second = evaluate_trials(cfg, {30.0, 45.0}, 1, 11, tmp.str());
  EXPECT_EQ(fs::last_write_time(tmp.str("obs_phi_30/manifest.txt")), stamp);
  EXPECT_EQ(text::read_file(tmp.str("report.csv")), report);
  EXPECT_THROW(evaluate_trials(cfg, {30.0}, 0, 1, tmp.str()), InvalidArgument);
}
