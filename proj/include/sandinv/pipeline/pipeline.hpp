#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sandinv/bo/optimizer.hpp"
#include "sandinv/mpm/simulator.hpp"
#include "sandinv/pipeline/config.hpp"
#include "sandinv/recon/carve.hpp"
#include "sandinv/render/image.hpp"

namespace sandinv::pipeline {

/// Initial scene, key-frame images and cameras as stored on disk.
struct ObservationDataset {
  std::string root;
  PipelineConfig config;
  double phi_true = 0.0;
  std::string config_hash;

  std::vector<render::Camera> view_cameras;
  std::vector<render::Image> views;
  std::vector<render::Camera> fixed_cameras;
  std::vector<int> key_frames;
  std::vector<std::vector<render::Image>> frames;  // [key frame][fixed camera]
};

/// Particles filling the bed, one per carve-voxel cell.
std::vector<Vec3> ground_truth_particles(const PipelineConfig& cfg);

/// Multi-view images of the undisturbed bed (no plow).
std::vector<render::Image> render_views(std::span<const Vec3> points, const PipelineConfig& cfg,
                                        Exec exec = Exec::parallel);

/// Simulates from `points` and renders the key frames through the fixed
/// cameras. Images are unquantized. Throws SimulationBlowup.
std::vector<std::vector<render::Image>> simulate_key_frames(std::span<const Vec3> points,
                                                            double bed_volume,
                                                            const PipelineConfig& cfg,
                                                            const mpm::MaterialParams& params,
                                                            Exec exec = Exec::parallel);

/// Runs the ground-truth simulation at phi_true, writes PNGs, cameras,
/// config, meta and manifest to `out_dir`, and returns the dataset exactly as
/// load_dataset would read it back.
ObservationDataset generate_observation(const PipelineConfig& cfg, double phi_true,
                                        const std::string& out_dir);

/// Throws IoError for missing files and ConfigError when the manifest does
/// not match the directory contents.
ObservationDataset load_dataset(const std::string& dir);

/// Manifest text computed from the files currently in `dir`.
std::string build_manifest(const std::string& dir);
bool manifest_matches(const std::string& dir);

struct Reconstruction {
  recon::OccupancyGrid occupancy;
  std::vector<Vec3> points;
  double volume = 0.0;
};

recon::VoxelGridSpec carve_grid(const PipelineConfig& cfg);
Reconstruction reconstruct(const ObservationDataset& data, Exec exec = Exec::parallel);

/// L(phi): simulate the reconstructed bed with friction angle phi, render the
/// key frames and sum the image losses against the observation. Results are
/// memoized per phi; blowups give +inf.
class ImageLossObjective {
 public:
  explicit ImageLossObjective(std::shared_ptr<const ObservationDataset> data,
                              Exec exec = Exec::parallel);

  double operator()(double phi_deg);
  const Reconstruction& reconstruction() const { return recon_; }
  const ObservationDataset& dataset() const { return *data_; }
  int simulations_run() const { return simulations_; }

 private:
  std::shared_ptr<const ObservationDataset> data_;
  Exec exec_;
  Reconstruction recon_;
  std::map<double, double> cache_;
  int simulations_ = 0;
};

double key_frame_loss(const std::vector<std::vector<render::Image>>& rendered,
                      const ObservationDataset& data);

/// BO over the dataset's bounds. With `out_dir`, writes trace.csv,
/// loss_vs_phi.csv and gp_mean.csv there.
bo::BOResult invert(ImageLossObjective& objective, std::uint64_t seed,
                    const std::optional<std::string>& out_dir = std::nullopt);

struct TrialReport {
  double phi_true = 0.0;
  std::vector<double> estimates;
  double mae = 0.0;
  double std_dev = 0.0;  // sample standard deviation; 0 when single_trial
  bool single_trial = false;
  std::vector<std::string> failures;
};

TrialReport summarize_trials(double phi_true, std::vector<double> estimates);

/// For each phi_true: generate (or reuse) the observation under out_dir and
/// run n_trials inversions with seeds seed + trial_index. Writes report.csv.
std::vector<TrialReport> evaluate_trials(const PipelineConfig& cfg,
                                         const std::vector<double>& phi_trues, int n_trials,
                                         std::uint64_t seed, const std::string& out_dir);

std::string format_report(const std::vector<TrialReport>& reports);

}  // namespace sandinv::pipeline
