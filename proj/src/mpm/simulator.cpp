#include "sandinv/mpm/simulator.hpp"

#include <cmath>
#include <string>

#include "sandinv/common/error.hpp"
#include "sandinv/common/rng.hpp"

namespace sandinv::mpm {

SimState init_simulation(std::span<const Vec3> points, const MaterialParams& params,
                         const SimConfig& config, double bed_volume) {
  params.validate();
  config.grid.validate();
  if (points.empty()) throw InvalidArgument("init_simulation: empty point set");
  if (!(bed_volume > 0.0)) throw InvalidArgument("init_simulation: bed volume must be > 0");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!config.grid.inside_margin(points[i], kParticleMargin)) {
      throw InvalidArgument("init_simulation: point " + std::to_string(i) +
                            " lies outside the grid margin");
    }
  }

  SimState state;
  state.grid.reset(config.grid);
  const double volume = bed_volume / static_cast<double>(points.size());
  state.particles.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    Particle& p = state.particles[i];
    p.position = points[i];
    p.initial_volume = volume;
    p.mass = params.density * volume;
  }
  state.frame = 0;
  state.plow_pose = plow_pose_at(0, config.trajectory);
  return state;
}

SimState init_simulation(std::span<const Vec3> points, const MaterialParams& params,
                         const SimConfig& config) {
  return init_simulation(points, params, config, config.bed_volume());
}

void advance_frame(SimState& state, const SimConfig& config, const MaterialParams& params,
                   Exec exec) {
  const int substeps = resolve_substeps(config, params);
  const double dt = config.dt_frame / substeps;

  GridForces forces;
  forces.gravity = config.gravity;
  forces.friction = config.contact_friction;
  forces.boundary_cells = config.boundary_cells;
  const Vec3 plow_v = plow_velocity(state.frame, config.trajectory, config.dt_frame);

  try {
    for (int s = 0; s < substeps; ++s) {
      if (config.plow_enabled) {
        const double f = state.frame + (s + 0.5) / substeps;
        forces.plow = PlowContact{plow_pose_at(f, config.trajectory),
                                  config.trajectory.plow_shape, plow_v};
      }
      p2g_transfer(state, dt, exec);
      grid_update(state.grid, dt, forces, exec);
      g2p_transfer(state, dt, exec);
      if (config.plow_enabled) {
        const double f_end = state.frame + (s + 1.0) / substeps;
        push_out_of_plow(state,
                         PlowContact{plow_pose_at(f_end, config.trajectory),
                                     config.trajectory.plow_shape, plow_v},
                         exec);
      }
      apply_plasticity(state, params, exec);
    }
  } catch (const SimulationBlowup& e) {
    throw e.at_frame(state.frame);
  }
  ++state.frame;
  state.plow_pose = plow_pose_at(static_cast<double>(state.frame), config.trajectory);
}

SimState step(SimState state, const SimConfig& config, const MaterialParams& params, int frame,
              Exec exec) {
  if (frame != state.frame) {
    throw InvalidArgument("step: state is at frame " + std::to_string(state.frame) +
                          ", not " + std::to_string(frame));
  }
  if (frame < 0 || frame >= config.n_frames) {
    throw InvalidArgument("step: frame " + std::to_string(frame) + " outside [0, n_frames)");
  }
  advance_frame(state, config, params, exec);
  return state;
}

void run_stages(const SimState& initial, const SimConfig& config, const MaterialParams& params,
                const SnapshotSink& sink, Exec exec) {
  if (config.trajectory.total_frames() != config.n_frames) {
    throw ConfigError("stage frames do not sum to n_frames");
  }
  if (config.n_frames == 0) return;
  SimState state = initial;
  sink(snapshot_of(state));
  for (int f = 1; f < config.n_frames; ++f) {
    advance_frame(state, config, params, exec);
    sink(snapshot_of(state));
  }
}

std::vector<Snapshot> run_stages(const SimState& initial, const SimConfig& config,
                                 const MaterialParams& params, Exec exec) {
  std::vector<Snapshot> out;
  out.reserve(static_cast<std::size_t>(std::max(config.n_frames, 0)));
  run_stages(
      initial, config, params, [&](const Snapshot& s) { out.push_back(s); }, exec);
  return out;
}

std::vector<Vec3> sample_box(const Aabb& box, double cell, std::uint64_t seed) {
  if (!(cell > 0.0)) throw InvalidArgument("sample_box: cell must be > 0");
  const Vec3 size = box.size();
  int n[3];
  for (int a = 0; a < 3; ++a) {
    n[a] = std::max(1, static_cast<int>(std::lround(size[a] / cell)));
  }
  const Vec3 step(size.x() / n[0], size.y() / n[1], size.z() / n[2]);
  Rng rng(seed);
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n[0]) * n[1] * n[2]);
  for (int i = 0; i < n[0]; ++i) {
    for (int j = 0; j < n[1]; ++j) {
      for (int k = 0; k < n[2]; ++k) {
        const double u = rng.uniform_open();
        const double v = rng.uniform_open();
        const double w = rng.uniform_open();
        pts.emplace_back(box.lo.x() + (i + u) * step.x(), box.lo.y() + (j + v) * step.y(),
                         box.lo.z() + (k + w) * step.z());
      }
    }
  }
  return pts;
}

}  // namespace sandinv::mpm
