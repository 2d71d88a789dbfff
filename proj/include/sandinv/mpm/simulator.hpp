#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sandinv/mpm/config.hpp"
#include "sandinv/mpm/kernels.hpp"
#include "sandinv/mpm/state.hpp"

namespace sandinv::mpm {

/// One particle per point, at rest with F = I. Particle volume is
/// bed_volume / count; mass is density times that volume.
/// Throws InvalidArgument for an empty set or a point outside the grid margin.
SimState init_simulation(std::span<const Vec3> points, const MaterialParams& params,
                         const SimConfig& config, double bed_volume);
/// Same, with the bed volume taken from config.bed_size.
SimState init_simulation(std::span<const Vec3> points, const MaterialParams& params,
                         const SimConfig& config);

/// Advances state.frame by one frame (all substeps).
void advance_frame(SimState& state, const SimConfig& config, const MaterialParams& params,
                   Exec exec = Exec::parallel);

/// Functional form of advance_frame; `frame` must equal state.frame.
SimState step(SimState state, const SimConfig& config, const MaterialParams& params, int frame,
              Exec exec = Exec::parallel);

using SnapshotSink = std::function<void(const Snapshot&)>;

/// Emits n_frames snapshots (frames 0 .. n_frames-1), advancing between them.
void run_stages(const SimState& initial, const SimConfig& config, const MaterialParams& params,
                const SnapshotSink& sink, Exec exec = Exec::parallel);
std::vector<Snapshot> run_stages(const SimState& initial, const SimConfig& config,
                                 const MaterialParams& params, Exec exec = Exec::parallel);

/// Stratified-jittered points filling `box`: cells of size `cell` with one
/// uniformly jittered point each.
std::vector<Vec3> sample_box(const Aabb& box, double cell, std::uint64_t seed);

}  // namespace sandinv::mpm
