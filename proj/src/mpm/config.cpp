#include "sandinv/mpm/config.hpp"

#include <cmath>
#include <string>

#include "sandinv/common/error.hpp"

namespace sandinv::mpm {

void SimConfig::validate(const MaterialParams& params) const {
  params.validate();
  grid.validate();
  trajectory.validate();
  if (!(dt_frame > 0.0)) throw ConfigError("dt_frame must be > 0");
  if (n_frames < 0) throw ConfigError("n_frames must be >= 0");
  if (trajectory.total_frames() != n_frames) {
    throw ConfigError("stage_frames sum to " + std::to_string(trajectory.total_frames()) +
                      " but n_frames = " + std::to_string(n_frames));
  }
  if (!(cfl > 0.0)) throw ConfigError("cfl must be > 0");
  if (boundary_cells < 1) throw ConfigError("boundary_cells must be >= 1");
  resolve_substeps(*this, params);
}

GridSpec grid_for_bed(const Vec3& bed_size, double spacing, double headroom,
                      int boundary_cells) {
  GridSpec g;
  g.spacing = spacing;
  g.origin = Vec3::Constant(-boundary_cells * spacing);
  const Vec3 extent(bed_size.x(), bed_size.y(), bed_size.z() + headroom);
  for (int a = 0; a < 3; ++a) {
    const int cells = static_cast<int>(std::ceil(extent[a] / spacing - 1e-9));
    g.dims[a] = cells + 2 * boundary_cells + 1;
  }
  return g;
}

int resolve_substeps(const SimConfig& cfg, const MaterialParams& params) {
  const double dt_max = cfg.cfl * cfg.grid.spacing / params.wave_speed();
  if (cfg.substeps_per_frame > 0) {
    if (cfg.dt_frame / cfg.substeps_per_frame > dt_max * (1.0 + 1e-12)) {
      throw ConfigError("substeps_per_frame = " + std::to_string(cfg.substeps_per_frame) +
                        " violates the CFL bound (need >= " +
                        std::to_string(static_cast<int>(std::ceil(cfg.dt_frame / dt_max))) +
                        ")");
    }
    return cfg.substeps_per_frame;
  }
  return std::max(1, static_cast<int>(std::ceil(cfg.dt_frame / dt_max - 1e-12)));
}

}  // namespace sandinv::mpm
