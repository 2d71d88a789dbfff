#include "sandinv/mpm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "sandinv/common/error.hpp"
#include "sandinv/mpm/plasticity.hpp"

namespace sandinv::mpm {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Slab width in cells for the two-colour parallel scatter. A particle with
// stencil base b touches nodes b..b+2, so slabs two apart never share nodes.
constexpr int kSlabCells = 4;

inline void scatter_particle(const Particle& p, double dt, double inv_h2x4,
                             BackgroundGrid& g) {
  const GridSpec& spec = g.spec;
  const Stencil st = make_stencil(p.position, spec);
  const Mat3 affine =
      -dt * p.initial_volume * inv_h2x4 * p.kirchhoff_stress + p.mass * p.affine_velocity;
  const Vec3 mv = p.mass * p.velocity;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const std::size_t row = spec.index(st.base[0] + a, st.base[1] + b, st.base[2]);
      const double wab = st.w[0][a] * st.w[1][b];
      for (int c = 0; c < 3; ++c) {
        const double w = wab * st.w[2][c];
        const std::size_t n = row + c;
        g.node_mass[n] += w * p.mass;
        g.node_momentum[n] += w * (mv + affine * st.node_offset(a, b, c));
      }
    }
  }
}

std::size_t first_escaped(const std::vector<Particle>& ps, const GridSpec& spec, Exec exec) {
  std::size_t bad = kNone;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ps.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for reduction(min : bad) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (!spec.inside_margin(ps[i].position, kParticleMargin)) {
        bad = std::min(bad, static_cast<std::size_t>(i));
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (!spec.inside_margin(ps[i].position, kParticleMargin)) {
        bad = static_cast<std::size_t>(i);
        break;
      }
    }
  }
  return bad;
}

}  // namespace

Vec3 separable_contact(const Vec3& velocity, const Vec3& obstacle_velocity,
                       const Vec3& normal, double friction) {
  const Vec3 rel = velocity - obstacle_velocity;
  const double vn = rel.dot(normal);
  if (vn >= 0.0) return velocity;
  const Vec3 vt = rel - vn * normal;
  const double vt_norm = vt.norm();
  if (vt_norm <= friction * -vn) return obstacle_velocity;
  return obstacle_velocity + vt * (1.0 + friction * vn / vt_norm);
}

void p2g_transfer(SimState& state, double dt, Exec exec) {
  BackgroundGrid& g = state.grid;
  const GridSpec& spec = g.spec;
  const auto& ps = state.particles;

  if (const std::size_t bad = first_escaped(ps, spec, exec); bad != kNone) {
    throw SimulationBlowup("particle left the grid margin", state.frame, bad);
  }

  const double inv_h2x4 = 4.0 / (spec.spacing * spec.spacing);

  if (exec == Exec::serial_reference) {
    g.clear();
    for (const Particle& p : ps) scatter_particle(p, dt, inv_h2x4, g);
    return;
  }

  const std::ptrdiff_t n_nodes = static_cast<std::ptrdiff_t>(spec.node_count());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_nodes; ++i) {
    g.node_mass[i] = 0.0;
    g.node_momentum[i].setZero();
    g.node_velocity[i].setZero();
  }

  // Counting sort of particle indices into x-slabs; order within a slab is the
  // particle index order, so accumulation order is independent of thread count.
  const int n_slabs = (spec.dims[0] + kSlabCells - 1) / kSlabCells;
  std::vector<int> slab_of(ps.size());
  std::vector<std::size_t> start(n_slabs + 1, 0);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double u = (ps[i].position.x() - spec.origin.x()) / spec.spacing;
    const int base = static_cast<int>(std::floor(u - 0.5));
    slab_of[i] = base / kSlabCells;
    ++start[slab_of[i] + 1];
  }
  for (int s = 0; s < n_slabs; ++s) start[s + 1] += start[s];
  std::vector<std::size_t> order(ps.size());
  {
    std::vector<std::size_t> cursor(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < ps.size(); ++i) order[cursor[slab_of[i]]++] = i;
  }

  for (int color = 0; color < 2; ++color) {
    const int count = (n_slabs - color + 1) / 2;
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < count; ++t) {
      const int s = color + 2 * t;
      for (std::size_t k = start[s]; k < start[s + 1]; ++k) {
        scatter_particle(ps[order[k]], dt, inv_h2x4, g);
      }
    }
  }
}

namespace {

inline Vec3 update_node(const BackgroundGrid& g, std::size_t n, int i, int j, int k, double dt,
                        const GridForces& forces) {
  const double m = g.node_mass[n];
  if (m <= 0.0) return Vec3::Zero();
  Vec3 v = g.node_momentum[n] / m + dt * forces.gravity;

  if (forces.plow) {
    const PlowContact& plow = *forces.plow;
    const Vec3 local = plow.pose.apply_inverse(g.spec.node_position(i, j, k));
    const Vec3 depth = plow.half_extents - local.cwiseAbs();
    if ((depth.array() > 0.0).all()) {
      int axis = 0;
      depth.minCoeff(&axis);
      Vec3 n_local = Vec3::Zero();
      n_local[axis] = local[axis] >= 0.0 ? 1.0 : -1.0;
      v = separable_contact(v, plow.velocity, plow.pose.rotation * n_local, forces.friction);
    }
  }

  if (forces.boundaries) {
    const int idx[3] = {i, j, k};
    for (int a = 0; a < 3; ++a) {
      Vec3 normal = Vec3::Zero();
      if (idx[a] <= forces.boundary_cells) {
        normal[a] = 1.0;
      } else if (idx[a] >= g.spec.dims[a] - 1 - forces.boundary_cells) {
        normal[a] = -1.0;
      } else {
        continue;
      }
      v = separable_contact(v, Vec3::Zero(), normal, forces.friction);
    }
  }
  return v;
}

}  // namespace

void grid_update(BackgroundGrid& g, double dt, const GridForces& forces, Exec exec) {
  const auto& d = g.spec.dims;
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < d[0]; ++i) {
      for (int j = 0; j < d[1]; ++j) {
        for (int k = 0; k < d[2]; ++k) {
          const std::size_t n = g.spec.index(i, j, k);
          g.node_velocity[n] = update_node(g, n, i, j, k, dt, forces);
        }
      }
    }
  } else {
    for (int i = 0; i < d[0]; ++i) {
      for (int j = 0; j < d[1]; ++j) {
        for (int k = 0; k < d[2]; ++k) {
          const std::size_t n = g.spec.index(i, j, k);
          g.node_velocity[n] = update_node(g, n, i, j, k, dt, forces);
        }
      }
    }
  }
}

namespace {

// Returns false when the particle state became non-finite.
inline bool gather_particle(Particle& p, const BackgroundGrid& g, double dt, double inv_h2x4) {
  const GridSpec& spec = g.spec;
  const Stencil st = make_stencil(p.position, spec);
  double v[3] = {0.0, 0.0, 0.0};
  double b[3][3] = {};
  for (int a = 0; a < 3; ++a) {
    for (int bb = 0; bb < 3; ++bb) {
      const std::size_t row = spec.index(st.base[0] + a, st.base[1] + bb, st.base[2]);
      const double wab = st.w[0][a] * st.w[1][bb];
      for (int c = 0; c < 3; ++c) {
        const double w = wab * st.w[2][c];
        const double* vi = g.node_velocity[row + c].data();
        const double off[3] = {st.offset[0][a], st.offset[1][bb], st.offset[2][c]};
        for (int r = 0; r < 3; ++r) {
          const double wv = w * vi[r];
          v[r] += wv;
          b[r][0] += wv * off[0];
          b[r][1] += wv * off[1];
          b[r][2] += wv * off[2];
        }
      }
    }
  }
  Mat3 c_mat;
  for (int r = 0; r < 3; ++r) {
    p.velocity[r] = v[r];
    for (int q = 0; q < 3; ++q) c_mat(r, q) = inv_h2x4 * b[r][q];
  }
  p.affine_velocity = c_mat;
  p.position += dt * p.velocity;
  p.deformation_gradient = (Mat3::Identity() + dt * c_mat) * p.deformation_gradient;
  return p.position.allFinite() && p.velocity.allFinite() &&
         p.deformation_gradient.allFinite();
}

}  // namespace

void g2p_transfer(SimState& state, double dt, Exec exec) {
  const double inv_h2x4 = 4.0 / (state.grid.spec.spacing * state.grid.spec.spacing);
  auto& ps = state.particles;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ps.size());
  std::size_t bad = kNone;
  if (exec == Exec::parallel) {
#pragma omp parallel for reduction(min : bad) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (!gather_particle(ps[i], state.grid, dt, inv_h2x4)) {
        bad = std::min(bad, static_cast<std::size_t>(i));
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (!gather_particle(ps[i], state.grid, dt, inv_h2x4)) {
        bad = std::min(bad, static_cast<std::size_t>(i));
      }
    }
  }
  if (bad != kNone) throw SimulationBlowup("non-finite particle state", state.frame, bad);
}

namespace {

inline bool project_particle(Particle& p, const MaterialParams& params) {
  if (!(p.deformation_gradient.determinant() > 0.0)) return false;
  try {
    const ReturnResult r = drucker_prager_return(p.deformation_gradient, params);
    p.deformation_gradient = r.deformation_gradient;
    p.kirchhoff_stress = r.kirchhoff_stress;
  } catch (const SimulationBlowup&) {
    return false;
  }
  return true;
}

}  // namespace

void apply_plasticity(SimState& state, const MaterialParams& params, Exec exec) {
  auto& ps = state.particles;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ps.size());
  std::size_t bad = kNone;
  if (exec == Exec::parallel) {
#pragma omp parallel for reduction(min : bad) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (!project_particle(ps[i], params)) bad = std::min(bad, static_cast<std::size_t>(i));
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (!project_particle(ps[i], params)) bad = std::min(bad, static_cast<std::size_t>(i));
    }
  }
  if (bad != kNone) {
    throw SimulationBlowup("inverted or non-finite deformation gradient", state.frame, bad);
  }
}

namespace {

void push_out(Particle& p, const PlowContact& plow) {
  const Vec3 local = plow.pose.apply_inverse(p.position);
  const Vec3 depth = plow.half_extents - local.cwiseAbs();
  if (!(depth.array() > 0.0).all()) return;
  int axis = 0;
  depth.minCoeff(&axis);
  Vec3 moved = local;
  const double side = local[axis] >= 0.0 ? 1.0 : -1.0;
  moved[axis] = side * plow.half_extents[axis];
  p.position = plow.pose.apply(moved);
  Vec3 n_local = Vec3::Zero();
  n_local[axis] = side;
  const Vec3 n = plow.pose.rotation * n_local;
  const double vn = (p.velocity - plow.velocity).dot(n);
  if (vn < 0.0) p.velocity -= vn * n;
}

}  // namespace

void push_out_of_plow(SimState& state, const PlowContact& plow, Exec exec) {
  auto& ps = state.particles;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ps.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) push_out(ps[i], plow);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) push_out(ps[i], plow);
  }
}

}  // namespace sandinv::mpm
