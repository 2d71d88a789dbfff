#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sandinv/common/types.hpp"

namespace sandinv::mpm {

/// Uniform node lattice. Node (i, j, k) sits at origin + spacing * (i, j, k).
struct GridSpec {
  Vec3 origin = Vec3::Zero();
  double spacing = 1.0 / 64.0;
  std::array<int, 3> dims{4, 4, 4};

  std::size_t node_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k;
  }
  Vec3 node_position(int i, int j, int k) const {
    return origin + spacing * Vec3(i, j, k);
  }
  /// Position in grid units (node i at u = i).
  Vec3 to_grid_units(const Vec3& x) const { return (x - origin) / spacing; }

  /// True when x keeps `margin` cells to every grid face.
  bool inside_margin(const Vec3& x, double margin) const {
    const Vec3 u = to_grid_units(x);
    for (int a = 0; a < 3; ++a) {
      if (!(u[a] >= margin && u[a] <= dims[a] - 1 - margin)) return false;
    }
    return true;
  }

  void validate() const;
};

struct BackgroundGrid {
  GridSpec spec;
  std::vector<double> node_mass;
  std::vector<Vec3> node_momentum;
  std::vector<Vec3> node_velocity;

  BackgroundGrid() = default;
  explicit BackgroundGrid(const GridSpec& s) { reset(s); }

  void reset(const GridSpec& s);
  void clear();

  double total_mass() const;
  Vec3 total_momentum() const;
};

/// Quadratic B-spline stencil of one particle: 3 nodes per axis starting at base.
struct Stencil {
  std::array<int, 3> base{};
  double w[3][3]{};   // [axis][node]
  double dw[3][3]{};  // derivative w.r.t. world coordinate
  double offset[3][3]{};  // node position minus particle position, metres

  double weight(int a, int b, int c) const { return w[0][a] * w[1][b] * w[2][c]; }
  Vec3 weight_gradient(int a, int b, int c) const {
    return {dw[0][a] * w[1][b] * w[2][c], w[0][a] * dw[1][b] * w[2][c],
            w[0][a] * w[1][b] * dw[2][c]};
  }
  Vec3 node_offset(int a, int b, int c) const {
    return {offset[0][a], offset[1][b], offset[2][c]};
  }
};

inline Stencil make_stencil(const Vec3& x, const GridSpec& g) {
  Stencil s;
  const double inv_h = 1.0 / g.spacing;
  for (int a = 0; a < 3; ++a) {
    const double u = (x[a] - g.origin[a]) * inv_h;
    const int base = static_cast<int>(std::floor(u - 0.5));
    const double fx = u - base;
    s.base[a] = base;
    s.w[a][0] = 0.5 * (1.5 - fx) * (1.5 - fx);
    s.w[a][1] = 0.75 - (fx - 1.0) * (fx - 1.0);
    s.w[a][2] = 0.5 * (fx - 0.5) * (fx - 0.5);
    s.dw[a][0] = -(1.5 - fx) * inv_h;
    s.dw[a][1] = -2.0 * (fx - 1.0) * inv_h;
    s.dw[a][2] = (fx - 0.5) * inv_h;
    for (int n = 0; n < 3; ++n) s.offset[a][n] = (n - fx) * g.spacing;
  }
  return s;
}

}  // namespace sandinv::mpm
