#include "sandinv/render/rasterizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace sandinv::render {

namespace {

constexpr int kBandRows = 8;
constexpr double kNearPlane = 1e-4;

struct Splat {
  double cx, cy, r, depth;
  Vec3 color;
};

struct ScreenTri {
  std::array<double, 3> x, y, inv_depth;
  Vec3 color;
};

struct Primitives {
  std::vector<Splat> splats;
  std::vector<ScreenTri> tris;
};

struct Fragment {
  double depth = std::numeric_limits<double>::infinity();
  std::size_t id = std::numeric_limits<std::size_t>::max();
};

inline bool nearer(double depth, std::size_t id, const Fragment& f) {
  return depth < f.depth || (depth == f.depth && id < f.id);
}

// Two triangles per box face; corner bit 4 = +x, 2 = +y, 1 = +z.
const std::array<std::array<int, 3>, 12> kBoxTris = {{{0, 2, 6}, {0, 6, 4},
                                                      {1, 5, 7}, {1, 7, 3},
                                                      {0, 4, 5}, {0, 5, 1},
                                                      {2, 3, 7}, {2, 7, 6},
                                                      {0, 1, 3}, {0, 3, 2},
                                                      {4, 6, 7}, {4, 7, 5}}};

Vec3 box_corner(int i, const Vec3& h) {
  return {(i & 4) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 1) ? h.z() : -h.z()};
}

Primitives build_primitives(const RenderInput& input, const PinholeView& view,
                            const SceneStyle& style) {
  Primitives prims;
  const auto normals = estimate_normals(input.positions, style.particle_spacing);
  prims.splats.reserve(input.positions.size());
  for (std::size_t i = 0; i < input.positions.size(); ++i) {
    const Projection p = view.project(input.positions[i]);
    if (p.behind || p.depth < kNearPlane) {
      prims.splats.push_back({0, 0, -1.0, 0, Vec3::Zero()});  // keeps ids aligned
      continue;
    }
    prims.splats.push_back({p.px, p.py, splat_radius_px(view, p.depth, style), p.depth,
                            shade(style.sand_albedo, normals[i], style)});
  }

  if (input.plow) {
    const PlowBox& box = *input.plow;
    for (const auto& t : kBoxTris) {
      std::array<Vec3, 3> world;
      for (int k = 0; k < 3; ++k) world[k] = box.pose.apply(box_corner(t[k], box.half_extents));
      Vec3 normal = (world[1] - world[0]).cross(world[2] - world[0]).normalized();
      const Vec3 center = box.pose.translation;
      if (normal.dot(world[0] - center) < 0.0) normal = -normal;
      ScreenTri st;
      bool ok = true;
      for (int k = 0; k < 3; ++k) {
        const Projection p = view.project(world[k]);
        if (p.behind || p.depth < kNearPlane) {
          ok = false;
          break;
        }
        st.x[k] = p.px;
        st.y[k] = p.py;
        st.inv_depth[k] = 1.0 / p.depth;
      }
      // Triangles crossing the near plane are dropped rather than clipped.
      if (!ok) continue;
      st.color = shade(style.plow_albedo, normal, style);
      prims.tris.push_back(st);
    }
  }
  return prims;
}

// Rasterizes one splat into rows [y0, y1).
inline void raster_splat(const Splat& s, std::size_t id, int y0, int y1, int width,
                         std::vector<Fragment>& zbuf, std::vector<const Vec3*>& color,
                         int row_offset) {
  if (s.r <= 0.0) return;
  const int ya = std::max(y0, static_cast<int>(std::floor(s.cy - s.r - 0.5)));
  const int yb = std::min(y1 - 1, static_cast<int>(std::ceil(s.cy + s.r - 0.5)));
  const int xa = std::max(0, static_cast<int>(std::floor(s.cx - s.r - 0.5)));
  const int xb = std::min(width - 1, static_cast<int>(std::ceil(s.cx + s.r - 0.5)));
  const double r2 = s.r * s.r;
  for (int y = ya; y <= yb; ++y) {
    const double dy = y + 0.5 - s.cy;
    for (int x = xa; x <= xb; ++x) {
      const double dx = x + 0.5 - s.cx;
      if (dx * dx + dy * dy > r2) continue;
      const std::size_t k = static_cast<std::size_t>(y - row_offset) * width + x;
      if (nearer(s.depth, id, zbuf[k])) {
        zbuf[k] = {s.depth, id};
        color[k] = &s.color;
      }
    }
  }
}

inline double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

inline void raster_tri(const ScreenTri& t, std::size_t id, int y0, int y1, int width,
                       std::vector<Fragment>& zbuf, std::vector<const Vec3*>& color,
                       int row_offset) {
  const double area = edge(t.x[0], t.y[0], t.x[1], t.y[1], t.x[2], t.y[2]);
  if (area == 0.0) return;
  const auto [ymin, ymax] = std::minmax({t.y[0], t.y[1], t.y[2]});
  const auto [xmin, xmax] = std::minmax({t.x[0], t.x[1], t.x[2]});
  const int ya = std::max(y0, static_cast<int>(std::floor(ymin - 0.5)));
  const int yb = std::min(y1 - 1, static_cast<int>(std::ceil(ymax - 0.5)));
  const int xa = std::max(0, static_cast<int>(std::floor(xmin - 0.5)));
  const int xb = std::min(width - 1, static_cast<int>(std::ceil(xmax - 0.5)));
  for (int y = ya; y <= yb; ++y) {
    const double py = y + 0.5;
    for (int x = xa; x <= xb; ++x) {
      const double px = x + 0.5;
      const double b0 = edge(t.x[1], t.y[1], t.x[2], t.y[2], px, py) / area;
      const double b1 = edge(t.x[2], t.y[2], t.x[0], t.y[0], px, py) / area;
      const double b2 = 1.0 - b0 - b1;
      if (b0 < 0.0 || b1 < 0.0 || b2 < 0.0) continue;
      const double depth = 1.0 / (b0 * t.inv_depth[0] + b1 * t.inv_depth[1] + b2 * t.inv_depth[2]);
      const std::size_t k = static_cast<std::size_t>(y - row_offset) * width + x;
      if (nearer(depth, id, zbuf[k])) {
        zbuf[k] = {depth, id};
        color[k] = &t.color;
      }
    }
  }
}

void resolve(const std::vector<const Vec3*>& color, const Vec3& background, int row0, int rows,
             Image& img) {
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const Vec3* c = color[static_cast<std::size_t>(y) * img.width + x];
      img.set(x, row0 + y, c ? *c : background);
    }
  }
}

std::pair<double, double> splat_rows(const Splat& s) { return {s.cy - s.r, s.cy + s.r}; }
std::pair<double, double> tri_rows(const ScreenTri& t) {
  const auto [a, b] = std::minmax({t.y[0], t.y[1], t.y[2]});
  return {a, b};
}

}  // namespace

Vec3 shade(const Vec3& albedo, const Vec3& normal, const SceneStyle& style) {
  const Vec3 to_light = -style.light_direction.normalized();
  const double lambert = std::max(0.0, normal.dot(to_light));
  const double k = style.ambient + (1.0 - style.ambient) * lambert;
  return (albedo * k).cwiseMax(0.0).cwiseMin(1.0);
}

double splat_radius_px(const PinholeView& view, double depth, const SceneStyle& style) {
  return std::max(1.0, style.splat_scale * style.particle_spacing * view.focal_px() / depth);
}

std::vector<Vec3> estimate_normals(std::span<const Vec3> positions, double spacing) {
  std::vector<Vec3> normals(positions.size(), Vec3::UnitZ());
  if (positions.empty()) return normals;

  Vec3 lo = positions[0];
  Vec3 hi = positions[0];
  for (const Vec3& p : positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double cell = 2.0 * spacing;
  // Keep the density lattice bounded even if a stray particle widens the box.
  const double widest = (hi - lo).maxCoeff();
  if (widest / cell > 400.0) cell = widest / 400.0;
  const Vec3 origin = lo - Vec3::Constant(3.0 * cell);
  std::array<int, 3> n{};
  for (int a = 0; a < 3; ++a) {
    n[a] = static_cast<int>(std::ceil((hi[a] - origin[a]) / cell)) + 4;
  }
  const auto idx = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * n[1] + j) * n[2] + k;
  };
  std::vector<double> rho(static_cast<std::size_t>(n[0]) * n[1] * n[2], 0.0);
  for (const Vec3& p : positions) {
    const Vec3 u = (p - origin) / cell;
    const int i0 = static_cast<int>(std::floor(u.x()));
    const int j0 = static_cast<int>(std::floor(u.y()));
    const int k0 = static_cast<int>(std::floor(u.z()));
    const Vec3 f(u.x() - i0, u.y() - j0, u.z() - k0);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          const double w = (a ? f.x() : 1 - f.x()) * (b ? f.y() : 1 - f.y()) *
                           (c ? f.z() : 1 - f.z());
          rho[idx(i0 + a, j0 + b, k0 + c)] += w;
        }
  }
  // Separable [1 2 1] / 4 smoothing along each axis.
  std::vector<double> tmp(rho.size());
  for (int axis = 0; axis < 3; ++axis) {
    const std::array<int, 3> step{axis == 0, axis == 1, axis == 2};
    for (int i = 0; i < n[0]; ++i)
      for (int j = 0; j < n[1]; ++j)
        for (int k = 0; k < n[2]; ++k) {
          const int c[3] = {i, j, k};
          const double mid = rho[idx(i, j, k)];
          double sum = 2.0 * mid;
          for (int s : {-1, 1}) {
            const int q = c[axis] + s;
            if (q < 0 || q >= n[axis]) continue;
            sum += rho[idx(i + s * step[0], j + s * step[1], k + s * step[2])];
          }
          tmp[idx(i, j, k)] = 0.25 * sum;
        }
    rho.swap(tmp);
  }
  const auto grad_at = [&](int i, int j, int k) {
    const auto v = [&](int a, int b, int c) {
      a = std::clamp(a, 0, n[0] - 1);
      b = std::clamp(b, 0, n[1] - 1);
      c = std::clamp(c, 0, n[2] - 1);
      return rho[idx(a, b, c)];
    };
    return Vec3(v(i + 1, j, k) - v(i - 1, j, k), v(i, j + 1, k) - v(i, j - 1, k),
                v(i, j, k + 1) - v(i, j, k - 1));
  };
  for (std::size_t p = 0; p < positions.size(); ++p) {
    const Vec3 u = (positions[p] - origin) / cell;
    const int i0 = static_cast<int>(std::floor(u.x()));
    const int j0 = static_cast<int>(std::floor(u.y()));
    const int k0 = static_cast<int>(std::floor(u.z()));
    const Vec3 f(u.x() - i0, u.y() - j0, u.z() - k0);
    Vec3 g = Vec3::Zero();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          const double w = (a ? f.x() : 1 - f.x()) * (b ? f.y() : 1 - f.y()) *
                           (c ? f.z() : 1 - f.z());
          g += w * grad_at(i0 + a, j0 + b, k0 + c);
        }
    const double len = g.norm();
    if (len > 1e-9) normals[p] = -g / len;
  }
  return normals;
}

Image render(const RenderInput& input, const Camera& cam, const SceneStyle& style, Exec exec) {
  const PinholeView view(cam);
  const Primitives prims = build_primitives(input, view, style);
  const int w = cam.width;
  const int h = cam.height;
  Image img(w, h, style.background);
  const std::size_t n_splats = prims.splats.size();

  if (exec == Exec::serial_reference) {
    std::vector<Fragment> zbuf(static_cast<std::size_t>(w) * h);
    std::vector<const Vec3*> color(zbuf.size(), nullptr);
    for (std::size_t i = 0; i < n_splats; ++i) {
      raster_splat(prims.splats[i], i, 0, h, w, zbuf, color, 0);
    }
    for (std::size_t t = 0; t < prims.tris.size(); ++t) {
      raster_tri(prims.tris[t], n_splats + t, 0, h, w, zbuf, color, 0);
    }
    resolve(color, style.background, 0, h, img);
    return img;
  }

  // Bin primitives into bands of rows; each band is then rasterized
  // independently with its own z-buffer.
  const int n_bands = (h + kBandRows - 1) / kBandRows;
  std::vector<std::vector<std::size_t>> splat_bins(n_bands), tri_bins(n_bands);
  // Conservative: the raster routines clip to their band anyway.
  const auto band_range = [&](double ya, double yb) {
    const int a = std::clamp(static_cast<int>(std::floor(ya - 1.0)) / kBandRows, 0, n_bands - 1);
    const int b = std::clamp(static_cast<int>(std::ceil(yb + 1.0)) / kBandRows, 0, n_bands - 1);
    return std::pair{a, b};
  };
  for (std::size_t i = 0; i < n_splats; ++i) {
    const Splat& s = prims.splats[i];
    if (s.r <= 0.0 || s.cy + s.r < 0.0 || s.cy - s.r > h) continue;
    const auto [ya, yb] = splat_rows(s);
    const auto [a, b] = band_range(ya, yb);
    for (int band = a; band <= b; ++band) splat_bins[band].push_back(i);
  }
  for (std::size_t t = 0; t < prims.tris.size(); ++t) {
    const auto [ya, yb] = tri_rows(prims.tris[t]);
    if (yb < 0.0 || ya > h) continue;
    const auto [a, b] = band_range(ya, yb);
    for (int band = a; band <= b; ++band) tri_bins[band].push_back(t);
  }

#pragma omp parallel for schedule(dynamic, 1)
  for (int band = 0; band < n_bands; ++band) {
    const int y0 = band * kBandRows;
    const int y1 = std::min(h, y0 + kBandRows);
    std::vector<Fragment> zbuf(static_cast<std::size_t>(w) * (y1 - y0));
    std::vector<const Vec3*> color(zbuf.size(), nullptr);
    for (std::size_t i : splat_bins[band]) {
      raster_splat(prims.splats[i], i, y0, y1, w, zbuf, color, y0);
    }
    for (std::size_t t : tri_bins[band]) {
      raster_tri(prims.tris[t], n_splats + t, y0, y1, w, zbuf, color, y0);
    }
    resolve(color, style.background, y0, y1 - y0, img);
  }
  return img;
}

}  // namespace sandinv::render
