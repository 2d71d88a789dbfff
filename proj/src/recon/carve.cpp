#include "sandinv/recon/carve.hpp"

#include <cmath>
#include <limits>

#include "sandinv/common/error.hpp"
#include "sandinv/common/rng.hpp"
#include "sandinv/common/text.hpp"

namespace sandinv::recon {

std::size_t Mask::count() const {
  std::size_t n = 0;
  for (auto v : fg) n += v;
  return n;
}

Mask silhouette(const render::Image& img, const Vec3& background, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("silhouette threshold must be > 0");
  Mask m(img.width, img.height, false);
  const double t2 = threshold * threshold;
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = img.pixels[3 * i + c] - background[c];
      d2 += d * d;
    }
    m.fg[i] = d2 > t2 ? 1 : 0;
  }
  return m;
}

void VoxelGridSpec::validate() const {
  if (!(spacing > 0.0)) throw InvalidArgument("voxel spacing must be > 0");
  for (int d : dims) {
    if (d < 1) throw InvalidArgument("voxel grid needs >= 1 voxel per axis");
  }
}

std::size_t OccupancyGrid::occupied_count() const {
  std::size_t n = 0;
  for (auto v : occupancy) n += v;
  return n;
}

double OccupancyGrid::occupied_volume() const {
  return static_cast<double>(occupied_count()) * spec.spacing * spec.spacing * spec.spacing;
}

OccupancyGrid carve(std::span<const Mask> masks, std::span<const render::Camera> cams,
                    const VoxelGridSpec& grid, Exec exec) {
  grid.validate();
  if (masks.size() != cams.size()) {
    throw InvalidArgument("carve: " + std::to_string(masks.size()) + " masks but " +
                          std::to_string(cams.size()) + " cameras");
  }
  if (masks.size() < 2) throw InvalidArgument("carve: need at least two views");
  std::vector<render::PinholeView> views;
  views.reserve(cams.size());
  for (std::size_t v = 0; v < cams.size(); ++v) {
    if (masks[v].width != cams[v].width || masks[v].height != cams[v].height) {
      throw InvalidArgument("carve: mask " + std::to_string(v) + " size differs from camera");
    }
    views.emplace_back(cams[v]);
  }

  OccupancyGrid out(grid);
  const auto keep = [&](const Vec3& c) {
    for (std::size_t v = 0; v < views.size(); ++v) {
      const render::Projection p = views[v].project(c);
      if (p.behind) return false;
      const double px = std::floor(p.px);
      const double py = std::floor(p.py);
      if (px < 0 || py < 0 || px >= masks[v].width || py >= masks[v].height) return false;
      if (!masks[v].at(static_cast<int>(px), static_cast<int>(py))) return false;
    }
    return true;
  };
  const int nz = grid.dims[2];
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < grid.dims[1]; ++j)
        for (int i = 0; i < grid.dims[0]; ++i)
          out.occupancy[grid.index(i, j, k)] = keep(grid.voxel_center(i, j, k)) ? 1 : 0;
  } else {
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < grid.dims[1]; ++j)
        for (int i = 0; i < grid.dims[0]; ++i)
          out.occupancy[grid.index(i, j, k)] = keep(grid.voxel_center(i, j, k)) ? 1 : 0;
  }
  return out;
}

void subtract_box(OccupancyGrid& grid, const Pose& pose, const Vec3& half_extents) {
  const auto& d = grid.spec.dims;
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i) {
        const Vec3 local = pose.apply_inverse(grid.spec.voxel_center(i, j, k));
        if ((local.cwiseAbs().array() <= half_extents.array()).all()) {
          grid.occupancy[grid.spec.index(i, j, k)] = 0;
        }
      }
}

Mask erode_mask(const Mask& mask, double radius_px) {
  if (!(radius_px >= 0.0)) throw InvalidArgument("erode_mask: radius must be >= 0");
  const int reach = static_cast<int>(std::floor(radius_px));
  std::vector<std::pair<int, int>> disc;
  for (int dy = -reach; dy <= reach; ++dy)
    for (int dx = -reach; dx <= reach; ++dx) {
      if (dx * dx + dy * dy <= radius_px * radius_px) disc.emplace_back(dx, dy);
    }
  Mask out(mask.width, mask.height, false);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      bool keep = true;
      for (const auto& [dx, dy] : disc) {
        const int u = x + dx;
        const int v = y + dy;
        if (u < 0 || v < 0 || u >= mask.width || v >= mask.height || !mask.at(u, v)) {
          keep = false;
          break;
        }
      }
      if (keep) out.fg[std::size_t(y) * mask.width + x] = 1;
    }
  return out;
}

std::vector<Vec3> sample_points(const OccupancyGrid& grid, int points_per_voxel,
                                std::uint64_t seed) {
  if (points_per_voxel < 1) throw InvalidArgument("points_per_voxel must be >= 1");
  const std::size_t occupied = grid.occupied_count();
  if (occupied == 0) throw InvalidArgument("sample_points: occupancy grid is empty");

  int strata = 1;
  while ((strata + 1) * (strata + 1) * (strata + 1) <= points_per_voxel) ++strata;
  const int stratified = strata * strata * strata;

  Rng rng(seed);
  const double h = grid.spec.spacing;
  const double sub = h / strata;
  std::vector<Vec3> pts;
  pts.reserve(occupied * points_per_voxel);
  const auto& d = grid.spec.dims;
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i) {
        if (!grid.occupied(i, j, k)) continue;
        const Vec3 lo = grid.spec.origin + h * Vec3(i, j, k);
        for (int s = 0; s < stratified; ++s) {
          const int a = s / (strata * strata);
          const int b = (s / strata) % strata;
          const int c = s % strata;
          pts.emplace_back(lo.x() + (a + rng.uniform_open()) * sub,
                           lo.y() + (b + rng.uniform_open()) * sub,
                           lo.z() + (c + rng.uniform_open()) * sub);
        }
        for (int s = stratified; s < points_per_voxel; ++s) {
          pts.emplace_back(lo.x() + rng.uniform_open() * h, lo.y() + rng.uniform_open() * h,
                           lo.z() + rng.uniform_open() * h);
        }
      }
  return pts;
}

void write_occupancy(const std::string& path, const OccupancyGrid& grid) {
  const auto& s = grid.spec;
  std::string out = "dims=" + std::to_string(s.dims[0]) + " " + std::to_string(s.dims[1]) +
                    " " + std::to_string(s.dims[2]) + " origin=" + text::fmt_double(s.origin.x()) +
                    " " + text::fmt_double(s.origin.y()) + " " + text::fmt_double(s.origin.z()) +
                    " spacing=" + text::fmt_double(s.spacing) + "\n";
  const std::size_t row_bytes = (static_cast<std::size_t>(s.dims[0]) + 7) / 8;
  for (int k = 0; k < s.dims[2]; ++k)
    for (int j = 0; j < s.dims[1]; ++j) {
      std::string row(row_bytes, '\0');
      for (int i = 0; i < s.dims[0]; ++i) {
        if (grid.occupied(i, j, k)) row[i / 8] = static_cast<char>(row[i / 8] | (1 << (i % 8)));
      }
      out += row;
    }
  text::write_file(path, out);
}

OccupancyGrid read_occupancy(const std::string& path) {
  const std::string data = text::read_file(path);
  const auto nl = data.find('\n');
  if (nl == std::string::npos) throw IoError("occupancy file has no header: " + path);
  const auto tok = text::split_ws(data.substr(0, nl));
  if (tok.size() != 7 || tok[0].rfind("dims=", 0) != 0 || tok[3].rfind("origin=", 0) != 0 ||
      tok[6].rfind("spacing=", 0) != 0) {
    throw IoError("malformed occupancy header: " + path);
  }
  VoxelGridSpec s;
  s.dims = {static_cast<int>(text::parse_int(tok[0].substr(5), "dims")),
            static_cast<int>(text::parse_int(tok[1], "dims")),
            static_cast<int>(text::parse_int(tok[2], "dims"))};
  s.origin = Vec3(text::parse_double(tok[3].substr(7), "origin"),
                  text::parse_double(tok[4], "origin"), text::parse_double(tok[5], "origin"));
  s.spacing = text::parse_double(tok[6].substr(8), "spacing");
  s.validate();
  OccupancyGrid grid(s);
  const std::size_t row_bytes = (static_cast<std::size_t>(s.dims[0]) + 7) / 8;
  const std::size_t expected = nl + 1 + row_bytes * s.dims[1] * s.dims[2];
  if (data.size() != expected) throw IoError("occupancy payload size mismatch: " + path);
  std::size_t pos = nl + 1;
  for (int k = 0; k < s.dims[2]; ++k)
    for (int j = 0; j < s.dims[1]; ++j) {
      for (int i = 0; i < s.dims[0]; ++i) {
        const auto byte = static_cast<unsigned char>(data[pos + i / 8]);
        grid.occupancy[s.index(i, j, k)] = (byte >> (i % 8)) & 1;
      }
      pos += row_bytes;
    }
  return grid;
}

}  // namespace sandinv::recon
