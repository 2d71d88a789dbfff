#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sandinv/common/exec.hpp"
#include "sandinv/common/types.hpp"
#include "sandinv/render/camera.hpp"
#include "sandinv/render/image.hpp"

namespace sandinv::recon {

/// Binary foreground mask, row-major, 1 = foreground.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> fg;

  Mask() = default;
  Mask(int w, int h, bool value) : width(w), height(h), fg(std::size_t(w) * h, value ? 1 : 0) {}

  bool at(int x, int y) const { return fg[std::size_t(y) * width + x] != 0; }
  std::size_t count() const;
};

/// Foreground iff the squared RGB distance to `background` exceeds threshold^2.
Mask silhouette(const render::Image& img, const Vec3& background, double threshold);

/// Keeps a foreground pixel only if every pixel centre within `radius_px` of
/// it is foreground; pixels beyond the image border count as background.
Mask erode_mask(const Mask& mask, double radius_px);

/// Voxel lattice; voxel (i, j, k) spans origin + spacing * [i, i+1) x ...
struct VoxelGridSpec {
  Vec3 origin = Vec3::Zero();
  double spacing = 1.0;
  std::array<int, 3> dims{1, 1, 1};

  std::size_t voxel_count() const { return std::size_t(dims[0]) * dims[1] * dims[2]; }
  /// x fastest, then y, then z.
  std::size_t index(int i, int j, int k) const {
    return (std::size_t(k) * dims[1] + j) * dims[0] + i;
  }
  Vec3 voxel_center(int i, int j, int k) const {
    return origin + spacing * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  void validate() const;
};

struct OccupancyGrid {
  VoxelGridSpec spec;
  std::vector<std::uint8_t> occupancy;  // one entry per voxel, 0 or 1

  explicit OccupancyGrid(const VoxelGridSpec& s = {})
      : spec(s), occupancy(s.voxel_count(), 0) {}

  bool occupied(int i, int j, int k) const { return occupancy[spec.index(i, j, k)] != 0; }
  std::size_t occupied_count() const;
  double occupied_volume() const;

  bool operator==(const OccupancyGrid& o) const {
    return spec.origin == o.spec.origin && spec.spacing == o.spec.spacing &&
           spec.dims == o.spec.dims && occupancy == o.occupancy;
  }
};

/// Visual hull: a voxel is occupied iff its centre projects inside the image
/// and onto a foreground pixel in every view. Throws InvalidArgument unless
/// masks and cameras pair up (at least two views) with matching sizes.
OccupancyGrid carve(std::span<const Mask> masks, std::span<const render::Camera> cams,
                    const VoxelGridSpec& grid, Exec exec = Exec::parallel);

/// Clears voxels whose centres fall inside an oriented box.
void subtract_box(OccupancyGrid& grid, const Pose& pose, const Vec3& half_extents);

/// `points_per_voxel` stratified-jittered points strictly inside each
/// occupied voxel, in voxel index order. Throws when nothing is occupied.
std::vector<Vec3> sample_points(const OccupancyGrid& grid, int points_per_voxel,
                                std::uint64_t seed);

/// Header line `dims=<nx> <ny> <nz> origin=<x> <y> <z> spacing=<h>` followed by
/// one bit-packed row per (y, z): ceil(nx / 8) bytes, voxel i in bit (i % 8)
/// of byte i / 8, rows ordered y fastest then z.
void write_occupancy(const std::string& path, const OccupancyGrid& grid);
OccupancyGrid read_occupancy(const std::string& path);

}  // namespace sandinv::recon
