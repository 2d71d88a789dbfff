#pragma once

#include <string>
#include <vector>

#include "sandinv/common/types.hpp"

namespace sandinv::render {

/// Row-major RGB image, channels in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // width * height * 3

  Image() = default;
  Image(int w, int h, const Vec3& fill = Vec3::Zero());

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  Vec3 at(int x, int y) const;
  void set(int x, int y, const Vec3& rgb);

  bool operator==(const Image& o) const {
    return width == o.width && height == o.height && pixels == o.pixels;
  }
};

/// Mean over all pixels and channels of the squared channel difference.
/// Throws InvalidArgument when dimensions differ.
double image_loss(const Image& a, const Image& b);

/// 8-bit RGB PNG, channels quantized round-half-up.
void write_png(const std::string& path, const Image& img);
/// Loads an 8-bit RGB PNG and de-quantizes by /255.
Image read_png(const std::string& path);

/// What write_png followed by read_png would return, without touching disk.
Image quantize(const Image& img);

}  // namespace sandinv::render
