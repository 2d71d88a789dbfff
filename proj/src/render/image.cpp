#include "sandinv/render/image.hpp"

#include <cmath>
#include <vector>

#include <png.h>

#include "sandinv/common/error.hpp"

namespace sandinv::render {

Image::Image(int w, int h, const Vec3& fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) pixels[3 * i + c] = static_cast<float>(fill[c]);
  }
}

Vec3 Image::at(int x, int y) const {
  const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::set(int x, int y, const Vec3& rgb) {
  const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
  for (int c = 0; c < 3; ++c) pixels[i + c] = static_cast<float>(rgb[c]);
}

double image_loss(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) {
    throw InvalidArgument("image_loss: dimension mismatch (" + std::to_string(a.width) + "x" +
                          std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                          std::to_string(b.height) + ")");
  }
  if (a.pixels.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.pixels.size());
}

namespace {

unsigned char to_byte(float v) {
  const double q = std::floor(static_cast<double>(v) * 255.0 + 0.5);
  return static_cast<unsigned char>(q < 0.0 ? 0.0 : (q > 255.0 ? 255.0 : q));
}

}  // namespace

Image quantize(const Image& img) {
  Image out = img;
  for (float& v : out.pixels) v = static_cast<float>(to_byte(v) / 255.0);
  return out;
}

void write_png(const std::string& path, const Image& img) {
  std::vector<unsigned char> bytes(img.pixels.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(img.pixels[i]);
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(img.width);
  out.height = static_cast<png_uint_32>(img.height);
  out.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&out, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    const std::string msg = out.message;
    png_image_free(&out);
    throw IoError("cannot write PNG " + path + ": " + msg);
  }
}

Image read_png(const std::string& path) {
  png_image in{};
  in.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&in, path.c_str())) {
    throw IoError("cannot read PNG " + path + ": " + in.message);
  }
  if (in.format != PNG_FORMAT_RGB) {
    png_image_free(&in);
    throw IoError("expected 8-bit RGB PNG: " + path);
  }
  std::vector<unsigned char> bytes(PNG_IMAGE_SIZE(in));
  if (!png_image_finish_read(&in, nullptr, bytes.data(), 0, nullptr)) {
    throw IoError("PNG decode failed " + path + ": " + in.message);
  }
  Image img(static_cast<int>(in.width), static_cast<int>(in.height));
  for (std::size_t i = 0; i < bytes.size(); ++i) img.pixels[i] = static_cast<float>(bytes[i] / 255.0);
  return img;
}

}  // namespace sandinv::render
