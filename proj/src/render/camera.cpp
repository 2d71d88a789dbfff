#include "sandinv/render/camera.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sandinv/common/error.hpp"
#include "sandinv/common/text.hpp"

namespace sandinv::render {

namespace {
double radians(double deg) { return deg * std::numbers::pi / 180.0; }
}  // namespace

void Camera::validate() const {
  const Vec3 dir = look_at - position;
  if (!(dir.norm() > 0.0)) throw InvalidArgument("camera look_at equals position");
  if (!(up.norm() > 0.0) || dir.normalized().cross(up.normalized()).norm() < 1e-9) {
    throw InvalidArgument("camera up vector is parallel to the view direction");
  }
  if (!(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0)) {
    throw InvalidArgument("camera vertical_fov must be in (0, 180)");
  }
  if (width < 16 || height < 16) throw InvalidArgument("camera image must be >= 16x16");
}

PinholeView::PinholeView(const Camera& cam) : cam_(cam) {
  cam.validate();
  forward_ = (cam.look_at - cam.position).normalized();
  right_ = forward_.cross(cam.up).normalized();
  up_ = right_.cross(forward_);
  focal_ = 0.5 * cam.height / std::tan(0.5 * radians(cam.vertical_fov_deg));
}

Projection PinholeView::project(const Vec3& world) const {
  const Vec3 d = world - cam_.position;
  Projection p;
  p.depth = d.dot(forward_);
  if (!(p.depth > 0.0)) {
    p.behind = true;
    return p;
  }
  p.px = 0.5 * cam_.width + focal_ * d.dot(right_) / p.depth;
  p.py = 0.5 * cam_.height - focal_ * d.dot(up_) / p.depth;
  return p;
}

Vec3 PinholeView::unproject(double px, double py, double depth) const {
  const double x = (px - 0.5 * cam_.width) * depth / focal_;
  const double y = (0.5 * cam_.height - py) * depth / focal_;
  return cam_.position + depth * forward_ + x * right_ + y * up_;
}

Projection project(const Camera& cam, const Vec3& world) {
  return PinholeView(cam).project(world);
}

Camera orbit_camera(const Vec3& center, double radius, double azimuth_deg,
                    double elevation_deg, const Camera& tmpl) {
  const double az = radians(azimuth_deg);
  const double el = radians(elevation_deg);
  Camera c = tmpl;
  c.position = center + radius * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                                      std::sin(el));
  c.look_at = center;
  return c;
}

std::vector<Camera> multi_view_rig(int n, const Vec3& center, double radius,
                                   double elevation_deg, const Camera& tmpl) {
  if (n < 1) throw InvalidArgument("multi_view_rig: n must be >= 1");
  if (!(radius > 0.0)) throw InvalidArgument("multi_view_rig: radius must be > 0");
  std::vector<Camera> cams;
  cams.reserve(n);
  for (int i = 0; i < n; ++i) {
    cams.push_back(orbit_camera(center, radius, 360.0 * i / n, elevation_deg, tmpl));
  }
  return cams;
}

namespace {

std::string vec_str(const Vec3& v) {
  return text::fmt_double(v.x()) + " " + text::fmt_double(v.y()) + " " +
         text::fmt_double(v.z());
}

Vec3 parse_vec(const std::string& s, const std::string& key) {
  const auto parts = text::split_ws(s);
  if (parts.size() != 3) throw IoError("camera key " + key + " needs 3 numbers");
  return {text::parse_double(parts[0], key), text::parse_double(parts[1], key),
          text::parse_double(parts[2], key)};
}

}  // namespace

std::string format_cameras(const std::vector<Camera>& cams) {
  std::string out;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const Camera& c = cams[i];
    if (i) out += '\n';
    out += "position=" + vec_str(c.position) + '\n';
    out += "look_at=" + vec_str(c.look_at) + '\n';
    out += "up=" + vec_str(c.up) + '\n';
    out += "fov_deg=" + text::fmt_double(c.vertical_fov_deg) + '\n';
    out += "width=" + std::to_string(c.width) + '\n';
    out += "height=" + std::to_string(c.height) + '\n';
  }
  return out;
}

std::vector<Camera> parse_cameras(const std::string& contents) {
  std::vector<Camera> cams;
  std::istringstream in(contents);
  std::string line;
  Camera cur;
  int seen = 0;
  auto flush = [&] {
    if (seen == 0) return;
    if (seen != 0b111111) throw IoError("camera block is missing keys");
    cur.validate();
    cams.push_back(cur);
    cur = Camera{};
    seen = 0;
  };
  while (std::getline(in, line)) {
    const std::string t = text::trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    if (t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw IoError("camera line without '=': " + t);
    const std::string key = text::trim(t.substr(0, eq));
    const std::string val = t.substr(eq + 1);
    if (key == "position") {
      cur.position = parse_vec(val, key);
      seen |= 1;
    } else if (key == "look_at") {
      cur.look_at = parse_vec(val, key);
      seen |= 2;
    } else if (key == "up") {
      cur.up = parse_vec(val, key);
      seen |= 4;
    } else if (key == "fov_deg") {
      cur.vertical_fov_deg = text::parse_double(val, key);
      seen |= 8;
    } else if (key == "width") {
      cur.width = static_cast<int>(text::parse_int(val, key));
      seen |= 16;
    } else if (key == "height") {
      cur.height = static_cast<int>(text::parse_int(val, key));
      seen |= 32;
    } else {
      throw IoError("unknown camera key: " + key);
    }
  }
  flush();
  return cams;
}

void write_cameras(const std::string& path, const std::vector<Camera>& cams) {
  text::write_file(path, format_cameras(cams));
}

std::vector<Camera> read_cameras(const std::string& path) {
  return parse_cameras(text::read_file(path));
}

}  // namespace sandinv::render
