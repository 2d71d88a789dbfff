#include "sandinv/mpm/snapshot_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "sandinv/common/error.hpp"
#include "sandinv/common/text.hpp"

namespace sandinv::mpm {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary snapshot I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos, const std::string& path) {
  if (pos + sizeof(T) > in.size()) throw IoError("truncated snapshot: " + path);
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

std::string value_after(const std::string& token, const std::string& key,
                        const std::string& path) {
  if (token.rfind(key + "=", 0) != 0) {
    throw IoError("malformed snapshot header (expected " + key + "=): " + path);
  }
  return token.substr(key.size() + 1);
}

}  // namespace

std::string snapshot_filename(int frame, SnapshotFormat format) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.%s", frame,
                format == SnapshotFormat::text ? "txt" : "mpms");
  return buf;
}

void write_snapshot(const std::string& path, const Snapshot& snap, SnapshotFormat format) {
  std::string out;
  const auto pose = snap.plow.to_row_major();
  if (format == SnapshotFormat::text) {
    out += "count=" + std::to_string(snap.positions.size()) +
           " frame=" + std::to_string(snap.frame) + " plow=";
    for (std::size_t i = 0; i < pose.size(); ++i) {
      if (i) out += ' ';
      out += text::fmt_short(pose[i]);
    }
    out += '\n';
    for (const Vec3& p : snap.positions) {
      out += text::fmt_short(p.x()) + ' ' + text::fmt_short(p.y()) + ' ' +
             text::fmt_short(p.z()) + '\n';
    }
  } else {
    out.append("MPMS", 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(snap.positions.size()));
    put<std::int32_t>(out, snap.frame);
    for (double v : pose) put<float>(out, static_cast<float>(v));
    for (const Vec3& p : snap.positions) {
      for (int a = 0; a < 3; ++a) put<float>(out, static_cast<float>(p[a]));
    }
  }
  text::write_file(path, out);
}

Snapshot read_snapshot(const std::string& path) {
  const std::string data = text::read_file(path);
  Snapshot snap;
  std::array<double, 12> pose{};
  if (data.size() >= 4 && data.compare(0, 4, "MPMS") == 0) {
    std::size_t pos = 4;
    const auto count = get<std::uint32_t>(data, pos, path);
    snap.frame = get<std::int32_t>(data, pos, path);
    for (double& v : pose) v = get<float>(data, pos, path);
    snap.positions.resize(count);
    for (Vec3& p : snap.positions) {
      for (int a = 0; a < 3; ++a) p[a] = get<float>(data, pos, path);
    }
    if (pos != data.size()) throw IoError("trailing bytes in snapshot: " + path);
  } else {
    std::istringstream in(data);
    std::string header;
    std::getline(in, header);
    const auto tokens = text::split_ws(header);
    if (tokens.size() != 14) throw IoError("malformed snapshot header: " + path);
    const long long count = text::parse_int(value_after(tokens[0], "count", path), "count");
    snap.frame = static_cast<int>(text::parse_int(value_after(tokens[1], "frame", path), "frame"));
    pose[0] = text::parse_double(value_after(tokens[2], "plow", path), "plow");
    for (int i = 1; i < 12; ++i) pose[i] = text::parse_double(tokens[2 + i], "plow");
    if (count < 0) throw IoError("negative count in snapshot: " + path);
    snap.positions.reserve(static_cast<std::size_t>(count));
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      const auto xyz = text::split_ws(line);
      if (xyz.size() != 3) throw IoError("malformed snapshot row in " + path);
      snap.positions.emplace_back(text::parse_double(xyz[0], "x"), text::parse_double(xyz[1], "y"),
                                  text::parse_double(xyz[2], "z"));
    }
    if (static_cast<long long>(snap.positions.size()) != count) {
      throw IoError("snapshot row count does not match header: " + path);
    }
  }
  snap.plow = Pose::from_row_major(pose);
  return snap;
}

}  // namespace sandinv::mpm
