#pragma once

#include <string>

#include "sandinv/mpm/config.hpp"
#include "sandinv/mpm/state.hpp"

namespace sandinv::mpm {

/// Text:   `count=<N> frame=<f> plow=<12 floats>` then N lines `x y z`.
/// Binary: "MPMS", u32 count, i32 frame, 12 x f32 pose, then N x 3 f32 (little-endian).
void write_snapshot(const std::string& path, const Snapshot& snap, SnapshotFormat format);
/// Detects the format from the leading magic.
Snapshot read_snapshot(const std::string& path);

std::string snapshot_filename(int frame, SnapshotFormat format);

}  // namespace sandinv::mpm
