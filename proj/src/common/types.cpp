#include "sandinv/common/types.hpp"

namespace sandinv {

std::array<double, 12> Pose::to_row_major() const {
  std::array<double, 12> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r * 4 + c] = rotation(r, c);
    out[r * 4 + 3] = translation(r);
  }
  return out;
}

Pose Pose::from_row_major(const std::array<double, 12>& values) {
  Pose p;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p.rotation(r, c) = values[r * 4 + c];
    p.translation(r) = values[r * 4 + 3];
  }
  return p;
}

}  // namespace sandinv
