#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sandinv {

/// Base for every error raised by the library. what() is a single line.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// NaN state, escaped particle or inverted deformation gradient.
class SimulationBlowup : public Error {
 public:
  static constexpr std::size_t kNoParticle = static_cast<std::size_t>(-1);

  SimulationBlowup(const std::string& reason, int frame, std::size_t particle)
      : Error(format(reason, frame, particle)),
        reason_(reason),
        frame_(frame),
        particle_(particle) {}

  const std::string& reason() const { return reason_; }
  int frame() const { return frame_; }
  std::size_t particle() const { return particle_; }

  /// Same error re-tagged with the frame it happened in.
  SimulationBlowup at_frame(int frame) const { return {reason_, frame, particle_}; }

 private:
  static std::string format(const std::string& reason, int frame, std::size_t particle) {
    std::string msg = "simulation blowup: " + reason;
    if (frame >= 0) msg += " (frame " + std::to_string(frame) + ")";
    if (particle != kNoParticle) msg += " (particle " + std::to_string(particle) + ")";
    return msg;
  }

  std::string reason_;
  int frame_;
  std::size_t particle_;
};

}  // namespace sandinv
