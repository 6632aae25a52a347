#pragma once

#include <stdexcept>
#include <string>

namespace loctime {

/// Invalid numeric argument (non-finite, out of range, inconsistent).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A path left the spatial grid. Carries the offending position so the
/// caller can widen the grid and retry.
class GridExceededError : public std::runtime_error {
 public:
  GridExceededError(const std::string& what, double position)
      : std::runtime_error(what), position_(position) {}
  double position() const noexcept { return position_; }

 private:
  double position_;
};

/// Problem size beyond a hard limit (e.g. permutation count).
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed or incomplete experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace loctime
