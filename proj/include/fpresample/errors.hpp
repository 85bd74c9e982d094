#pragma once

#include <stdexcept>
#include <string>

namespace fpresample {

/// An iterative numeric procedure failed to reach its target (calibration
/// divergence, rejection-loop exhaustion, excessive replicate failures).
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A conditioning cell required by a computation holds no usable data.
class DegenerateCell : public std::runtime_error {
 public:
  explicit DegenerateCell(const std::string& cell, const std::string& what)
      : std::runtime_error("degenerate cell '" + cell + "': " + what), cell_(cell) {}
  const std::string& cell() const { return cell_; }

 private:
  std::string cell_;
};

/// Scenario/config file problems, reported before any simulation starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fpresample
