#pragma once

#include <cstddef>
#include <vector>

namespace rotorlyap {

/// Uniformly sampled rotor angle (rad) and speed deviation (rad/s) of one
/// machine. Sample k is at t0 + k * dt.
struct GeneratorTrace {
  int id = 0;
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> angles;
  std::vector<double> speeds;

  std::size_t size() const { return angles.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double end_time() const { return time(size() - 1); }

  /// Throws Error{Input} if lengths differ, fewer than 2 samples, dt <= 0 or
  /// any value is non-finite.
  void validate() const;
};

}  // namespace rotorlyap
