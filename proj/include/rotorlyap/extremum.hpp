#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace rotorlyap {

enum class ExtremumKind { Maximum, Minimum };

/// Centered moving average of width 5, truncated at the series ends.
double smoothed_at(std::span<const double> series, std::size_t i);

/// Online search for the first confirmed local extremum of a growing series.
///
/// Candidate j (>= max(first, 1)) is confirmed once its smoothed value is
/// strictly beyond every smoothed value in [j - halfwidth, j) and at least
/// level with every one in (j, j + halfwidth];
/// that needs raw samples up to j + halfwidth + 2. The reported index is the
/// raw-sample extremum within two samples of j.
class ExtremumScanner {
 public:
  ExtremumScanner(ExtremumKind kind, std::size_t first, int halfwidth = 6);

  /// Checks every candidate whose neighbourhood is complete in `series`.
  std::optional<std::size_t> advance(std::span<const double> series);
  std::optional<std::size_t> found() const { return found_; }

 private:
  bool confirmed(std::span<const double> series, std::size_t j) const;

  ExtremumKind kind_;
  std::size_t first_;
  std::size_t next_;
  std::size_t halfwidth_;
  std::optional<std::size_t> found_;
};

/// Batch form of ExtremumScanner.
std::optional<std::size_t> first_extremum(std::span<const double> series, ExtremumKind kind, std::size_t first = 1,
                                          int halfwidth = 6);

}  // namespace rotorlyap
