#include "rotorlyap/extremum.hpp"

#include <algorithm>

namespace rotorlyap {

double smoothed_at(std::span<const double> series, std::size_t i) {
  const std::size_t lo = i >= 2 ? i - 2 : 0;
  const std::size_t hi = std::min(series.size() - 1, i + 2);
  double sum = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) sum += series[k];
  return sum / static_cast<double>(hi - lo + 1);
}

ExtremumScanner::ExtremumScanner(ExtremumKind kind, std::size_t first, int halfwidth)
    : kind_(kind),
      first_(std::max<std::size_t>(first, 1)),
      next_(first_),
      halfwidth_(static_cast<std::size_t>(std::max(halfwidth, 1))) {}

bool ExtremumScanner::confirmed(std::span<const double> series, std::size_t j) const {
  const double sign = kind_ == ExtremumKind::Maximum ? 1.0 : -1.0;
  const double centre = sign * smoothed_at(series, j);
  const std::size_t lo = j >= halfwidth_ ? j - halfwidth_ : 0;
  // Strict on the left, non-strict on the right: the first of tied crests wins.
  for (std::size_t i = lo; i < j; ++i) {
    if (!(centre > sign * smoothed_at(series, i))) return false;
  }
  for (std::size_t i = j + 1; i <= j + halfwidth_; ++i) {
    if (!(centre >= sign * smoothed_at(series, i))) return false;
  }
  return true;
}

std::optional<std::size_t> ExtremumScanner::advance(std::span<const double> series) {
  while (!found_ && next_ + halfwidth_ + 2 < series.size()) {
    const std::size_t j = next_++;
    if (!confirmed(series, j)) continue;
    const std::size_t lo = std::max(first_, j >= 2 ? j - 2 : 0);
    const std::size_t hi = std::min(series.size() - 1, j + 2);
    std::size_t best = lo;
    for (std::size_t k = lo + 1; k <= hi; ++k) {
      const bool better = kind_ == ExtremumKind::Maximum ? series[k] > series[best] : series[k] < series[best];
      if (better) best = k;
    }
    found_ = best;
  }
  return found_;
}

std::optional<std::size_t> first_extremum(std::span<const double> series, ExtremumKind kind, std::size_t first,
                                          int halfwidth) {
  ExtremumScanner scanner(kind, first, halfwidth);
  return scanner.advance(series);
}

}  // namespace rotorlyap
