#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rotorlyap/extremum.hpp"

namespace rotorlyap {

/// Post-fault relative speed morphologies.
///   I   keeps accelerating, no decelerating area
///   II  dips, then returns to v0 and keeps rising
///   III falls to -v0
///   IV  falls to a local minimum above -v0, then oscillates
///   V   decelerated growth, then falls to -v0
///   VI  decelerated growth, then a local minimum above -v0
enum class SwingPattern { I, II, III, IV, V, VI, Undetermined };

std::string_view to_string(SwingPattern pattern);
std::optional<SwingPattern> swing_pattern_from_string(std::string_view text);

struct SwingConfig {
  int confirm_window = 12;       // N_c, samples
  int peak_halfwidth = 6;        // N_p, samples
  double speed_tol_rel = 1e-3;   // eps_v = max(speed_tol_rel * v0, speed_tol_abs)
  double speed_tol_abs = 1e-6;   // rad/s
  double decel_rel = 0.02;       // eps_a = decel_rel * v0 / (N_c dt)^2
  double t_max = 10.0;           // s

  void validate() const;
};

struct SwingDecision {
  SwingPattern pattern = SwingPattern::Undetermined;
  std::size_t w = 0;           // Theiler window, samples
  std::size_t decided_at = 0;  // sample index at which the pattern became decidable
};

/// Streaming pattern automaton fed with the oriented relative speed, sample 0
/// being the clearing instant. Emits a decision once.
class SwingClassifier {
 public:
  explicit SwingClassifier(double dt, SwingConfig config = {});

  /// Returns the decision on the sample that makes it decidable, otherwise
  /// nothing. Throws Error{RefusedPair} when v0 is below the speed tolerance,
  /// Error{Input} for a negative or non-finite first sample and
  /// Error{Timeout} once t_max passes without a decision.
  std::optional<SwingDecision> push(double v);

  const std::optional<SwingDecision>& decision() const { return decision_; }
  std::size_t samples() const { return v_.size(); }
  double speed_tolerance() const { return eps_v_; }

 private:
  enum class Branch { Unknown, Decreasing, Increasing, Decelerating };

  void choose_branch();
  void process(std::size_t j);
  void decide(SwingPattern pattern, std::size_t w);

  double dt_;
  SwingConfig cfg_;
  std::vector<double> v_;
  double v0_ = 0.0;
  double eps_v_ = 0.0;
  Branch branch_ = Branch::Unknown;
  std::size_t processed_ = 1;  // next sample index to process
  bool armed_ = false;         // decreasing branch has dropped below v0

  std::optional<ExtremumScanner> min_scan_;
  std::optional<ExtremumScanner> max_scan_;
  std::optional<std::size_t> minimum_;
  std::optional<std::size_t> peak_;
  std::size_t cross_from_ = 1;

  std::optional<SwingDecision> decision_;
};

/// Runs the automaton over a whole series.
SwingDecision classify_swing(std::span<const double> rel_speed, double dt, const SwingConfig& config = {});

struct DistanceSeries {
  std::vector<double> d;  // d_j = |theta_{j+w} - theta_j|
  std::size_t valid_from = 0;
};

/// Throws Error{Input} unless rel_angle.size() > w >= 1.
DistanceSeries distance_series(std::span<const double> rel_angle, std::size_t w);

/// MLE start step m_n: w for patterns I-II, w + j* for III-VI where j* is
/// the first confirmed interior local maximum of d. Throws Error{Timeout}
/// when d has no such maximum within t_max.
std::size_t find_mle_start(SwingPattern pattern, std::size_t w, const DistanceSeries& d, double dt,
                           const SwingConfig& config = {});

}  // namespace rotorlyap
