#include "rotorlyap/swing.hpp"

#include <algorithm>
#include <cmath>

#include "rotorlyap/error.hpp"

namespace rotorlyap {

std::string_view to_string(SwingPattern pattern) {
  switch (pattern) {
    case SwingPattern::I: return "I";
    case SwingPattern::II: return "II";
    case SwingPattern::III: return "III";
    case SwingPattern::IV: return "IV";
    case SwingPattern::V: return "V";
    case SwingPattern::VI: return "VI";
    case SwingPattern::Undetermined: return "UNDETERMINED";
  }
  return "UNDETERMINED";
}

std::optional<SwingPattern> swing_pattern_from_string(std::string_view text) {
  for (auto p : {SwingPattern::I, SwingPattern::II, SwingPattern::III, SwingPattern::IV, SwingPattern::V,
                 SwingPattern::VI, SwingPattern::Undetermined}) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

void SwingConfig::validate() const {
  if (confirm_window < 4) throw Error(Errc::Config, "confirmation window must be at least 4 samples");
  if (peak_halfwidth < 1) throw Error(Errc::Config, "peak half-width must be at least 1 sample");
  if (!(speed_tol_rel >= 0.0) || !(speed_tol_abs > 0.0) || !(decel_rel >= 0.0)) {
    throw Error(Errc::Config, "classifier tolerances must be non-negative");
  }
  if (!(t_max > 0.0)) throw Error(Errc::Config, "t_max must be positive");
}

SwingClassifier::SwingClassifier(double dt, SwingConfig config) : dt_(dt), cfg_(config) {
  if (!(dt > 0.0)) throw Error(Errc::Config, "classifier sample period must be positive");
  cfg_.validate();
}

std::optional<SwingDecision> SwingClassifier::push(double v) {
  if (decision_) return std::nullopt;
  if (!std::isfinite(v)) throw Error(Errc::Input, "non-finite relative speed sample");
  v_.push_back(v);

  if (v_.size() == 1) {
    v0_ = v;
    if (v0_ < 0.0) throw Error(Errc::Input, "initial relative speed must be oriented non-negative");
    eps_v_ = std::max(cfg_.speed_tol_rel * v0_, cfg_.speed_tol_abs);
    if (v0_ < eps_v_) throw Error(Errc::RefusedPair, "initial relative speed is below the speed tolerance");
    return std::nullopt;
  }

  const auto nc = static_cast<std::size_t>(cfg_.confirm_window);
  if (branch_ == Branch::Unknown) {
    if (v_.size() == nc + 1) choose_branch();
  }
  if (branch_ != Branch::Unknown) {
    while (!decision_ && processed_ < v_.size()) process(processed_++);
  }
  if (decision_) return decision_;

  if (static_cast<double>(v_.size() - 1) * dt_ > cfg_.t_max) {
    throw Error(Errc::Timeout, "no swing pattern decided within t_max");
  }
  return std::nullopt;
}

void SwingClassifier::choose_branch() {
  // Least-squares slope of v over the confirmation window.
  const std::size_t n = v_.size();
  const double mean_k = 0.5 * static_cast<double>(n - 1);
  double mean_v = 0.0;
  for (double x : v_) mean_v += x;
  mean_v /= static_cast<double>(n);
  double cov = 0.0;
  for (std::size_t k = 0; k < n; ++k) cov += (static_cast<double>(k) - mean_k) * (v_[k] - mean_v);

  if (!(cov > 0.0)) {
    branch_ = Branch::Decreasing;
    min_scan_.emplace(ExtremumKind::Minimum, 1, cfg_.peak_halfwidth);
    return;
  }

  // Savitzky-Golay 5-point second derivative at every centred position.
  const double window = cfg_.confirm_window * dt_;
  const double eps_a = cfg_.decel_rel * v0_ / (window * window);
  bool decelerating = false;
  for (std::size_t c = 2; c + 2 < n; ++c) {
    const double accel_rate = (2.0 * v_[c - 2] - v_[c - 1] - 2.0 * v_[c] - v_[c + 1] + 2.0 * v_[c + 2]) /
                              (7.0 * dt_ * dt_);
    if (accel_rate < -eps_a) decelerating = true;
  }
  if (!decelerating) {
    branch_ = Branch::Increasing;
    decide(SwingPattern::I, 1);
    return;
  }
  branch_ = Branch::Decelerating;
  max_scan_.emplace(ExtremumKind::Maximum, 1, cfg_.peak_halfwidth);
}

void SwingClassifier::process(std::size_t j) {
  const std::span<const double> seen(v_.data(), j + 1);
  const double low = -v0_ + eps_v_;
  const double high = v0_ - eps_v_;

  if (branch_ == Branch::Decreasing) {
    if (v_[j] <= low) return decide(SwingPattern::III, j);
    if (v_[j] < high) armed_ = true;
    if ((armed_ && v_[j] >= high) || v_[j] >= v0_ + eps_v_) return decide(SwingPattern::II, j);

    if (!minimum_ && min_scan_->advance(seen)) {
      const std::size_t m = *min_scan_->found();
      if (v_[m] > low) {
        minimum_ = m;
        max_scan_.emplace(ExtremumKind::Maximum, m + 1, cfg_.peak_halfwidth);
      }
    }
    if (minimum_ && max_scan_->advance(seen)) {
      if (v_[*max_scan_->found()] < high) return decide(SwingPattern::IV, *minimum_);
    }
    return;
  }

  if (branch_ == Branch::Decelerating) {
    if (!peak_ && max_scan_->advance(seen)) {
      peak_ = max_scan_->found();
      cross_from_ = *peak_ + 1;
      min_scan_.emplace(ExtremumKind::Minimum, *peak_ + 1, cfg_.peak_halfwidth);
    }
    if (!peak_) return;
    for (; cross_from_ <= j; ++cross_from_) {
      if (v_[cross_from_] <= low) return decide(SwingPattern::V, cross_from_);
    }
    if (min_scan_->advance(seen)) {
      const std::size_t m = *min_scan_->found();
      if (v_[m] > low) return decide(SwingPattern::VI, m);
    }
  }
}

void SwingClassifier::decide(SwingPattern pattern, std::size_t w) {
  decision_ = SwingDecision{pattern, std::max<std::size_t>(w, 1), v_.size() - 1};
}

SwingDecision classify_swing(std::span<const double> rel_speed, double dt, const SwingConfig& config) {
  SwingClassifier classifier(dt, config);
  for (double v : rel_speed) {
    if (auto d = classifier.push(v)) return *d;
  }
  throw Error(Errc::Timeout, "relative speed series ended before a swing pattern was decided");
}

DistanceSeries distance_series(std::span<const double> rel_angle, std::size_t w) {
  if (w < 1 || rel_angle.size() <= w) throw Error(Errc::Input, "distance series needs 1 <= w < series length");
  DistanceSeries out;
  out.d.resize(rel_angle.size() - w);
  for (std::size_t j = 0; j < out.d.size(); ++j) out.d[j] = std::abs(rel_angle[j + w] - rel_angle[j]);
  return out;
}

std::size_t find_mle_start(SwingPattern pattern, std::size_t w, const DistanceSeries& d, double dt,
                           const SwingConfig& config) {
  switch (pattern) {
    case SwingPattern::I:
    case SwingPattern::II:
      return w;
    case SwingPattern::Undetermined:
      throw Error(Errc::Input, "MLE start needs a decided swing pattern");
    default:
      break;
  }
  const auto horizon = static_cast<std::size_t>(std::floor(config.t_max / dt + 1e-9));
  const std::size_t usable = horizon > w ? std::min(d.d.size(), horizon - w + 1) : 0;
  const auto j_star = first_extremum(std::span<const double>(d.d.data(), usable), ExtremumKind::Maximum, 1,
                                     config.peak_halfwidth);
  if (!j_star) throw Error(Errc::Timeout, "distance series has no local maximum within t_max");
  return w + *j_star;
}

}  // namespace rotorlyap
