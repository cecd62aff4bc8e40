#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rotorlyap/assess.hpp"
#include "rotorlyap/ingest.hpp"
#include "rotorlyap/network.hpp"
#include "rotorlyap/swing.hpp"

namespace testsupport {

namespace rl = rotorlyap;

inline std::string data_path(const std::string& name) { return std::string(ROTORLYAP_DATA_DIR) + "/" + name; }

inline rl::NetworkModel network_from(const std::string& text) {
  std::istringstream in(text);
  return rl::parse_network(in, "inline");
}

// ---------------------------------------------------------------------------
// Least squares oracle: QR solve of [t 1] * (lambda, c) = L.

struct LineFit {
  double slope;
  double intercept;
};

inline LineFit batch_fit(const std::vector<double>& t, const std::vector<double>& l) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(t.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = t[i];
    x(static_cast<Eigen::Index>(i), 1) = 1.0;
    y(static_cast<Eigen::Index>(i)) = l[i];
  }
  const Eigen::Vector2d e = x.colPivHouseholderQr().solve(y);
  return {e(0), e(1)};
}

// ---------------------------------------------------------------------------
// Relative-speed templates for the six swing morphologies, sampled at 120 Hz
// from the clearing instant.

inline constexpr double kDt = 1.0 / 120.0;
inline constexpr std::size_t kTemplateLength = 1200;

struct Template {
  rl::SwingPattern family;
  std::string label;
  std::vector<double> v;
};

inline std::vector<double> sample(std::size_t n, auto&& f) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = f(static_cast<double>(k) * kDt);
  return v;
}

/// Ten or more parameterizations per family.
inline std::vector<Template> swing_templates() {
  using rl::SwingPattern;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<Template> out;
  auto name = [](const char* fam, double a, double b) {
    std::ostringstream s;
    s << fam << "(" << a << "," << b << ")";
    return s.str();
  };

  // I: accelerating growth, v0 + a t + b t^2.
  for (double v0 : {0.5, 2.0}) {
    for (double a : {0.0, 1.0, 5.0, 20.0, 50.0}) {
      out.push_back({SwingPattern::I, name("I", v0, a),
                     sample(kTemplateLength, [&](double t) { return v0 + a * t + 3.0 * t * t; })});
    }
  }
  // II: dips below v0 and comes back, v0 - a t + b t^2 (back at t = a / b).
  for (double v0 : {1.0, 3.0}) {
    for (double back : {0.3, 0.5, 0.8, 1.2, 2.0}) {
      const double a = 0.8 * v0 / back * 2.0;
      const double b = a / back;
      out.push_back({SwingPattern::II, name("II", v0, back),
                     sample(kTemplateLength, [&](double t) { return v0 - a * t + b * t * t; })});
    }
  }
  // III: undamped or growing oscillation from its crest, reaches -v0.
  for (double f : {0.5, 1.0, 1.5, 2.0}) {
    for (double g : {0.0, 0.5, 2.0}) {
      out.push_back({SwingPattern::III, name("III", f, g), sample(kTemplateLength, [&](double t) {
                       return (1.0 + g * t * t) * std::cos(two_pi * f * t);
                     })});
    }
  }
  // IV: damped oscillation from its crest, minimum above -v0.
  for (double f : {0.5, 1.0, 1.5, 2.0}) {
    for (double s : {0.5, 2.0, 5.0}) {
      out.push_back({SwingPattern::IV, name("IV", f, s), sample(kTemplateLength, [&](double t) {
                       return 1.5 * std::exp(-s * t) * std::cos(two_pi * f * t);
                     })});
    }
  }
  // V and VI: rise with deceleration, crest, then swing down;
  // v = e^{-s t} (cos wt + 3 sin wt) has amplitude sqrt(10) v0.
  for (double f : {0.5, 0.75, 1.0, 1.25, 1.5}) {
    for (double s : {-0.5, 0.0}) {
      out.push_back({SwingPattern::V, name("V", f, s), sample(kTemplateLength, [&](double t) {
                       const double w = two_pi * f;
                       return std::exp(-s * t) * (std::cos(w * t) + 3.0 * std::sin(w * t));
                     })});
    }
  }
  for (double f : {0.5, 0.75, 1.0, 1.25, 1.5}) {
    for (double s : {3.0, 4.0}) {
      out.push_back({SwingPattern::VI, name("VI", f, s), sample(kTemplateLength, [&](double t) {
                       const double w = two_pi * f;
                       return std::exp(-s * t) * (std::cos(w * t) + 3.0 * std::sin(w * t));
                     })});
    }
  }
  return out;
}

/// Exhaustive scan of the sampled series for the Theiler window the family
/// prescribes: first crossing of -v0, first return to v0 or first raw local
/// extremum, with the classifier's crossing tolerance.
inline std::size_t oracle_w(const Template& tp, const rl::SwingConfig& cfg = {}) {
  const auto& v = tp.v;
  const double v0 = v[0];
  const double eps = std::max(cfg.speed_tol_rel * v0, cfg.speed_tol_abs);
  auto first_local_min = [&](std::size_t from) -> std::size_t {
    for (std::size_t j = std::max<std::size_t>(from, 1); j + 1 < v.size(); ++j) {
      if (v[j] < v[j - 1] && v[j] <= v[j + 1]) return j;
    }
    return 0;
  };
  auto first_local_max = [&](std::size_t from) -> std::size_t {
    for (std::size_t j = std::max<std::size_t>(from, 1); j + 1 < v.size(); ++j) {
      if (v[j] > v[j - 1] && v[j] >= v[j + 1]) return j;
    }
    return 0;
  };
  auto first_at_or_below = [&](double level, std::size_t from) -> std::size_t {
    for (std::size_t j = from; j < v.size(); ++j) {
      if (v[j] <= level) return j;
    }
    return 0;
  };

  switch (tp.family) {
    case rl::SwingPattern::I:
      return 1;
    case rl::SwingPattern::II: {
      std::size_t j = 1;
      while (j < v.size() && v[j] >= v0 - eps) ++j;
      while (j < v.size() && v[j] < v0 - eps) ++j;
      return j;
    }
    case rl::SwingPattern::III:
      return first_at_or_below(-v0 + eps, 1);
    case rl::SwingPattern::IV:
      return first_local_min(1);
    case rl::SwingPattern::V:
      return first_at_or_below(-v0 + eps, first_local_max(1));
    case rl::SwingPattern::VI:
      return first_local_min(first_local_max(1));
    default:
      return 0;
  }
}

// ---------------------------------------------------------------------------
// Hand-built MLE curves, three per criterion.

struct MleShape {
  std::string label;
  rl::PairStatus expected;
  std::optional<double> peak;
  std::vector<double> lambdas;
};

inline std::vector<double> fall_rise_fall(double start, double bottom, double peak, std::size_t n_fall,
                                          std::size_t n_rise, std::size_t n_after) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n_fall; ++i) out.push_back(start + (bottom - start) * i / (n_fall - 1.0));
  for (std::size_t i = 1; i <= n_rise; ++i) {
    const double x = static_cast<double>(i) / n_rise;
    out.push_back(bottom + (peak - bottom) * std::sin(0.5 * std::numbers::pi * x));
  }
  for (std::size_t i = 1; i <= n_after; ++i) {
    const double x = static_cast<double>(i) / n_after;
    out.push_back(peak - (peak - bottom) * (1.0 - std::cos(0.5 * std::numbers::pi * x)));
  }
  return out;
}

inline std::vector<MleShape> mle_shapes() {
  using rl::PairStatus;
  std::vector<MleShape> out;
  // Criterion I: increasing from the start.
  {
    std::vector<double> a, b, c;
    for (int i = 0; i < 60; ++i) {
      a.push_back(0.50 + 0.05 * i);
      b.push_back(-1.0 + 2.0 * (1.0 - std::exp(-0.05 * i)));
      c.push_back(0.2 + 0.01 * i + 0.02 * std::sin(0.9 * i));
    }
    out.push_back({"rising ramp", PairStatus::UnstableFirstSwing, std::nullopt, a});
    out.push_back({"saturating rise", PairStatus::UnstableFirstSwing, std::nullopt, b});
    out.push_back({"jittered rise", PairStatus::UnstableFirstSwing, std::nullopt, c});
  }
  // Criterion II: falls, then its first peak is positive.
  out.push_back({"dip to -0.2, peak +0.15", PairStatus::UnstableMultiSwing, 0.15, fall_rise_fall(0.3, -0.2, 0.15, 30, 30, 30)});
  out.push_back({"deep dip, peak +2", PairStatus::UnstableMultiSwing, 2.0, fall_rise_fall(-1.0, -15.0, 2.0, 25, 40, 30)});
  out.push_back({"shallow dip, peak +0.01", PairStatus::UnstableMultiSwing, 0.01, fall_rise_fall(0.0, -0.5, 0.01, 40, 20, 30)});
  // Criterion III: falls, then its first peak is zero or negative.
  out.push_back({"dip, peak -0.05", PairStatus::Stable, -0.05, fall_rise_fall(0.3, -1.0, -0.05, 30, 30, 30)});
  out.push_back({"deep dip, peak -3", PairStatus::Stable, -3.0, fall_rise_fall(-2.0, -20.0, -3.0, 25, 40, 30)});
  out.push_back({"dip, peak exactly 0", PairStatus::Stable, 0.0, fall_rise_fall(1.0, -1.0, 0.0, 30, 30, 30)});
  return out;
}

/// Runs one MLE curve through the pair criteria at 120 Hz.
inline rl::PairVerdict judge(const std::vector<double>& lambdas, const rl::CriteriaConfig& cfg = {}) {
  rl::PairAssessor assessor({1, 2}, cfg);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (assessor.push(lambdas[i], static_cast<double>(i + 2) * kDt) != rl::PairStatus::Pending) break;
  }
  return assessor.verdict();
}

// ---------------------------------------------------------------------------
// Criterion IV truth table written out as rules over the status tuple.

struct ExpectedSystem {
  bool error = false;
  rl::SystemStatus status = rl::SystemStatus::Pending;
};

inline ExpectedSystem criterion_iv(const std::vector<rl::PairStatus>& s) {
  using rl::PairStatus;
  auto count = [&](auto pred) {
    std::size_t n = 0;
    for (auto x : s) n += pred(x) ? 1 : 0;
    return n;
  };
  const std::size_t skipped = count([](PairStatus x) { return x == PairStatus::Skipped; });
  const std::size_t unstable = count([](PairStatus x) {
    return x == PairStatus::UnstableFirstSwing || x == PairStatus::UnstableMultiSwing;
  });
  const std::size_t pending = count([](PairStatus x) { return x == PairStatus::Pending; });
  const std::size_t timeout = count([](PairStatus x) { return x == PairStatus::UndeterminedTimeout; });
  const std::size_t stable = count([](PairStatus x) { return x == PairStatus::Stable; });
  if (skipped == s.size()) return {true, rl::SystemStatus::Pending};
  if (unstable > 0) return {false, rl::SystemStatus::Unstable};
  if (pending > 0) return {false, rl::SystemStatus::Pending};
  if (timeout > 0) return {false, rl::SystemStatus::Undetermined};
  if (stable + skipped == s.size()) return {false, rl::SystemStatus::Stable};
  return {true, rl::SystemStatus::Pending};
}

inline constexpr rl::PairStatus kAllStatuses[] = {
    rl::PairStatus::Pending, rl::PairStatus::UnstableFirstSwing,  rl::PairStatus::UnstableMultiSwing,
    rl::PairStatus::Stable,  rl::PairStatus::UndeterminedTimeout, rl::PairStatus::Skipped,
};

// ---------------------------------------------------------------------------
// Equal-area oracle for a lossless SMIB whose fault-on transfer is zero.

struct EqualArea {
  double delta0;
  double delta_cr;
  double t_cr;
};

inline EqualArea equal_area(double m, double pm, double pmax_pre, double pmax_post) {
  const double d0 = std::asin(pm / pmax_pre);
  const double dmax = std::numbers::pi - std::asin(pm / pmax_post);
  const double cos_cr = (pm * (dmax - d0) + pmax_post * std::cos(dmax)) / pmax_post;
  const double dcr = std::acos(cos_cr);
  // Fault-on: M d'' = Pm, so delta = d0 + Pm t^2 / (2M).
  return {d0, dcr, std::sqrt(2.0 * m * (dcr - d0) / pm)};
}

}  // namespace testsupport
