#include "rotorlyap/mle.hpp"

#include <algorithm>
#include <cmath>

#include "rotorlyap/error.hpp"

namespace rotorlyap {

double log_distance(double d) { return std::log(std::max(d, kDistanceFloor)); }

Eigen::Matrix2d RlsState::covariance() const {
  Eigen::Matrix2d a;
  a << 1.0, 0.0, -origin_, 1.0;
  return a * p_ * a.transpose();
}

RlsState rls_init(double l0, double l1, double t0, double t1) {
  if (!std::isfinite(l0) || !std::isfinite(l1) || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw Error(Errc::Input, "RLS initialisation needs finite values");
  }
  if (t1 == t0) throw Error(Errc::SingularInit, "RLS initialisation needs two distinct times");
  if (t1 < t0) throw Error(Errc::Input, "RLS initialisation times must increase");

  const double span = t1 - t0;
  RlsState s;
  s.origin_ = t0;
  s.last_time_ = t1;
  s.estimate_ << (l1 - l0) / span, l0;
  // Inverse of [[span^2, span], [span, 2]] for rows (0, 1) and (span, 1).
  s.p_ << 2.0, -span, -span, span * span;
  s.p_ /= span * span;
  s.k_ = 1;
  return s;
}

RlsState rls_update(const RlsState& state, double l_new, double t_new) {
  if (!std::isfinite(l_new) || !std::isfinite(t_new)) throw Error(Errc::Input, "RLS update needs finite values");
  if (!(t_new > state.last_time_)) throw Error(Errc::Input, "RLS update time must follow the last absorbed time");

  RlsState s = state;
  const Eigen::Vector2d x(t_new - s.origin_, 1.0);
  const Eigen::Vector2d px = s.p_ * x;
  const double denom = 1.0 + x.dot(px);
  const Eigen::Vector2d gain = px / denom;
  const double innovation = l_new - x.dot(s.estimate_);
  s.estimate_ += gain * innovation;
  // P - G x^T P, written with P symmetric so the result stays symmetric.
  s.p_ -= px * px.transpose() / denom;
  s.last_time_ = t_new;
  ++s.k_;
  s.residual_sum_ += innovation * innovation;
  return s;
}

void EstimatorParams::validate() const {
  if (w < 1) throw Error(Errc::Input, "Theiler window must be at least 1 sample");
  if (m_n < w) throw Error(Errc::Input, "MLE start step must not precede the Theiler window");
  if (!(dt > 0.0)) throw Error(Errc::Input, "sample period must be positive");
}

MleEstimator::MleEstimator(std::size_t m_n, double dt) : m_n_(m_n), dt_(dt) {
  if (!(dt > 0.0)) throw Error(Errc::Input, "sample period must be positive");
}

double MleEstimator::last_time() const {
  return points_ == 0 ? 0.0 : static_cast<double>(m_n_ + points_ - 1) * dt_;
}

std::optional<double> MleEstimator::push(double distance) {
  if (!(distance >= 0.0)) throw Error(Errc::Input, "distance must be non-negative");
  const double l = log_distance(distance);
  const double t = static_cast<double>(m_n_ + points_) * dt_;
  ++points_;
  if (points_ == 1) {
    first_log_ = l;
    return std::nullopt;
  }
  if (points_ == 2) {
    state_ = rls_init(first_log_, l, static_cast<double>(m_n_) * dt_, t);
  } else {
    state_ = rls_update(*state_, l, t);
  }
  return state_->lambda();
}

MleSeries estimate_stream(const SdgpTrace& trace, const EstimatorParams& params, std::size_t max_points) {
  params.validate();
  if (trace.rel_angle.size() < params.m_n + 2) {
    throw Error(Errc::Input, "relative angle series too short for the first two fitted points");
  }
  const DistanceSeries d = distance_series(trace.rel_angle, params.w);
  std::size_t first = params.m_n - params.w;
  std::size_t count = d.d.size() - first;
  if (max_points > 0) count = std::min(count, max_points);

  MleEstimator estimator(params.m_n, params.dt);
  MleSeries out;
  for (std::size_t i = 0; i < count; ++i) {
    if (auto lambda = estimator.push(d.d[first + i])) {
      out.times.push_back(estimator.last_time());
      out.lambdas.push_back(*lambda);
    }
  }
  return out;
}

}  // namespace rotorlyap
