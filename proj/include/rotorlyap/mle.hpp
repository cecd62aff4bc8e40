#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <vector>

#include "rotorlyap/sdgp.hpp"
#include "rotorlyap/swing.hpp"

namespace rotorlyap {

inline constexpr double kDistanceFloor = 1e-12;  // rad

/// Natural log of a trajectory distance, clamped below at kDistanceFloor.
double log_distance(double d);

/// Growing-window least-squares fit of L = lambda * t + C.
///
/// Internally the regressor is (t - origin, 1) with origin the first fitted
/// instant; intercept() and covariance() are mapped back to absolute time.
class RlsState {
 public:
  double lambda() const { return estimate_(0); }
  double intercept() const { return estimate_(1) - estimate_(0) * origin_; }
  /// (X^T X)^{-1} for absolute-time rows (t, 1).
  Eigen::Matrix2d covariance() const;
  /// Covariance in the shifted coordinates actually used for the updates.
  const Eigen::Matrix2d& shifted_covariance() const { return p_; }
  std::size_t updates() const { return k_; }
  double residual_sum() const { return residual_sum_; }
  double last_time() const { return last_time_; }
  double time_origin() const { return origin_; }

 private:
  friend RlsState rls_init(double, double, double, double);
  friend RlsState rls_update(const RlsState&, double, double);

  Eigen::Vector2d estimate_ = Eigen::Vector2d::Zero();  // (lambda, intercept at origin)
  Eigen::Matrix2d p_ = Eigen::Matrix2d::Zero();
  double origin_ = 0.0;
  double last_time_ = 0.0;
  std::size_t k_ = 0;
  double residual_sum_ = 0.0;
};

/// Exact two-point fit. Throws Error{SingularInit} when t1 == t0 and
/// Error{Input} for non-finite values or t1 < t0.
RlsState rls_init(double l0, double l1, double t0, double t1);

/// One recursive least-squares step: gain, estimate, then covariance.
/// Throws Error{Input} for non-finite input or t_new not after the last time.
RlsState rls_update(const RlsState& state, double l_new, double t_new);

/// Theiler window and MLE start step chosen from the swing pattern.
struct EstimatorParams {
  std::size_t w = 1;
  std::size_t m_n = 1;
  double dt = 1.0 / 120.0;
  SwingPattern pattern = SwingPattern::Undetermined;
  std::size_t decided_at = 0;

  /// Throws Error{Input} unless w >= 1, m_n >= w and dt > 0.
  void validate() const;
};

struct MleSeries {
  std::vector<double> times;    // s after sample 0
  std::vector<double> lambdas;  // 1/s
};

/// Streaming MLE: feed d_{(m_n - w) + i} for i = 0, 1, ...; point i sits at
/// (m_n + i) * dt. Returns lambda from the second point on.
class MleEstimator {
 public:
  MleEstimator(std::size_t m_n, double dt);

  std::optional<double> push(double distance);
  std::size_t points() const { return points_; }
  double last_time() const;
  const std::optional<RlsState>& state() const { return state_; }

 private:
  std::size_t m_n_;
  double dt_;
  std::size_t points_ = 0;
  double first_log_ = 0.0;
  std::optional<RlsState> state_;
};

/// MLE after every absorbed point. `max_points` = 0 means use all data.
MleSeries estimate_stream(const SdgpTrace& trace, const EstimatorParams& params, std::size_t max_points = 0);

}  // namespace rotorlyap
