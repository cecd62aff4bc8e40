#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rotorlyap/extremum.hpp"
#include "rotorlyap/ingest.hpp"
#include "rotorlyap/mle.hpp"
#include "rotorlyap/sdgp.hpp"
#include "rotorlyap/swing.hpp"

namespace rotorlyap {

enum class PairStatus { Pending, UnstableFirstSwing, UnstableMultiSwing, Stable, UndeterminedTimeout, Skipped };
enum class SystemStatus { Pending, Stable, Unstable, Undetermined };

std::string_view to_string(PairStatus status);
std::string_view to_string(SystemStatus status);
bool is_unstable(PairStatus status);

struct CriteriaConfig {
  int trend_samples = 24;  // N_t, MLE samples in the initial-trend test
  int peak_halfwidth = 6;  // N_p
  double t_max = 10.0;     // s after clearing

  void validate() const;
};

struct PairVerdict {
  GeneratorPair pair;
  PairStatus status = PairStatus::Pending;
  std::optional<double> decision_time;  // s after clearing
  std::optional<double> peak_lambda;    // 1/s
};

/// Applies the stability criteria to one pair's MLE stream:
///   increasing at the beginning            -> unstable, first swing
///   decreasing, first peak positive        -> unstable, multi-swing
///   decreasing, first peak zero or below   -> stable
class PairAssessor {
 public:
  explicit PairAssessor(GeneratorPair pair = {}, CriteriaConfig config = {});

  /// Absorbs the MLE sample at time `t`. `now` (>= t) is the stream time at
  /// which the sample became available and is used as the decision time.
  /// Samples after a terminal status are ignored.
  PairStatus push(double lambda, double t, std::optional<double> now = std::nullopt);

  /// Marks a still-pending pair as timed out at `now`.
  void expire(double now);
  /// Marks a still-pending pair as not assessable at `now`.
  void skip(double now);

  const PairVerdict& verdict() const { return verdict_; }
  std::span<const double> lambdas() const { return lambdas_; }

 private:
  void conclude(PairStatus status, double when);

  CriteriaConfig cfg_;
  PairVerdict verdict_;
  std::vector<double> lambdas_;
  std::vector<double> times_;
  bool trend_checked_ = false;
  ExtremumScanner peak_scan_;
};

struct SystemVerdict {
  SystemStatus status = SystemStatus::Pending;
  std::optional<double> decision_time;
  std::vector<PairVerdict> pairs;
};

/// Combines pair verdicts: unstable as soon as any pair is unstable, stable
/// once every assessable pair is stable, undetermined if a pair timed out.
/// Throws Error{NoAssessablePair} if the list is empty or all pairs were skipped.
SystemVerdict aggregate(std::span<const PairVerdict> verdicts);

struct AssessmentConfig {
  SdgpConfig sdgp;
  SwingConfig swing;
  CriteriaConfig criteria;

  /// Sets the decision horizon for both the classifier and the criteria.
  void set_t_max(double seconds);
  void validate() const;
};

/// Online pipeline for one pair: pattern, Theiler window, MLE start, RLS
/// MLE and criteria, fed one aligned sample at a time.
class PairMonitor {
 public:
  PairMonitor(const SdgpTrace& trace, const AssessmentConfig& config);

  void push(std::size_t i);
  /// Ends the stream; a pending pair becomes UNDETERMINED_TIMEOUT.
  void finish();
  bool done() const { return assessor_.verdict().status != PairStatus::Pending; }

  const SdgpTrace& trace() const { return trace_; }
  const std::optional<SwingDecision>& swing() const { return swing_; }
  const std::optional<std::size_t>& mle_start() const { return m_n_; }
  const PairVerdict& verdict() const { return assessor_.verdict(); }
  const MleSeries& mle() const { return mle_; }
  const std::vector<double>& distances() const { return d_; }
  const std::optional<std::string>& note() const { return note_; }

 private:
  void step(std::size_t i);

  SdgpTrace trace_;
  AssessmentConfig cfg_;
  SwingClassifier classifier_;
  PairAssessor assessor_;
  std::optional<SwingDecision> swing_;
  std::vector<double> d_;
  std::optional<ExtremumScanner> d_peak_;
  std::optional<std::size_t> m_n_;
  std::optional<MleEstimator> estimator_;
  std::size_t fed_ = 0;  // distances handed to the estimator
  MleSeries mle_;
  std::optional<std::string> note_;
  std::size_t seen_ = 0;
};

struct PairReport {
  GeneratorPair pair;
  bool sign_flipped = false;
  double v0 = 0.0;
  std::optional<SwingDecision> swing;
  std::optional<std::size_t> m_n;
  PairVerdict verdict;
  std::optional<std::string> note;
  MleSeries mle;
  std::vector<double> distances;
};

struct AssessmentReport {
  SystemVerdict system;
  std::vector<PairReport> pairs;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
  int rate_hz = 120;
};

/// End-to-end assessment of an aligned dataset. SDGP identification errors
/// propagate; per-pair failures are recorded in the report, and the
/// no-assessable-pair condition is reported in `error` with an undetermined
/// system status.
AssessmentReport run_assessment(const AlignedDataset& data, const AssessmentConfig& config = {});

/// {system: {status, decision_time_s}, pairs: [...], warnings, error}
std::string report_to_json(const AssessmentReport& report, int indent = 2);

/// 0 stable, 2 unstable, 3 undetermined or pending.
int exit_code(SystemStatus status);

}  // namespace rotorlyap
