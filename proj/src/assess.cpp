#include "rotorlyap/assess.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "rotorlyap/error.hpp"

namespace rotorlyap {

std::string_view to_string(PairStatus status) {
  switch (status) {
    case PairStatus::Pending: return "PENDING";
    case PairStatus::UnstableFirstSwing: return "UNSTABLE_FIRST_SWING";
    case PairStatus::UnstableMultiSwing: return "UNSTABLE_MULTI_SWING";
    case PairStatus::Stable: return "STABLE";
    case PairStatus::UndeterminedTimeout: return "UNDETERMINED_TIMEOUT";
    case PairStatus::Skipped: return "SKIPPED";
  }
  return "PENDING";
}

std::string_view to_string(SystemStatus status) {
  switch (status) {
    case SystemStatus::Pending: return "PENDING";
    case SystemStatus::Stable: return "STABLE";
    case SystemStatus::Unstable: return "UNSTABLE";
    case SystemStatus::Undetermined: return "UNDETERMINED";
  }
  return "PENDING";
}

bool is_unstable(PairStatus status) {
  return status == PairStatus::UnstableFirstSwing || status == PairStatus::UnstableMultiSwing;
}

void CriteriaConfig::validate() const {
  if (trend_samples < 3) throw Error(Errc::Config, "trend test needs at least 3 MLE samples");
  if (peak_halfwidth < 1) throw Error(Errc::Config, "peak half-width must be at least 1 sample");
  if (!(t_max > 0.0)) throw Error(Errc::Config, "t_max must be positive");
}

PairAssessor::PairAssessor(GeneratorPair pair, CriteriaConfig config)
    : cfg_(config), peak_scan_(ExtremumKind::Maximum, 1, config.peak_halfwidth) {
  cfg_.validate();
  verdict_.pair = pair;
}

namespace {

double ls_slope(std::span<const double> t, std::span<const double> y) {
  const auto n = static_cast<double>(t.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    mt += t[k];
    my += y[k];
  }
  mt /= n;
  my /= n;
  double sty = 0.0, stt = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    sty += (t[k] - mt) * (y[k] - my);
    stt += (t[k] - mt) * (t[k] - mt);
  }
  return stt > 0.0 ? sty / stt : 0.0;
}

}  // namespace

PairStatus PairAssessor::push(double lambda, double t, std::optional<double> now) {
  if (verdict_.status != PairStatus::Pending) return verdict_.status;
  if (!std::isfinite(lambda) || !std::isfinite(t)) throw Error(Errc::Input, "non-finite MLE sample");
  if (!times_.empty() && !(t > times_.back())) throw Error(Errc::Input, "MLE samples must be time ordered");
  const double when = std::max(t, now.value_or(t));
  lambdas_.push_back(lambda);
  times_.push_back(t);

  const auto nt = static_cast<std::size_t>(cfg_.trend_samples);
  if (lambdas_.size() < nt) return verdict_.status;

  if (!trend_checked_) {
    trend_checked_ = true;
    const std::span<const double> head(lambdas_.data(), nt);
    const double slope = ls_slope(std::span<const double>(times_.data(), nt), head);
    if (slope > 0.0 && head.back() > head.front()) {
      conclude(PairStatus::UnstableFirstSwing, when);
      return verdict_.status;
    }
  }

  if (auto peak = peak_scan_.advance(lambdas_)) {
    verdict_.peak_lambda = lambdas_[*peak];
    conclude(lambdas_[*peak] > 0.0 ? PairStatus::UnstableMultiSwing : PairStatus::Stable, when);
    return verdict_.status;
  }
  if (when > cfg_.t_max) conclude(PairStatus::UndeterminedTimeout, when);
  return verdict_.status;
}

void PairAssessor::expire(double now) {
  if (verdict_.status == PairStatus::Pending) conclude(PairStatus::UndeterminedTimeout, now);
}

void PairAssessor::skip(double now) {
  if (verdict_.status == PairStatus::Pending) conclude(PairStatus::Skipped, now);
}

void PairAssessor::conclude(PairStatus status, double when) {
  verdict_.status = status;
  verdict_.decision_time = when;
}

SystemVerdict aggregate(std::span<const PairVerdict> verdicts) {
  SystemVerdict out;
  out.pairs.assign(verdicts.begin(), verdicts.end());

  bool any_assessable = false, any_pending = false, any_timeout = false;
  std::optional<double> first_unstable, last_time;
  for (const auto& v : verdicts) {
    if (v.status == PairStatus::Skipped) continue;
    any_assessable = true;
    if (is_unstable(v.status)) {
      const double t = v.decision_time.value_or(0.0);
      if (!first_unstable || t < *first_unstable) first_unstable = t;
    } else if (v.status == PairStatus::Pending) {
      any_pending = true;
    } else if (v.status == PairStatus::UndeterminedTimeout) {
      any_timeout = true;
    }
    if (v.decision_time && (!last_time || *v.decision_time > *last_time)) last_time = v.decision_time;
  }
  if (!any_assessable) throw Error(Errc::NoAssessablePair, "no assessable generator pair");

  if (first_unstable) {
    out.status = SystemStatus::Unstable;
    out.decision_time = first_unstable;
  } else if (any_pending) {
    out.status = SystemStatus::Pending;
  } else if (any_timeout) {
    out.status = SystemStatus::Undetermined;
    out.decision_time = last_time;
  } else {
    out.status = SystemStatus::Stable;
    out.decision_time = last_time;
  }
  return out;
}

void AssessmentConfig::set_t_max(double seconds) {
  swing.t_max = seconds;
  criteria.t_max = seconds;
}

void AssessmentConfig::validate() const {
  sdgp.validate();
  swing.validate();
  criteria.validate();
}

PairMonitor::PairMonitor(const SdgpTrace& trace, const AssessmentConfig& config)
    : trace_(trace), cfg_(config), classifier_(trace.dt, config.swing), assessor_(trace.pair, config.criteria) {}

void PairMonitor::push(std::size_t i) {
  if (done()) return;
  if (i != seen_ || i >= trace_.rel_speed.size()) throw Error(Errc::Input, "pair samples must be pushed in order");
  ++seen_;
  try {
    step(i);
  } catch (const Error& e) {
    if (e.code() == Errc::RefusedPair) {
      assessor_.skip(static_cast<double>(i) * trace_.dt);
      note_ = e.what();
    } else if (e.code() == Errc::Timeout) {
      assessor_.expire(static_cast<double>(i) * trace_.dt);
      note_ = e.what();
    } else {
      throw;
    }
  }
  if (!done() && static_cast<double>(i) * trace_.dt > cfg_.criteria.t_max) {
    assessor_.expire(static_cast<double>(i) * trace_.dt);
    if (!note_) note_ = "no decision within t_max";
  }
}

void PairMonitor::step(std::size_t i) {
  const double now = static_cast<double>(i) * trace_.dt;
  if (!swing_) {
    swing_ = classifier_.push(trace_.rel_speed[i]);
    if (!swing_) return;
  }
  const std::size_t w = swing_->w;

  // Distances d_j need theta up to j + w.
  while (d_.size() + w <= i) {
    const std::size_t j = d_.size();
    d_.push_back(std::abs(trace_.rel_angle[j + w] - trace_.rel_angle[j]));
  }

  if (!m_n_) {
    if (swing_->pattern == SwingPattern::I || swing_->pattern == SwingPattern::II) {
      m_n_ = w;
    } else {
      if (!d_peak_) d_peak_.emplace(ExtremumKind::Maximum, 1, cfg_.swing.peak_halfwidth);
      if (auto j_star = d_peak_->advance(d_)) m_n_ = w + *j_star;
    }
    if (!m_n_) return;
    estimator_.emplace(*m_n_, trace_.dt);
  }

  const std::size_t offset = *m_n_ - w;
  while (!done() && offset + fed_ < d_.size()) {
    const double distance = d_[offset + fed_++];
    if (auto lambda = estimator_->push(distance)) {
      const double t = estimator_->last_time();
      mle_.times.push_back(t);
      mle_.lambdas.push_back(*lambda);
      assessor_.push(*lambda, t, now);
    }
  }
}

void PairMonitor::finish() {
  if (done()) return;
  const double end = seen_ == 0 ? 0.0 : static_cast<double>(seen_ - 1) * trace_.dt;
  assessor_.expire(end);
  note_ = "data ended before a decision";
}

AssessmentReport run_assessment(const AlignedDataset& data, const AssessmentConfig& config) {
  config.validate();
  AssessmentReport report;
  report.rate_hz = data.rate_hz;

  const SdgpSelection selection = identify_sdgp(data, config.sdgp);
  if (selection.warning) report.warnings.push_back(*selection.warning);

  std::vector<PairVerdict> verdicts;
  for (const auto& pair : selection.pairs) {
    PairMonitor monitor(build_pair_trace(data, pair), config);
    for (std::size_t i = 0; i < data.length() && !monitor.done(); ++i) monitor.push(i);
    monitor.finish();

    PairReport pr;
    pr.pair = pair;
    pr.sign_flipped = monitor.trace().sign_flipped;
    pr.v0 = monitor.trace().v0;
    pr.swing = monitor.swing();
    pr.m_n = monitor.mle_start();
    pr.verdict = monitor.verdict();
    pr.note = monitor.note();
    pr.mle = monitor.mle();
    pr.distances = monitor.distances();
    verdicts.push_back(pr.verdict);
    report.pairs.push_back(std::move(pr));
  }

  try {
    report.system = aggregate(verdicts);
  } catch (const Error& e) {
    if (e.code() != Errc::NoAssessablePair) throw;
    report.system.status = SystemStatus::Undetermined;
    report.system.pairs = verdicts;
    report.error = e.what();
  }
  return report;
}

namespace {

nlohmann::json optional_number(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

}  // namespace

std::string report_to_json(const AssessmentReport& report, int indent) {
  using nlohmann::json;
  json root;
  root["system"] = {{"status", to_string(report.system.status)},
                    {"decision_time_s", optional_number(report.system.decision_time)}};
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    json j;
    j["severe"] = p.pair.severe;
    j["least"] = p.pair.least;
    j["sign_flipped"] = p.sign_flipped;
    j["v0"] = p.v0;
    j["pattern"] = p.swing ? json(to_string(p.swing->pattern)) : json(nullptr);
    j["w"] = p.swing ? json(p.swing->w) : json(nullptr);
    j["m_n"] = p.m_n ? json(*p.m_n) : json(nullptr);
    j["status"] = to_string(p.verdict.status);
    j["decision_time_s"] = optional_number(p.verdict.decision_time);
    j["peak_lambda"] = optional_number(p.verdict.peak_lambda);
    j["mle_samples"] = p.mle.lambdas.size();
    j["note"] = p.note ? json(*p.note) : json(nullptr);
    pairs.push_back(std::move(j));
  }
  root["pairs"] = std::move(pairs);
  root["warnings"] = report.warnings;
  root["error"] = report.error ? json(*report.error) : json(nullptr);
  return root.dump(indent);
}

int exit_code(SystemStatus status) {
  switch (status) {
    case SystemStatus::Stable: return 0;
    case SystemStatus::Unstable: return 2;
    case SystemStatus::Undetermined:
    case SystemStatus::Pending: return 3;
  }
  return 3;
}

}  // namespace rotorlyap
