#include "rotorlyap/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <ostream>
#include <thread>

#include "rotorlyap/error.hpp"
#include "rotorlyap/format.hpp"
#include "rotorlyap/ingest.hpp"

namespace rotorlyap {

std::optional<TripRule> trip_rule_from_string(std::string_view text) {
  if (text == "none") return TripRule::None;
  if (text == "adjacent") return TripRule::Adjacent;
  return std::nullopt;
}

std::string_view to_string(OracleVerdict verdict) {
  return verdict == OracleVerdict::Stable ? "STABLE" : "UNSTABLE";
}

std::vector<int> cleared_branches(const NetworkModel& model, int bus, TripRule rule) {
  if (rule == TripRule::None) return {};
  std::vector<int> candidates;
  for (const auto& b : model.branches) {
    if (b.from == bus || b.to == bus) candidates.push_back(b.id);
  }
  std::sort(candidates.begin(), candidates.end());
  for (int id : candidates) {
    if (sources_connected(model, {id})) return {id};
  }
  return {};
}

void SweepConfig::validate() const {
  if (clear_times.empty()) throw Error(Errc::Config, "sweep needs at least one clearing time");
  for (double t : clear_times) {
    if (!(t > fault_time)) throw Error(Errc::Config, "every clearing time must come after the fault time");
  }
  if (!(fault_time >= 0.0)) throw Error(Errc::Config, "fault time must be non-negative");
  if (rate_hz <= 0) throw Error(Errc::Config, "rate must be positive");
  if (!(oracle_window > 1.0)) throw Error(Errc::Config, "oracle window must exceed 1 s");
  if (jobs < 1) throw Error(Errc::Config, "jobs must be at least 1");
  assessment.validate();
}

bool SweepRow::agrees() const {
  if (!verdict || !oracle) return false;
  if (*verdict == SystemStatus::Stable) return *oracle == OracleVerdict::Stable;
  if (*verdict == SystemStatus::Unstable) return *oracle == OracleVerdict::Unstable;
  return false;
}

std::vector<SweepCase> sweep_cases(const NetworkModel& model, const SweepConfig& config) {
  std::vector<int> buses = config.buses.empty() ? model.buses : config.buses;
  std::sort(buses.begin(), buses.end());
  buses.erase(std::unique(buses.begin(), buses.end()), buses.end());
  std::vector<double> times = config.clear_times;
  std::sort(times.begin(), times.end());

  std::vector<SweepCase> cases;
  for (int bus : buses) {
    const std::vector<int> removed = cleared_branches(model, bus, config.trip);
    for (double tc : times) cases.push_back({bus, config.fault_time, tc, removed});
  }
  return cases;
}

SweepRow run_case(const NetworkModel& model, const SweepCase& c, const SweepConfig& config) {
  SweepRow row;
  row.config = c;
  try {
    const FaultSpec fault{c.bus, c.fault_time, c.clear_time, c.removed};
    SimulationOptions options;
    options.dt = 1.0 / config.rate_hz;
    options.horizon = c.clear_time + std::max(config.oracle_window, config.assessment.criteria.t_max) + 0.5;
    const SimulationResult sim = simulate(model, fault, options);
    row.oracle = stability_oracle(sim.traces, sim.clear_time, config.oracle_window, sim.diverged);

    EventMeta meta{sim.fault_time, sim.clear_time, std::nullopt};
    const AlignedDataset data = align(sim.traces, meta, {config.rate_hz, 0.5});
    const AssessmentReport report = run_assessment(data, config.assessment);
    for (const auto& p : report.pairs) {
      if (p.swing) row.patterns.push_back(p.swing->pattern);
    }
    row.verdict = report.system.status;
    row.latency = report.system.decision_time;
    if (report.error) row.error = *report.error;
    if (report.system.status == SystemStatus::Unstable) {
      for (const auto& p : report.pairs) {
        if (p.verdict.status == PairStatus::UnstableFirstSwing && p.verdict.decision_time == row.latency) {
          row.first_swing = true;
        }
      }
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

SweepResult run_sweep(const NetworkModel& model, const SweepConfig& config) {
  config.validate();
  model.validate();
  const std::vector<SweepCase> cases = sweep_cases(model, config);
  SweepResult result;
  result.rows.resize(cases.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) result.rows[i] = run_case(model, cases[i], config);
  };
  const auto n = static_cast<std::size_t>(config.jobs);
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < std::min(n, cases.size()); ++k) pool.emplace_back(worker);
  }
  return result;
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

constexpr SwingPattern kPatterns[] = {SwingPattern::I,  SwingPattern::II, SwingPattern::III,
                                      SwingPattern::IV, SwingPattern::V,  SwingPattern::VI};

}  // namespace

void write_sweep_rows(std::ostream& out, const SweepResult& result) {
  out << "bus,fault_time,clear_time,removed,patterns,verdict,oracle,agree,latency_s,first_swing,error\n";
  for (const auto& r : result.rows) {
    std::string removed, patterns;
    for (int id : r.config.removed) removed += (removed.empty() ? "" : ";") + std::to_string(id);
    for (auto p : r.patterns) patterns += (patterns.empty() ? "" : ";") + std::string(to_string(p));
    out << r.config.bus << ',' << format_number(r.config.fault_time) << ',' << format_number(r.config.clear_time)
        << ',' << removed << ',' << patterns << ',' << (r.verdict ? to_string(*r.verdict) : "") << ','
        << (r.oracle ? to_string(*r.oracle) : "") << ',' << (r.agrees() ? 1 : 0) << ','
        << (r.latency ? format_number(*r.latency) : "") << ',' << (r.first_swing ? 1 : 0) << ','
        << csv_field(r.error.value_or("")) << '\n';
  }
}

void write_sweep_summary(std::ostream& out, const SweepResult& result) {
  struct Tally {
    std::size_t cases = 0, agree = 0, undetermined = 0, errors = 0;
    std::map<SwingPattern, std::size_t> patterns;
  };
  std::map<double, Tally> by_time;
  Tally total;
  for (const auto& r : result.rows) {
    for (Tally* t : {&by_time[r.config.clear_time], &total}) {
      ++t->cases;
      if (r.agrees()) ++t->agree;
      if (r.verdict && (*r.verdict == SystemStatus::Undetermined || *r.verdict == SystemStatus::Pending)) {
        ++t->undetermined;
      }
      if (!r.verdict) ++t->errors;
      for (auto p : r.patterns) ++t->patterns[p];
    }
  }

  out << "clear_time,cases";
  for (auto p : kPatterns) out << ',' << to_string(p);
  out << ",undetermined,errors,agree,success_rate\n";
  auto line = [&](const std::string& label, const Tally& t) {
    out << label << ',' << t.cases;
    for (auto p : kPatterns) out << ',' << (t.patterns.count(p) ? t.patterns.at(p) : 0);
    const double rate = t.cases ? static_cast<double>(t.agree) / static_cast<double>(t.cases) : 0.0;
    out << ',' << t.undetermined << ',' << t.errors << ',' << t.agree << ',' << format_number(rate) << '\n';
  };
  for (const auto& [tc, t] : by_time) line(format_number(tc), t);
  line("total", total);
}

}  // namespace rotorlyap
