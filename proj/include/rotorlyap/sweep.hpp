#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rotorlyap/assess.hpp"
#include "rotorlyap/network.hpp"
#include "rotorlyap/simulator.hpp"

namespace rotorlyap {

enum class TripRule {
  None,      // clear the fault without switching anything out
  Adjacent,  // open the lowest-id branch at the faulted bus that keeps sources connected
};

std::optional<TripRule> trip_rule_from_string(std::string_view text);

/// Branches opened at clearing for a fault at `bus` under `rule`.
std::vector<int> cleared_branches(const NetworkModel& model, int bus, TripRule rule);

struct SweepConfig {
  std::vector<int> buses;  // empty: every bus
  std::vector<double> clear_times;
  double fault_time = 0.1;
  TripRule trip = TripRule::Adjacent;
  int rate_hz = 120;
  double oracle_window = 10.0;  // s after clearing simulated for the ground truth
  AssessmentConfig assessment;
  int jobs = 1;

  void validate() const;
};

struct SweepCase {
  int bus = 0;
  double fault_time = 0.0;
  double clear_time = 0.0;
  std::vector<int> removed;
};

struct SweepRow {
  SweepCase config;
  std::vector<SwingPattern> patterns;  // one per assessed pair
  std::optional<SystemStatus> verdict;
  std::optional<OracleVerdict> oracle;
  std::optional<double> latency;  // s after clearing
  bool first_swing = false;       // decided by an initial-trend verdict
  std::optional<std::string> error;

  /// Agreement of a stable/unstable verdict with the oracle; false otherwise.
  bool agrees() const;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // case order: bus ascending, then clearing time
};

std::vector<SweepCase> sweep_cases(const NetworkModel& model, const SweepConfig& config);

/// Simulates, aligns, assesses and checks one case. Failures land in `error`.
SweepRow run_case(const NetworkModel& model, const SweepCase& c, const SweepConfig& config);

/// Runs every case in a pool of `config.jobs` threads; the output order does
/// not depend on the pool size.
SweepResult run_sweep(const NetworkModel& model, const SweepConfig& config);

/// bus,fault_time,clear_time,removed,patterns,verdict,oracle,agree,latency_s,error
void write_sweep_rows(std::ostream& out, const SweepResult& result);

/// Pattern occurrence counts and success rate per clearing time, plus a total.
void write_sweep_summary(std::ostream& out, const SweepResult& result);

std::string_view to_string(OracleVerdict verdict);

}  // namespace rotorlyap
