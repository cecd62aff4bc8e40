#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rotorlyap/assess.hpp"
#include "rotorlyap/error.hpp"
#include "rotorlyap/format.hpp"
#include "rotorlyap/ingest.hpp"
#include "rotorlyap/network.hpp"
#include "rotorlyap/simulator.hpp"
#include "rotorlyap/sweep.hpp"

namespace rl = rotorlyap;
namespace fs = std::filesystem;

namespace {

struct EventFlags {
  std::string meta_path;
  std::optional<double> fault_time;
  std::optional<double> clear_time;

  void add(CLI::App* cmd) {
    cmd->add_option("--meta", meta_path, "Event metadata JSON (fault_time, clear_time)");
    cmd->add_option("--fault-time", fault_time, "Fault instant, s");
    cmd->add_option("--clear-time", clear_time, "Clearing instant, s");
  }

  rl::EventMeta resolve() const {
    rl::EventMeta meta;
    if (!meta_path.empty()) {
      meta = rl::load_event_meta(meta_path);
    } else if (!clear_time) {
      throw rl::Error(rl::Errc::Io, "event metadata missing: pass --meta or --fault-time/--clear-time");
    }
    if (fault_time) meta.fault_time = *fault_time;
    if (clear_time) meta.clear_time = *clear_time;
    meta.validate();
    return meta;
  }
};

struct AssessFlags {
  int rate = 120;
  double sigma = 0.7;
  double t_max = 10.0;
  double speed_offset = 0.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--rate", rate, "Analysis sample rate, Hz")->check(CLI::PositiveNumber);
    cmd->add_option("--sigma", sigma, "Severity ratio threshold")->check(CLI::Range(1e-12, 1.0));
    cmd->add_option("--t-max", t_max, "Decision horizon after clearing, s")->check(CLI::PositiveNumber);
    cmd->add_option("--speed-offset", speed_offset, "Subtracted from every speed sample, rad/s");
  }

  rl::AssessmentConfig config() const {
    rl::AssessmentConfig cfg;
    cfg.sdgp.sigma = sigma;
    cfg.set_t_max(t_max);
    return cfg;
  }
};

rl::AlignedDataset load_dataset(const std::string& traces_path, const rl::EventMeta& meta, const AssessFlags& flags) {
  const auto traces = rl::load_traces(traces_path, {flags.speed_offset});
  return rl::align(traces, meta, {flags.rate, 0.5});
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rl::Error(rl::Errc::Io, "cannot write " + path);
  return out;
}

/// `base` for a single pair, otherwise `stem_<severe>-<least>.ext`.
std::string pair_path(const std::string& base, const rl::GeneratorPair& pair, std::size_t pair_count) {
  if (pair_count <= 1) return base;
  const fs::path p(base);
  const std::string name =
      p.stem().string() + "_" + std::to_string(pair.severe) + "-" + std::to_string(pair.least) + p.extension().string();
  return (p.parent_path() / name).string();
}

void write_mle_csv(const std::string& path, const rl::MleSeries& mle) {
  auto out = open_output(path);
  out << "t,lambda\n";
  for (std::size_t i = 0; i < mle.lambdas.size(); ++i) {
    out << rl::format_number(mle.times[i]) << ',' << rl::format_number(mle.lambdas[i]) << '\n';
  }
}

void write_distance_csv(const std::string& path, const std::vector<double>& d, double dt) {
  auto out = open_output(path);
  out << "j,t,d\n";
  for (std::size_t j = 0; j < d.size(); ++j) {
    out << j << ',' << rl::format_number(static_cast<double>(j) * dt) << ',' << rl::format_number(d[j]) << '\n';
  }
}

std::vector<double> parse_grid(const std::string& text) {
  // "a:b:step" or a comma list
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0) || b < a) {
      throw rl::Error(rl::Errc::Config, "grid must be start:stop:step with step > 0");
    }
    const auto n = static_cast<long long>(std::floor((b - a) / step + 1e-9));
    for (long long k = 0; k <= n; ++k) out.push_back(std::round((a + static_cast<double>(k) * step) * 1e9) / 1e9);
    return out;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw rl::Error(rl::Errc::Config, "bad grid value '" + item + "'");
    }
  }
  return out;
}

int cmd_simulate(const std::string& network_path, std::optional<int> bus, std::optional<double> t_f,
                 std::optional<double> t_c, const std::vector<int>& open, const std::string& trip, int rate,
                 double horizon, const std::string& out_path, std::string meta_path) {
  const rl::NetworkModel model = rl::load_network(network_path);
  rl::FaultSpec fault = model.fault.value_or(rl::FaultSpec{});
  if (!model.fault && !(bus && t_c)) {
    throw rl::Error(rl::Errc::Config, "no fault in the network file: pass --fault-bus and --clear-time");
  }
  if (bus && *bus != fault.bus) {
    fault.bus = *bus;
    fault.removed_branches.clear();
  }
  if (t_f) fault.fault_time = *t_f;
  if (t_c) fault.clear_time = *t_c;
  if (!open.empty()) {
    fault.removed_branches = open;
  } else if (!trip.empty()) {
    const auto rule = rl::trip_rule_from_string(trip);
    if (!rule) throw rl::Error(rl::Errc::Config, "unknown trip rule '" + trip + "'");
    fault.removed_branches = rl::cleared_branches(model, fault.bus, *rule);
  }

  rl::SimulationOptions options;
  options.dt = 1.0 / rate;
  options.horizon = horizon;
  const rl::SimulationResult sim = rl::simulate(model, fault, options);
  rl::save_traces(out_path, sim.traces);
  if (meta_path.empty()) meta_path = out_path + ".meta.json";
  rl::save_event_meta(meta_path, {sim.fault_time, sim.clear_time, fs::path(network_path).stem().string()});

  nlohmann::json summary;
  summary["traces"] = out_path;
  summary["meta"] = meta_path;
  summary["fault_time"] = sim.fault_time;
  summary["clear_time"] = sim.clear_time;
  summary["removed"] = fault.removed_branches;
  summary["diverged"] = sim.diverged;
  const double window = horizon - sim.clear_time;
  if (sim.diverged || window > 1.0) {
    summary["oracle"] = rl::to_string(rl::stability_oracle(sim.traces, sim.clear_time, window, sim.diverged));
  } else {
    summary["oracle"] = nullptr;
  }
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_assess(const std::string& traces_path, const EventFlags& event, const AssessFlags& flags,
               const std::string& dump_mle, const std::string& dump_distance, const std::string& out_path) {
  const rl::AlignedDataset data = load_dataset(traces_path, event.resolve(), flags);
  const rl::AssessmentReport report = rl::run_assessment(data, flags.config());

  for (const auto& p : report.pairs) {
    if (!dump_mle.empty()) write_mle_csv(pair_path(dump_mle, p.pair, report.pairs.size()), p.mle);
    if (!dump_distance.empty()) {
      write_distance_csv(pair_path(dump_distance, p.pair, report.pairs.size()), p.distances, data.dt());
    }
  }
  const std::string json = rl::report_to_json(report);
  if (out_path.empty()) {
    std::cout << json << '\n';
  } else {
    open_output(out_path) << json << '\n';
  }
  return rl::exit_code(report.system.status);
}

int cmd_classify(const std::string& traces_path, const EventFlags& event, const AssessFlags& flags,
                 const std::vector<int>& pair_ids, const std::string& dump_distance) {
  const rl::AlignedDataset data = load_dataset(traces_path, event.resolve(), flags);
  const rl::AssessmentConfig cfg = flags.config();
  rl::GeneratorPair pair;
  if (pair_ids.empty()) {
    pair = rl::identify_sdgp(data, cfg.sdgp).pairs.front();
  } else {
    pair = {pair_ids[0], pair_ids[1]};
    data.index_of(pair.severe);
    data.index_of(pair.least);
  }
  const rl::SdgpTrace trace = rl::build_pair_trace(data, pair);
  const rl::SwingDecision decision = rl::classify_swing(trace.rel_speed, trace.dt, cfg.swing);
  const rl::DistanceSeries d = rl::distance_series(trace.rel_angle, decision.w);

  nlohmann::json out;
  out["severe"] = pair.severe;
  out["least"] = pair.least;
  out["sign_flipped"] = trace.sign_flipped;
  out["v0"] = trace.v0;
  out["pattern"] = rl::to_string(decision.pattern);
  out["w"] = decision.w;
  out["decided_at"] = decision.decided_at;
  try {
    out["m_n"] = rl::find_mle_start(decision.pattern, decision.w, d, trace.dt, cfg.swing);
  } catch (const rl::Error& e) {
    if (e.code() != rl::Errc::Timeout) throw;
    out["m_n"] = nullptr;
  }
  if (!dump_distance.empty()) write_distance_csv(dump_distance, d.d, trace.dt);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const std::string& network_path, const std::vector<int>& buses, const std::string& clear_grid,
              double fault_time, const std::string& trip, const AssessFlags& flags, int jobs,
              const std::string& rows_path, const std::string& summary_path) {
  const rl::NetworkModel model = rl::load_network(network_path);
  rl::SweepConfig cfg;
  cfg.buses = buses;
  cfg.clear_times = parse_grid(clear_grid);
  cfg.fault_time = fault_time;
  const auto rule = rl::trip_rule_from_string(trip);
  if (!rule) throw rl::Error(rl::Errc::Config, "unknown trip rule '" + trip + "'");
  cfg.trip = *rule;
  cfg.rate_hz = flags.rate;
  cfg.assessment = flags.config();
  cfg.jobs = jobs;

  const rl::SweepResult result = rl::run_sweep(model, cfg);
  if (!rows_path.empty()) {
    auto out = open_output(rows_path);
    rl::write_sweep_rows(out, result);
  }
  if (summary_path.empty()) {
    rl::write_sweep_summary(std::cout, result);
  } else {
    auto out = open_output(summary_path);
    rl::write_sweep_summary(out, result);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online rotor-angle stability assessment from generator angle/speed traces"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the classical-model simulator and write traces");
  std::string network, out_path, meta_out, trip;
  std::optional<int> fault_bus;
  std::optional<double> sim_tf, sim_tc;
  std::vector<int> open;
  int sim_rate = 120;
  double horizon = 12.0;
  sim->add_option("--network", network, "Network file")->required()->check(CLI::ExistingFile);
  sim->add_option("--fault-bus", fault_bus, "Faulted bus id");
  sim->add_option("--fault-time", sim_tf, "Fault instant, s");
  sim->add_option("--clear-time", sim_tc, "Clearing instant, s");
  sim->add_option("--open", open, "Branch ids opened at clearing");
  sim->add_option("--trip", trip, "Branch opening rule when --open is absent: none | adjacent");
  sim->add_option("--rate", sim_rate, "Output sample rate, Hz")->check(CLI::PositiveNumber);
  sim->add_option("--horizon", horizon, "Simulated span, s")->check(CLI::PositiveNumber);
  sim->add_option("--out", out_path, "Trace CSV to write")->required();
  sim->add_option("--meta", meta_out, "Event metadata JSON to write (default <out>.meta.json)");

  // assess
  auto* assess = app.add_subcommand("assess", "Assess stability from a trace CSV");
  std::string traces_path, dump_mle, dump_distance, report_out;
  EventFlags assess_event;
  AssessFlags assess_flags;
  assess->add_option("--traces", traces_path, "Trace CSV")->required();
  assess_event.add(assess);
  assess_flags.add(assess);
  assess->add_option("--dump-mle", dump_mle, "Write t,lambda CSV per pair");
  assess->add_option("--dump-distance", dump_distance, "Write j,t,d CSV per pair");
  assess->add_option("--out", report_out, "Report JSON path (default stdout)");

  // classify
  auto* classify = app.add_subcommand("classify", "Classify the swing pattern of one generator pair");
  std::string classify_traces, classify_distance;
  EventFlags classify_event;
  AssessFlags classify_flags;
  std::vector<int> pair_ids;
  classify->add_option("--traces", classify_traces, "Trace CSV")->required();
  classify_event.add(classify);
  classify_flags.add(classify);
  classify->add_option("--pair", pair_ids, "Severe and least disturbed generator ids")->expected(2)->delimiter(',');
  classify->add_option("--dump-distance", classify_distance, "Write j,t,d CSV");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Fault-bus by clearing-time study against the simulator oracle");
  std::string sweep_network, clear_grid, sweep_trip = "adjacent", rows_out, summary_out;
  std::vector<int> buses;
  double sweep_tf = 0.1;
  int jobs = 1;
  AssessFlags sweep_flags;
  sweep->add_option("--network", sweep_network, "Network file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--fault-bus", buses, "Faulted bus ids (default every bus)")->delimiter(',');
  sweep->add_option("--clear-time", clear_grid, "Clearing times: start:stop:step or a comma list")->required();
  sweep->add_option("--fault-time", sweep_tf, "Fault instant, s");
  sweep->add_option("--trip", sweep_trip, "Branch opening rule: none | adjacent");
  sweep_flags.add(sweep);
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", rows_out, "Per-case CSV");
  sweep->add_option("--summary", summary_out, "Summary CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) {
      return cmd_simulate(network, fault_bus, sim_tf, sim_tc, open, trip, sim_rate, horizon, out_path, meta_out);
    }
    if (*assess) {
      return cmd_assess(traces_path, assess_event, assess_flags, dump_mle, dump_distance, report_out);
    }
    if (*classify) return cmd_classify(classify_traces, classify_event, classify_flags, pair_ids, classify_distance);
    if (*sweep) {
      return cmd_sweep(sweep_network, buses, clear_grid, sweep_tf, sweep_trip, sweep_flags, jobs, rows_out,
                       summary_out);
    }
  } catch (const rl::Error& e) {
    std::cerr << "error [" << rl::to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
