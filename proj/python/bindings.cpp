#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "rotorlyap/assess.hpp"
#include "rotorlyap/error.hpp"
#include "rotorlyap/ingest.hpp"
#include "rotorlyap/mle.hpp"
#include "rotorlyap/network.hpp"
#include "rotorlyap/simulator.hpp"
#include "rotorlyap/sweep.hpp"
#include "rotorlyap/swing.hpp"

namespace py = pybind11;
namespace rl = rotorlyap;

namespace {

py::dict simulate(const std::string& network_path, int fault_bus, double clear_time, double fault_time,
                  std::optional<std::vector<int>> removed, const std::string& trip, int rate, double horizon) {
  const rl::NetworkModel model = rl::load_network(network_path);
  rl::FaultSpec fault{fault_bus, fault_time, clear_time, {}};
  if (removed) {
    fault.removed_branches = *removed;
  } else {
    const auto rule = rl::trip_rule_from_string(trip);
    if (!rule) throw rl::Error(rl::Errc::Config, "unknown trip rule '" + trip + "'");
    fault.removed_branches = rl::cleared_branches(model, fault_bus, *rule);
  }
  rl::SimulationOptions options;
  options.dt = 1.0 / rate;
  options.horizon = horizon;
  rl::SimulationResult sim;
  {
    py::gil_scoped_release release;
    sim = rl::simulate(model, fault, options);
  }

  py::list ids, angles, speeds;
  for (const auto& tr : sim.traces) {
    ids.append(tr.id);
    angles.append(py::cast(tr.angles));
    speeds.append(py::cast(tr.speeds));
  }
  py::dict out;
  out["ids"] = ids;
  out["t0"] = sim.traces.empty() ? 0.0 : sim.traces.front().t0;
  out["dt"] = options.dt;
  out["angles"] = angles;
  out["speeds"] = speeds;
  out["fault_time"] = sim.fault_time;
  out["clear_time"] = sim.clear_time;
  out["removed"] = fault.removed_branches;
  out["diverged"] = sim.diverged;
  const double window = horizon - sim.clear_time;
  if (sim.diverged || window > 1.0) {
    out["oracle"] = std::string(rl::to_string(rl::stability_oracle(sim.traces, sim.clear_time, window, sim.diverged)));
  } else {
    out["oracle"] = py::none();
  }
  return out;
}

std::string assess(const std::vector<int>& ids, double t0, double dt, const std::vector<std::vector<double>>& angles,
                   const std::vector<std::vector<double>>& speeds, double fault_time, double clear_time, int rate,
                   double sigma, double t_max) {
  if (ids.size() != angles.size() || ids.size() != speeds.size()) {
    throw rl::Error(rl::Errc::Input, "ids, angles and speeds differ in length");
  }
  std::vector<rl::GeneratorTrace> traces;
  for (std::size_t g = 0; g < ids.size(); ++g) {
    if (angles[g].size() != speeds[g].size()) {
      throw rl::Error(rl::Errc::Input, "generator " + std::to_string(ids[g]) + ": angle and speed lengths differ");
    }
    traces.push_back({ids[g], t0, dt, angles[g], speeds[g]});
  }
  rl::AssessmentConfig cfg;
  cfg.sdgp.sigma = sigma;
  cfg.set_t_max(t_max);
  py::gil_scoped_release release;
  const rl::AlignedDataset data = rl::align(traces, {fault_time, clear_time, ""}, {rate, 0.5});
  return rl::report_to_json(rl::run_assessment(data, cfg));
}

py::tuple classify(const std::vector<double>& rel_speed, double dt) {
  const rl::SwingDecision d = rl::classify_swing(rel_speed, dt);
  return py::make_tuple(std::string(rl::to_string(d.pattern)), d.w, d.decided_at);
}

py::tuple rls_fit(const std::vector<double>& t, const std::vector<double>& l) {
  if (t.size() != l.size() || t.size() < 2) throw rl::Error(rl::Errc::Input, "need at least two (t, L) points");
  rl::RlsState s = rl::rls_init(l[0], l[1], t[0], t[1]);
  for (std::size_t i = 2; i < t.size(); ++i) s = rl::rls_update(s, l[i], t[i]);
  return py::make_tuple(s.lambda(), s.intercept());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rotor-angle Lyapunov exponent stability assessment";

  static py::exception<rl::Error> error(m, "RotorlyapError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const rl::Error& e) {
      const std::string message = std::string(rl::to_string(e.code())) + ": " + e.what();
      PyErr_SetString(error.ptr(), message.c_str());
    }
  });

  m.def("simulate", &simulate, py::arg("network"), py::arg("fault_bus"), py::arg("clear_time"),
        py::arg("fault_time") = 0.1, py::arg("removed") = py::none(), py::arg("trip") = "adjacent",
        py::arg("rate") = 120, py::arg("horizon") = 5.0,
        "Simulate a three-phase fault; returns traces, event times and the oracle verdict.");
  m.def("assess_json", &assess, py::arg("ids"), py::arg("t0"), py::arg("dt"), py::arg("angles"), py::arg("speeds"),
        py::arg("fault_time"), py::arg("clear_time"), py::arg("rate") = 120, py::arg("sigma") = 0.7,
        py::arg("t_max") = 10.0);
  m.def("classify_swing", &classify, py::arg("rel_speed"), py::arg("dt"),
        "Swing pattern, Theiler window and decision sample of a relative speed series.");
  m.def("rls_fit", &rls_fit, py::arg("t"), py::arg("l"), "Recursive least-squares slope and intercept.");
}
