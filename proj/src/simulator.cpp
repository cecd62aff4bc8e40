#include "rotorlyap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rotorlyap/error.hpp"

namespace rotorlyap {

void GeneratorTrace::validate() const {
  if (angles.size() != speeds.size()) throw Error(Errc::Input, "trace " + std::to_string(id) + ": length mismatch");
  if (angles.size() < 2) throw Error(Errc::Input, "trace " + std::to_string(id) + ": needs at least 2 samples");
  if (!(dt > 0.0)) throw Error(Errc::Input, "trace " + std::to_string(id) + ": dt must be positive");
  for (std::size_t k = 0; k < angles.size(); ++k) {
    if (!std::isfinite(angles[k]) || !std::isfinite(speeds[k])) {
      throw Error(Errc::Input, "trace " + std::to_string(id) + ": non-finite sample at index " + std::to_string(k));
    }
  }
}

std::vector<double> electrical_power(const ReducedSystem& system, std::span<const double> angles) {
  const auto n = static_cast<Eigen::Index>(angles.size());
  std::vector<double> pe(angles.size(), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dij = angles[i] - angles[j];
      const auto y = system.admittance(i, j);
      acc += system.emf[j] * (y.real() * std::cos(dij) + y.imag() * std::sin(dij));
    }
    pe[i] = system.emf[i] * acc;
  }
  return pe;
}

namespace {

// dPe_i/d(delta_k) for all i, k.
Eigen::MatrixXd power_jacobian(const ReducedSystem& system, std::span<const double> angles) {
  const auto n = static_cast<Eigen::Index>(angles.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == i) continue;
      const double dik = angles[i] - angles[k];
      const auto y = system.admittance(i, k);
      const double v = system.emf[i] * system.emf[k] * (y.real() * std::sin(dik) - y.imag() * std::cos(dik));
      jac(i, k) = v;
      jac(i, i) -= v;
    }
  }
  return jac;
}

}  // namespace

Equilibrium solve_equilibrium(const NetworkModel& model) {
  const ReducedSystem pre = reduce_network(model, Topology::PreFault);
  const std::size_t ng = model.generators.size();
  const std::size_t ns = model.source_count();

  std::size_t reference = ns;  // index of the angle reference source
  if (model.infinite_bus) {
    reference = ng;
  } else {
    reference = 0;
    for (std::size_t g = 0; g < ng; ++g) {
      if (!model.generators[g].mech_power) reference = g;
    }
  }

  std::vector<Eigen::Index> unknown;
  for (std::size_t g = 0; g < ng; ++g) {
    if (g != reference) unknown.push_back(static_cast<Eigen::Index>(g));
  }

  std::vector<double> angles(ns, 0.0);
  if (model.infinite_bus) angles[ng] = model.infinite_bus->angle;

  const auto nu = static_cast<Eigen::Index>(unknown.size());
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    const std::vector<double> pe = electrical_power(pre, angles);
    Eigen::VectorXd mismatch(nu);
    for (Eigen::Index u = 0; u < nu; ++u) {
      mismatch(u) = *model.generators[static_cast<std::size_t>(unknown[u])].mech_power - pe[unknown[u]];
    }
    if (mismatch.lpNorm<Eigen::Infinity>() < 1e-12) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd jac = power_jacobian(pre, angles)(unknown, unknown);
    Eigen::VectorXd step = jac.fullPivLu().solve(mismatch);
    if (!step.allFinite()) break;
    const double largest = step.lpNorm<Eigen::Infinity>();
    if (largest > 0.5) step *= 0.5 / largest;
    for (Eigen::Index u = 0; u < nu; ++u) angles[unknown[u]] += step(u);
  }
  if (!converged) throw Error(Errc::Setup, "pre-fault equilibrium did not converge (check Pm against network capacity)");

  Equilibrium eq;
  eq.angles = angles;
  const std::vector<double> pe = electrical_power(pre, angles);
  for (std::size_t g = 0; g < ng; ++g) {
    eq.mech_power.push_back(g == reference ? pe[g] : *model.generators[g].mech_power);
  }
  return eq;
}

SimulationResult simulate(const NetworkModel& model, const FaultSpec& fault, const SimulationOptions& options) {
  if (!(options.dt > 0.0) || options.substeps < 1) throw Error(Errc::Config, "simulation step must be positive");
  if (!(options.horizon > fault.clear_time)) throw Error(Errc::Config, "horizon must extend past the clearing time");
  validate_fault(model, fault);

  const ReducedSystem systems[3] = {
      reduce_network(model, Topology::PreFault),
      reduce_network(model, Topology::FaultOn, &fault),
      reduce_network(model, Topology::PostFault, &fault),
  };
  const Equilibrium eq = solve_equilibrium(model);

  const std::size_t ng = model.generators.size();
  const std::size_t ns = model.source_count();
  const double h = options.dt / options.substeps;
  const auto n_out = static_cast<long long>(std::floor(options.horizon / options.dt + 1e-9));
  const long long n_steps = n_out * options.substeps;
  const long long k_fault = std::llround(fault.fault_time / h);
  const long long k_clear = std::llround(fault.clear_time / h);

  std::vector<double> mech(eq.mech_power), inertia(ng), damping(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    inertia[g] = model.generators[g].inertia;
    damping[g] = model.generators[g].damping;
  }

  // State: [delta_0..delta_{ng-1}, omega_0..omega_{ng-1}]; infinite bus angle stays fixed.
  std::vector<double> x(2 * ng, 0.0);
  for (std::size_t g = 0; g < ng; ++g) x[g] = eq.angles[g];
  std::vector<double> angles(eq.angles);

  auto derivative = [&](const ReducedSystem& sys, const std::vector<double>& s, std::vector<double>& ds) {
    for (std::size_t g = 0; g < ng; ++g) angles[g] = s[g];
    const std::vector<double> pe = electrical_power(sys, angles);
    for (std::size_t g = 0; g < ng; ++g) {
      ds[g] = s[ng + g];
      ds[ng + g] = (mech[g] - pe[g] - damping[g] * s[ng + g]) / inertia[g];
    }
  };

  SimulationResult result;
  // Integer step rates give exact event instants (0.1 rather than 0.09999...).
  double step_rate = 1.0 / h;
  if (std::abs(step_rate - std::round(step_rate)) < 1e-6) step_rate = std::round(step_rate);
  result.fault_time = static_cast<double>(k_fault) / step_rate;
  result.clear_time = static_cast<double>(k_clear) / step_rate;
  result.traces.resize(ns);
  for (std::size_t g = 0; g < ng; ++g) result.traces[g].id = model.generators[g].id;
  if (model.infinite_bus) result.traces[ng].id = model.infinite_bus->id;
  for (auto& tr : result.traces) {
    tr.t0 = 0.0;
    tr.dt = options.dt;
    tr.angles.reserve(static_cast<std::size_t>(n_out + 1));
    tr.speeds.reserve(static_cast<std::size_t>(n_out + 1));
  }

  auto record = [&] {
    for (std::size_t g = 0; g < ng; ++g) {
      result.traces[g].angles.push_back(x[g]);
      result.traces[g].speeds.push_back(x[ng + g]);
    }
    if (model.infinite_bus) {
      result.traces[ng].angles.push_back(model.infinite_bus->angle);
      result.traces[ng].speeds.push_back(0.0);
    }
  };

  const std::size_t dim = x.size();
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  record();
  for (long long step = 0; step < n_steps; ++step) {
    const ReducedSystem& sys = step < k_fault ? systems[0] : (step < k_clear ? systems[1] : systems[2]);
    derivative(sys, x, k1);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    derivative(sys, tmp, k2);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    derivative(sys, tmp, k3);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = x[i] + h * k3[i];
    derivative(sys, tmp, k4);
    for (std::size_t i = 0; i < dim; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
      result.diverged = true;
      break;
    }
    if ((step + 1) % options.substeps == 0) record();
  }
  return result;
}

OracleVerdict stability_oracle(std::span<const GeneratorTrace> traces, double clear_time, double window,
                               bool diverged) {
  if (diverged) return OracleVerdict::Unstable;
  if (traces.size() < 2) throw Error(Errc::Input, "stability oracle needs at least two traces");
  std::size_t n = traces[0].size();
  for (const auto& t : traces) n = std::min(n, t.size());
  const double dt = traces[0].dt;
  if (n < 2 || traces[0].time(n - 1) + 1e-9 < clear_time + window) {
    throw Error(Errc::Coverage, "traces do not cover the oracle window after clearing");
  }

  constexpr double kSlip = 4.0 * std::numbers::pi;
  const auto last_second = static_cast<std::size_t>(std::llround(1.0 / dt));
  const std::size_t k_end = n - 1;
  const std::size_t k_ref = k_end >= last_second ? k_end - last_second : 0;

  for (std::size_t a = 0; a < traces.size(); ++a) {
    for (std::size_t b = a + 1; b < traces.size(); ++b) {
      for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(traces[a].angles[k] - traces[b].angles[k]) > kSlip) return OracleVerdict::Unstable;
      }
      const double end = std::abs(traces[a].angles[k_end] - traces[b].angles[k_end]);
      const double before = std::abs(traces[a].angles[k_ref] - traces[b].angles[k_ref]);
      if (end > std::numbers::pi && end > before) return OracleVerdict::Unstable;
    }
  }
  return OracleVerdict::Stable;
}

}  // namespace rotorlyap
