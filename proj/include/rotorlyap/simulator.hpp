#pragma once

#include <span>
#include <vector>

#include "rotorlyap/network.hpp"
#include "rotorlyap/reduction.hpp"
#include "rotorlyap/trace.hpp"

namespace rotorlyap {

struct SimulationOptions {
  double dt = 1.0 / 120.0;  // output sample period, s
  double horizon = 10.0;    // s
  int substeps = 10;        // RK4 steps per output sample
};

struct SimulationResult {
  /// One trace per generator (file order), then the infinite bus if present.
  std::vector<GeneratorTrace> traces;
  bool diverged = false;
  /// Event instants after snapping to the integration grid.
  double fault_time = 0.0;
  double clear_time = 0.0;
};

/// Electrical power of every source for internal angles `angles`:
/// Pe_i = sum_j E_i E_j (G_ij cos d_ij + B_ij sin d_ij).
std::vector<double> electrical_power(const ReducedSystem& system, std::span<const double> angles);

struct Equilibrium {
  std::vector<double> angles;      // per source, rad
  std::vector<double> mech_power;  // per generator, p.u. (slack filled in)
};

/// Pre-fault operating point with zero speed deviation. Throws Error{Setup}
/// if Newton's method does not converge.
Equilibrium solve_equilibrium(const NetworkModel& model);

/// Classical multi-machine simulation M d2delta/dt2 = Pm - Pe - D ddelta/dt,
/// fixed-step RK4 with topology switches at the snapped fault and clearing
/// instants.
SimulationResult simulate(const NetworkModel& model, const FaultSpec& fault, const SimulationOptions& options = {});

enum class OracleVerdict { Stable, Unstable };

/// Long-horizon ground truth: unstable when any pairwise angle difference
/// exceeds 4*pi, or exceeds pi at the end while still growing over the final
/// second. `diverged` input is unstable. Throws Error{Coverage} when the traces
/// do not extend `window` seconds past `clear_time`.
OracleVerdict stability_oracle(std::span<const GeneratorTrace> traces, double clear_time, double window,
                               bool diverged = false);

}  // namespace rotorlyap
