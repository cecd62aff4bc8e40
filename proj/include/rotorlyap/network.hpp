#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rotorlyap {

struct Branch {
  int id = 0;
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double charging = 0.0;  // total line charging susceptance, split half per end
};

/// Classical machine: constant EMF behind transient reactance.
struct Generator {
  int id = 0;
  int bus = 0;
  double inertia = 0.0;  // M, s^2/rad in p.u.
  double damping = 0.0;  // D, p.u. per rad/s
  double xd_prime = 0.0;
  /// Empty for the angle-reference machine whose Pm follows from the
  /// pre-fault equilibrium.
  std::optional<double> mech_power;
  double emf = 1.0;
};

/// Fixed voltage source; acts as the angle reference and power slack.
struct InfiniteBus {
  int id = 0;
  int bus = 0;
  double voltage = 1.0;
  double angle = 0.0;
};

struct Load {
  int bus = 0;
  std::complex<double> admittance;  // constant-impedance equivalent, G + jB
};

struct FaultSpec {
  int bus = 0;
  double fault_time = 0.0;
  double clear_time = 0.0;
  std::vector<int> removed_branches;
};

struct NetworkModel {
  std::vector<int> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::optional<InfiniteBus> infinite_bus;
  std::vector<Load> loads;
  double base_mva = 100.0;
  double frequency_hz = 60.0;
  /// Optional fault declared in the network file.
  std::optional<FaultSpec> fault;

  /// Throws Error{Config} describing the first violated invariant.
  void validate() const;

  std::size_t bus_index(int bus_id) const;
  const Branch* find_branch(int branch_id) const;
  /// Number of dynamic machines plus the infinite bus, if any.
  std::size_t source_count() const;
};

/// Checks the fault against `model`, including that every generator bus stays
/// connected once the removed branches are out. Zero-duration faults
/// (clear_time == fault_time) are accepted.
void validate_fault(const NetworkModel& model, const FaultSpec& fault);

/// True when all generator (and infinite-bus) buses lie in one connected
/// component of the branch graph without `removed`.
bool sources_connected(const NetworkModel& model, const std::vector<int>& removed);

NetworkModel parse_network(std::istream& in, const std::string& source_name = "<stream>");
NetworkModel load_network(const std::string& path);

}  // namespace rotorlyap
