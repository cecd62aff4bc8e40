#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rotorlyap/network.hpp"

namespace rotorlyap {

enum class Topology { PreFault, FaultOn, PostFault };

/// Shunt admittance (p.u.) placed at the faulted bus while the fault is on.
inline constexpr double kFaultShuntAdmittance = 1e6;

/// Admittance matrix among source internal nodes. Row/column order is the
/// generators in file order followed by the infinite bus, if any.
struct ReducedSystem {
  Eigen::MatrixXcd admittance;
  std::vector<double> emf;
};

/// Full bus admittance matrix with one extra internal node per generator
/// (appended after the buses, in generator order).
Eigen::MatrixXcd build_admittance(const NetworkModel& model, Topology topology, const FaultSpec* fault);

/// Kron-reduces the network to the source internal nodes. `fault` is required
/// for the fault-on and post-fault topologies. Throws Error{Topology} when
/// the eliminated block is singular.
ReducedSystem reduce_network(const NetworkModel& model, Topology topology, const FaultSpec* fault = nullptr);

/// Indices of the retained nodes in build_admittance() ordering.
std::vector<Eigen::Index> source_nodes(const NetworkModel& model);

}  // namespace rotorlyap
