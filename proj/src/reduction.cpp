#include "rotorlyap/reduction.hpp"

#include <algorithm>

#include "rotorlyap/error.hpp"

namespace rotorlyap {

using cplx = std::complex<double>;

std::vector<Eigen::Index> source_nodes(const NetworkModel& model) {
  const auto nb = static_cast<Eigen::Index>(model.buses.size());
  std::vector<Eigen::Index> kept;
  for (std::size_t g = 0; g < model.generators.size(); ++g) kept.push_back(nb + static_cast<Eigen::Index>(g));
  if (model.infinite_bus) kept.push_back(static_cast<Eigen::Index>(model.bus_index(model.infinite_bus->bus)));
  return kept;
}

Eigen::MatrixXcd build_admittance(const NetworkModel& model, Topology topology, const FaultSpec* fault) {
  if (topology != Topology::PreFault && fault == nullptr) {
    throw Error(Errc::Config, "fault-on and post-fault topologies need a fault specification");
  }
  const auto nb = static_cast<Eigen::Index>(model.buses.size());
  const auto n = nb + static_cast<Eigen::Index>(model.generators.size());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);

  auto add_series = [&](Eigen::Index i, Eigen::Index j, cplx ys) {
    y(i, i) += ys;
    y(j, j) += ys;
    y(i, j) -= ys;
    y(j, i) -= ys;
  };

  for (const auto& b : model.branches) {
    if (topology == Topology::PostFault &&
        std::find(fault->removed_branches.begin(), fault->removed_branches.end(), b.id) !=
            fault->removed_branches.end()) {
      continue;
    }
    const auto i = static_cast<Eigen::Index>(model.bus_index(b.from));
    const auto j = static_cast<Eigen::Index>(model.bus_index(b.to));
    add_series(i, j, 1.0 / cplx(b.r, b.x));
    const cplx half_shunt(0.0, 0.5 * b.charging);
    y(i, i) += half_shunt;
    y(j, j) += half_shunt;
  }
  for (const auto& l : model.loads) {
    const auto i = static_cast<Eigen::Index>(model.bus_index(l.bus));
    y(i, i) += l.admittance;
  }
  for (std::size_t g = 0; g < model.generators.size(); ++g) {
    const auto& gen = model.generators[g];
    add_series(nb + static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(model.bus_index(gen.bus)),
               1.0 / cplx(0.0, gen.xd_prime));
  }
  if (topology == Topology::FaultOn) {
    const auto i = static_cast<Eigen::Index>(model.bus_index(fault->bus));
    y(i, i) += kFaultShuntAdmittance;
  }
  return y;
}

ReducedSystem reduce_network(const NetworkModel& model, Topology topology, const FaultSpec* fault) {
  const Eigen::MatrixXcd y = build_admittance(model, topology, fault);
  const std::vector<Eigen::Index> kept = source_nodes(model);

  std::vector<Eigen::Index> eliminated;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (std::find(kept.begin(), kept.end(), i) == kept.end()) eliminated.push_back(i);
  }

  const auto ne = static_cast<Eigen::Index>(eliminated.size());
  Eigen::MatrixXcd y_kk = y(kept, kept);
  ReducedSystem out;
  if (ne > 0) {
    Eigen::MatrixXcd y_ke = y(kept, eliminated);
    Eigen::MatrixXcd y_ek = y(eliminated, kept);
    Eigen::MatrixXcd y_ee = y(eliminated, eliminated);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(y_ee);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
      throw Error(Errc::Topology, "network reduction failed: bus admittance block is singular "
                                  "(disconnected bus or island without shunt)");
    }
    out.admittance = y_kk - y_ke * lu.solve(y_ek);
  } else {
    out.admittance = y_kk;
  }
  if (!out.admittance.allFinite()) throw Error(Errc::Topology, "network reduction produced non-finite entries");
  // Reciprocal networks give a symmetric matrix; drop round-off asymmetry.
  out.admittance = (0.5 * (out.admittance + out.admittance.transpose())).eval();

  for (const auto& g : model.generators) out.emf.push_back(g.emf);
  if (model.infinite_bus) out.emf.push_back(model.infinite_bus->voltage);
  return out;
}

}  // namespace rotorlyap
