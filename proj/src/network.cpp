#include "rotorlyap/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "rotorlyap/error.hpp"

namespace rotorlyap {

namespace {

class LineReader {
 public:
  LineReader(std::string source, int line_no, std::vector<std::string> tokens)
      : source_(std::move(source)), line_no_(line_no), tokens_(std::move(tokens)) {}

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::Parse, source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  void expect_count(std::size_t min, std::size_t max) const {
    if (tokens_.size() < min || tokens_.size() > max) {
      fail("'" + tokens_[0] + "' expects " + std::to_string(min - 1) +
           (min == max ? "" : "-" + std::to_string(max - 1)) + " fields, got " +
           std::to_string(tokens_.size() - 1));
    }
  }

  double real(std::size_t i) const {
    const std::string& s = token(i);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
      fail("expected a number, got '" + s + "'");
    }
    return value;
  }

  int integer(std::size_t i) const {
    const std::string& s = token(i);
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      fail("expected an integer, got '" + s + "'");
    }
    return value;
  }

 private:
  std::string source_;
  int line_no_;
  std::vector<std::string> tokens_;
};

[[noreturn]] void config_error(const std::string& what) { throw Error(Errc::Config, what); }

}  // namespace

std::size_t NetworkModel::bus_index(int bus_id) const {
  auto it = std::find(buses.begin(), buses.end(), bus_id);
  if (it == buses.end()) config_error("unknown bus " + std::to_string(bus_id));
  return static_cast<std::size_t>(it - buses.begin());
}

const Branch* NetworkModel::find_branch(int branch_id) const {
  for (const auto& b : branches) {
    if (b.id == branch_id) return &b;
  }
  return nullptr;
}

std::size_t NetworkModel::source_count() const {
  return generators.size() + (infinite_bus ? 1 : 0);
}

void NetworkModel::validate() const {
  std::set<int> bus_set(buses.begin(), buses.end());
  if (bus_set.size() != buses.size()) config_error("duplicate bus id");
  if (buses.empty()) config_error("network has no buses");
  if (!(base_mva > 0.0) || !(frequency_hz > 0.0)) {
    config_error("base_mva and frequency must be positive");
  }

  auto require_bus = [&](int bus, const std::string& who) {
    if (!bus_set.count(bus)) config_error(who + " references unknown bus " + std::to_string(bus));
  };

  std::set<int> branch_ids;
  for (const auto& b : branches) {
    const std::string who = "branch " + std::to_string(b.id);
    if (!branch_ids.insert(b.id).second) config_error("duplicate " + who);
    require_bus(b.from, who);
    require_bus(b.to, who);
    if (b.from == b.to) config_error(who + " connects a bus to itself");
    if (!(std::hypot(b.r, b.x) > 0.0)) config_error(who + " has zero impedance");
  }

  std::set<int> source_ids;
  int slack_count = 0;
  for (const auto& g : generators) {
    const std::string who = "generator " + std::to_string(g.id);
    if (!source_ids.insert(g.id).second) config_error("duplicate source id in " + who);
    require_bus(g.bus, who);
    if (!(g.inertia > 0.0)) config_error(who + " needs inertia M > 0");
    if (!(g.xd_prime > 0.0)) config_error(who + " needs x'd > 0");
    if (!(g.emf > 0.0)) config_error(who + " needs E > 0");
    if (!g.mech_power) ++slack_count;
  }
  if (infinite_bus) {
    const std::string who = "infinite_bus " + std::to_string(infinite_bus->id);
    if (!source_ids.insert(infinite_bus->id).second) config_error("duplicate source id in " + who);
    require_bus(infinite_bus->bus, who);
    if (!(infinite_bus->voltage > 0.0)) config_error(who + " needs V > 0");
    if (generators.empty()) config_error("an infinite bus needs at least one generator");
    if (slack_count > 0) config_error("slack generator not allowed alongside an infinite bus");
  } else {
    if (generators.size() < 2) {
      config_error("multi-machine networks need at least 2 generators (or add an infinite_bus)");
    }
    if (slack_count > 1) config_error("at most one generator may use 'slack' for Pm");
  }

  for (const auto& l : loads) require_bus(l.bus, "load");

  if (!sources_connected(*this, {})) config_error("pre-fault network does not connect all generators");
}

bool sources_connected(const NetworkModel& model, const std::vector<int>& removed) {
  const std::size_t n = model.buses.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& b : model.branches) {
    if (std::find(removed.begin(), removed.end(), b.id) != removed.end()) continue;
    parent[find(model.bus_index(b.from))] = find(model.bus_index(b.to));
  }
  std::set<std::size_t> roots;
  for (const auto& g : model.generators) roots.insert(find(model.bus_index(g.bus)));
  if (model.infinite_bus) roots.insert(find(model.bus_index(model.infinite_bus->bus)));
  return roots.size() <= 1;
}

void validate_fault(const NetworkModel& model, const FaultSpec& fault) {
  model.bus_index(fault.bus);
  if (!(fault.fault_time >= 0.0)) config_error("fault time must be >= 0");
  if (!(fault.clear_time >= fault.fault_time)) config_error("clearing time must not precede fault time");
  for (int id : fault.removed_branches) {
    if (!model.find_branch(id)) config_error("fault removes unknown branch " + std::to_string(id));
  }
  if (!sources_connected(model, fault.removed_branches)) {
    throw Error(Errc::Topology, "post-fault network splits the generators into islands");
  }
}

NetworkModel parse_network(std::istream& in, const std::string& source_name) {
  NetworkModel model;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream words(raw);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) tokens.push_back(w);
    if (tokens.empty()) continue;
    LineReader line(source_name, line_no, tokens);
    const std::string& kind = tokens[0];

    if (kind == "system") {
      if (tokens.size() % 2 != 1) line.fail("'system' expects key/value pairs");
      for (std::size_t i = 1; i < tokens.size(); i += 2) {
        if (tokens[i] == "base_mva") {
          model.base_mva = line.real(i + 1);
        } else if (tokens[i] == "frequency") {
          model.frequency_hz = line.real(i + 1);
        } else {
          line.fail("unknown system key '" + tokens[i] + "'");
        }
      }
    } else if (kind == "bus") {
      if (tokens.size() < 2) line.fail("'bus' expects at least one id");
      for (std::size_t i = 1; i < tokens.size(); ++i) model.buses.push_back(line.integer(i));
    } else if (kind == "branch") {
      line.expect_count(6, 7);
      Branch b;
      b.id = line.integer(1);
      b.from = line.integer(2);
      b.to = line.integer(3);
      b.r = line.real(4);
      b.x = line.real(5);
      if (tokens.size() == 7) b.charging = line.real(6);
      model.branches.push_back(b);
    } else if (kind == "generator") {
      line.expect_count(8, 8);
      Generator g;
      g.id = line.integer(1);
      g.bus = line.integer(2);
      g.inertia = line.real(3);
      g.damping = line.real(4);
      g.xd_prime = line.real(5);
      if (tokens[6] != "slack") g.mech_power = line.real(6);
      g.emf = line.real(7);
      model.generators.push_back(g);
    } else if (kind == "infinite_bus") {
      line.expect_count(4, 5);
      if (model.infinite_bus) line.fail("only one infinite_bus is supported");
      InfiniteBus ib;
      ib.id = line.integer(1);
      ib.bus = line.integer(2);
      ib.voltage = line.real(3);
      if (tokens.size() == 5) ib.angle = line.real(4);
      model.infinite_bus = ib;
    } else if (kind == "load") {
      line.expect_count(4, 4);
      model.loads.push_back({line.integer(1), {line.real(2), line.real(3)}});
    } else if (kind == "fault") {
      if (tokens.size() < 4) line.fail("'fault' expects <bus> <t_fault> <t_clear> [remove <branch>...]");
      FaultSpec f;
      f.bus = line.integer(1);
      f.fault_time = line.real(2);
      f.clear_time = line.real(3);
      if (tokens.size() > 4) {
        if (tokens[4] != "remove") line.fail("expected 'remove' after the clearing time");
        for (std::size_t i = 5; i < tokens.size(); ++i) f.removed_branches.push_back(line.integer(i));
      }
      model.fault = f;
    } else {
      line.fail("unknown record '" + kind + "'");
    }
  }
  model.validate();
  if (model.fault) validate_fault(model, *model.fault);
  return model;
}

NetworkModel load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open network file '" + path + "'");
  return parse_network(in, path);
}

}  // namespace rotorlyap
