#include <doctest.h>

#include "../support.hpp"
#include "rotorlyap/error.hpp"
#include "rotorlyap/sdgp.hpp"
#include "rotorlyap/simulator.hpp"

namespace rl = rotorlyap;
using testsupport::data_path;

namespace {

rl::AlignedDataset speeds_only(const std::vector<double>& w0, std::size_t n = 4) {
  rl::AlignedDataset d;
  d.start_index = 24;
  for (std::size_t g = 0; g < w0.size(); ++g) {
    d.ids.push_back(static_cast<int>(g + 1));
    d.angles.emplace_back(n, 0.0);
    d.speeds.emplace_back(n, w0[g]);
  }
  return d;
}

std::vector<rl::GeneratorPair> pairs_of(const std::vector<double>& w0, double sigma = 0.7) {
  return rl::identify_sdgp(speeds_only(w0), {sigma}).pairs;
}

rl::Errc error_code_of(auto&& fn) {
  try {
    fn();
  } catch (const rl::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return rl::Errc::Input;
}

}  // namespace

TEST_SUITE("sdgp") {
  TEST_CASE("severity ratio selection") {
    CHECK(pairs_of({5.0, 4.0, 0.2}) == std::vector<rl::GeneratorPair>{{1, 3}, {2, 3}});
    CHECK(pairs_of({5.0, 3.0, -0.1}) == std::vector<rl::GeneratorPair>{{1, 3}});
    CHECK(pairs_of({1.0, -1.0}) == std::vector<rl::GeneratorPair>{{2, 1}});
    // exactly at the threshold is not severe
    CHECK(pairs_of({10.0, 7.0, 0.0}) == std::vector<rl::GeneratorPair>{{1, 3}});
    // negative speeds rank by magnitude
    CHECK(pairs_of({-6.0, 5.0, 1.0, 0.5}) == std::vector<rl::GeneratorPair>{{1, 4}, {2, 4}});
  }

  TEST_CASE("least disturbed machine is excluded even when its ratio passes") {
    const rl::SdgpSelection s = rl::identify_sdgp(speeds_only({2.0, 2.0, 2.0}));
    CHECK(s.least == 1);
    CHECK(s.pairs == std::vector<rl::GeneratorPair>{{2, 1}, {3, 1}});
  }

  TEST_CASE("errors") {
    CHECK(error_code_of([] { rl::identify_sdgp(speeds_only({0.0, 0.0, 0.0})); }) == rl::Errc::NoDisturbance);
    CHECK(error_code_of([] { rl::identify_sdgp(speeds_only({5.0})); }) == rl::Errc::Input);
    CHECK(error_code_of([] { rl::identify_sdgp(speeds_only({5.0, 0.0}), {0.0}); }) == rl::Errc::Config);
    CHECK(error_code_of([] { rl::identify_sdgp(speeds_only({5.0, 0.0}), {1.5}); }) == rl::Errc::Config);
    CHECK(error_code_of([] { rl::build_pair_trace(speeds_only({5.0, 0.0}), {1, 9}); }) == rl::Errc::Lookup);
  }

  TEST_CASE("a lone severe machine against a quiet one still forms a pair") {
    CHECK(pairs_of({5.0, 0.1}) == std::vector<rl::GeneratorPair>{{1, 2}});
  }

  TEST_CASE("ratio test is invariant to scaling the speeds") {
    const std::vector<std::vector<double>> cases{{5.0, 4.0, 0.2}, {5.0, 3.0, -0.1}, {1.0, -1.0}, {-3.0, 2.2, 2.0, 0.4}};
    for (const auto& w : cases) {
      const auto base = pairs_of(w);
      for (double c : {1e-3, 0.5, 3.0, 1e4}) {
        std::vector<double> scaled;
        for (double x : w) scaled.push_back(c * x);
        CHECK(pairs_of(scaled) == base);
      }
    }
  }

  TEST_CASE("identical angles give a null pair trace") {
    rl::AlignedDataset d = speeds_only({0.0, 0.0});
    d.angles = {{0.1, 0.2, 0.3, 0.4}, {0.1, 0.2, 0.3, 0.4}};
    const rl::SdgpTrace t = rl::build_pair_trace(d, {1, 2});
    CHECK(t.v0 == 0.0);
    for (double x : t.rel_angle) CHECK(x == 0.0);
  }

  TEST_CASE("negative initial relative speed is flipped") {
    rl::AlignedDataset d = speeds_only({0.0, 0.0});
    d.angles = {{0.0, -0.1, -0.2, -0.3}, {0.0, 0.0, 0.0, 0.0}};
    d.speeds = {{-2.0, -2.0, -1.5, -1.0}, {0.0, 0.0, 0.0, 0.0}};
    const rl::SdgpTrace t = rl::build_pair_trace(d, {1, 2});
    CHECK(t.sign_flipped);
    CHECK(t.v0 == 2.0);
    CHECK(t.rel_speed == std::vector<double>{2.0, 2.0, 1.5, 1.0});
    CHECK(t.rel_angle == std::vector<double>{0.0, 0.1, 0.2, 0.3});
  }

  TEST_CASE("pair trace equals direct subtraction of simulated traces") {
    const rl::NetworkModel m = rl::load_network(data_path("two_machine.net"));
    const rl::SimulationResult s = rl::simulate(m, *m.fault, {1.0 / 120.0, 3.0, 10});
    const rl::AlignedDataset d = rl::align(s.traces, {s.fault_time, s.clear_time, std::nullopt});
    const rl::SdgpSelection sel = rl::identify_sdgp(d);
    REQUIRE(sel.pairs.size() == 1);
    const rl::SdgpTrace t = rl::build_pair_trace(d, sel.pairs[0]);
    const double sign = t.sign_flipped ? -1.0 : 1.0;
    const auto& a = s.traces[d.index_of(sel.pairs[0].severe)];
    const auto& b = s.traces[d.index_of(sel.pairs[0].least)];
    const auto offset = static_cast<std::size_t>(d.start_index);
    REQUIRE(t.rel_angle.size() == d.length());
    for (std::size_t i = 0; i < d.length(); ++i) {
      REQUIRE(std::abs(t.rel_angle[i] - sign * (a.angles[offset + i] - b.angles[offset + i])) < 1e-12);
      REQUIRE(std::abs(t.rel_speed[i] - sign * (a.speeds[offset + i] - b.speeds[offset + i])) < 1e-12);
    }
    CHECK(t.v0 >= 0.0);
    CHECK(t.dt == 1.0 / 120.0);
  }

  TEST_CASE("angle and speed channels agree for band-limited signals") {
    const double dt = 1.0 / 120.0;
    for (double f : {0.3, 0.8, 1.5, 2.0}) {
      CAPTURE(f);
      const double w = 2.0 * std::numbers::pi * f;
      rl::AlignedDataset d;
      d.ids = {1, 2};
      d.angles.resize(2);
      d.speeds.resize(2);
      for (std::size_t i = 0; i < 600; ++i) {
        const double t = i * dt;
        d.angles[0].push_back(0.8 * std::sin(w * t + 0.3));
        d.speeds[0].push_back(0.8 * w * std::cos(w * t + 0.3));
        d.angles[1].push_back(0.1 * std::sin(0.5 * w * t));
        d.speeds[1].push_back(0.05 * w * std::cos(0.5 * w * t));
      }
      const rl::SdgpTrace tr = rl::build_pair_trace(d, {1, 2});
      double vmax = 0.0;
      for (double v : tr.rel_speed) vmax = std::max(vmax, std::abs(v));
      const double bound = 0.5 * vmax * (2.0 * std::numbers::pi * f * dt);
      for (std::size_t i = 0; i + 1 < tr.rel_angle.size(); ++i) {
        REQUIRE(std::abs((tr.rel_angle[i + 1] - tr.rel_angle[i]) / dt - tr.rel_speed[i + 1]) < bound);
      }
    }
  }

  TEST_CASE("selection is deterministic") {
    const auto d = speeds_only({3.0, -3.0, 2.9, 0.05, 0.05});
    const auto a = rl::identify_sdgp(d);
    const auto b = rl::identify_sdgp(d);
    CHECK(a.pairs == b.pairs);
    CHECK(a.least == 4);
  }
}
