#include <doctest.h>

#include "../support.hpp"
#include "json.hpp"
#include "rotorlyap/error.hpp"
#include "rotorlyap/simulator.hpp"

namespace rl = rotorlyap;
using testsupport::kDt;

namespace {

struct Case {
  rl::AlignedDataset data;
  rl::OracleVerdict oracle;
};

Case simulate_case(const char* file, double clear_time) {
  const rl::NetworkModel m = rl::load_network(testsupport::data_path(file));
  rl::FaultSpec f = *m.fault;
  f.clear_time = clear_time;
  const rl::SimulationResult s = rl::simulate(m, f, {kDt, clear_time + 10.5, 10});
  const rl::OracleVerdict oracle = rl::stability_oracle(s.traces, s.clear_time, 10.0, s.diverged);
  return {rl::align(s.traces, {s.fault_time, s.clear_time, std::nullopt}, {120, 0.5}), oracle};
}

rl::PairVerdict verdict(rl::PairStatus s, double t) { return {{1, 2}, s, t, std::nullopt}; }

}  // namespace

TEST_SUITE("assess") {
  TEST_CASE("criterion shapes") {
    SUBCASE("monotone rise is first-swing unstable at the trend window") {
      std::vector<double> l;
      for (int i = 0; i < 60; ++i) l.push_back(0.50 + 0.05 * i);
      const rl::PairVerdict v = testsupport::judge(l);
      CHECK(v.status == rl::PairStatus::UnstableFirstSwing);
      CHECK(*v.decision_time == doctest::Approx(25 * kDt));  // 24th sample, first sits at 2 dt
      CHECK_FALSE(v.peak_lambda.has_value());
    }
    SUBCASE("dip then positive peak is multi-swing unstable") {
      const rl::PairVerdict v = testsupport::judge(testsupport::fall_rise_fall(0.3, -0.2, 0.15, 30, 30, 30));
      CHECK(v.status == rl::PairStatus::UnstableMultiSwing);
      CHECK(*v.peak_lambda == doctest::Approx(0.15).epsilon(1e-12));
    }
    SUBCASE("dip then negative peak is stable") {
      const rl::PairVerdict v = testsupport::judge(testsupport::fall_rise_fall(0.3, -1.0, -0.05, 30, 30, 30));
      CHECK(v.status == rl::PairStatus::Stable);
      CHECK(*v.peak_lambda == doctest::Approx(-0.05).epsilon(1e-12));
    }
    SUBCASE("all nine hand-built curves") {
      for (const auto& shape : testsupport::mle_shapes()) {
        CAPTURE(shape.label);
        const rl::PairVerdict v = testsupport::judge(shape.lambdas);
        CHECK(v.status == shape.expected);
        if (shape.peak) {
          REQUIRE(v.peak_lambda.has_value());
          CHECK(*v.peak_lambda == doctest::Approx(*shape.peak).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("peak confirmation time follows the half-width") {
    const auto l = testsupport::fall_rise_fall(0.3, -0.2, 0.15, 30, 30, 30);
    const rl::PairVerdict v = testsupport::judge(l);
    // smoothed crest j after the dip; its confirmation needs raw samples up to j + 6 + 2
    std::size_t crest = 0;
    double best = -1e9;
    for (std::size_t i = 30; i + 2 < l.size(); ++i) {
      const double ma = (l[i - 2] + l[i - 1] + l[i] + l[i + 1] + l[i + 2]) / 5.0;
      if (ma > best) {
        best = ma;
        crest = i;
      }
    }
    CHECK(*v.decision_time == doctest::Approx(static_cast<double>(crest + 6 + 2 + 2) * kDt));
  }

  TEST_CASE("a verdict never changes once issued") {
    for (const auto& shape : testsupport::mle_shapes()) {
      CAPTURE(shape.label);
      const rl::PairVerdict first = testsupport::judge(shape.lambdas);
      std::vector<double> longer(shape.lambdas);
      for (int k = 0; k < 200; ++k) longer.push_back(5.0 * std::sin(0.3 * k));
      rl::PairAssessor a({1, 2});
      for (std::size_t i = 0; i < longer.size(); ++i) a.push(longer[i], static_cast<double>(i + 2) * kDt);
      CHECK(a.verdict().status == first.status);
      CHECK(a.verdict().decision_time == first.decision_time);
      a.expire(100.0);
      a.skip(100.0);
      CHECK(a.verdict().status == first.status);
    }
  }

  TEST_CASE("slowly sinking exponent times out") {
    rl::CriteriaConfig cfg;
    cfg.t_max = 2.0;
    rl::PairAssessor a({3, 1}, cfg);
    rl::PairStatus s = rl::PairStatus::Pending;
    std::size_t i = 0;
    for (; s == rl::PairStatus::Pending && i < 1000; ++i) s = a.push(-0.001 * static_cast<double>(i), (i + 2) * kDt);
    CHECK(s == rl::PairStatus::UndeterminedTimeout);
    CHECK(*a.verdict().decision_time > 2.0);
    CHECK(*a.verdict().decision_time < 2.0 + 2 * kDt);
  }

  TEST_CASE("decision_time is present exactly when the status is terminal") {
    rl::PairAssessor a({1, 2});
    CHECK(a.verdict().status == rl::PairStatus::Pending);
    CHECK_FALSE(a.verdict().decision_time.has_value());
    a.skip(0.0);
    CHECK(a.verdict().status == rl::PairStatus::Skipped);
    CHECK(a.verdict().decision_time == std::optional<double>(0.0));
  }

  TEST_CASE("samples must arrive in time order") {
    rl::PairAssessor a({1, 2});
    a.push(0.1, 0.5);
    CHECK_THROWS_AS(a.push(0.1, 0.5), rl::Error);
    CHECK_THROWS_AS(a.push(std::nan(""), 0.6), rl::Error);
  }

  TEST_CASE("aggregation examples") {
    using S = rl::PairStatus;
    const std::vector<rl::PairVerdict> stable{verdict(S::Stable, 1.0), verdict(S::Stable, 2.0)};
    const auto a = rl::aggregate(stable);
    CHECK(a.status == rl::SystemStatus::Stable);
    CHECK(a.decision_time == std::optional<double>(2.0));

    const std::vector<rl::PairVerdict> mixed{verdict(S::Stable, 1.0), verdict(S::UnstableMultiSwing, 2.5)};
    CHECK(rl::aggregate(mixed).status == rl::SystemStatus::Unstable);

    const std::vector<rl::PairVerdict> early{{{1, 3}, S::Pending, std::nullopt, std::nullopt},
                                             verdict(S::UnstableFirstSwing, 1.3)};
    const auto e = rl::aggregate(early);
    CHECK(e.status == rl::SystemStatus::Unstable);
    CHECK(e.decision_time == std::optional<double>(1.3));

    const std::vector<rl::PairVerdict> skipped{verdict(S::Skipped, 0.0)};
    CHECK_THROWS_AS(rl::aggregate(skipped), rl::Error);
    CHECK_THROWS_AS(rl::aggregate(std::vector<rl::PairVerdict>{}), rl::Error);
  }

  TEST_CASE("aggregation matches the truth table for up to three pairs") {
    std::size_t combos = 0;
    std::vector<rl::PairStatus> tuple;
    auto check_tuple = [&](const std::vector<rl::PairStatus>& s) {
      ++combos;
      std::vector<rl::PairVerdict> v;
      for (std::size_t k = 0; k < s.size(); ++k) {
        rl::PairVerdict pv{{static_cast<int>(k + 2), 1}, s[k], std::nullopt, std::nullopt};
        if (s[k] != rl::PairStatus::Pending) pv.decision_time = 1.0 + 0.5 * static_cast<double>(k);
        v.push_back(pv);
      }
      const testsupport::ExpectedSystem expected = testsupport::criterion_iv(s);
      if (expected.error) {
        CHECK_THROWS_AS(rl::aggregate(v), rl::Error);
        return;
      }
      const rl::SystemVerdict got = rl::aggregate(v);
      CHECK(got.status == expected.status);
      if (got.status == rl::SystemStatus::Unstable) {
        double first = 1e9;
        for (const auto& pv : v) {
          if (rl::is_unstable(pv.status)) first = std::min(first, *pv.decision_time);
        }
        CHECK(got.decision_time == std::optional<double>(first));
      }
    };
    for (auto a : testsupport::kAllStatuses) {
      check_tuple({a});
      for (auto b : testsupport::kAllStatuses) {
        check_tuple({a, b});
        for (auto c : testsupport::kAllStatuses) check_tuple({a, b, c});
      }
    }
    CHECK(combos == 6 + 36 + 216);
  }

  TEST_CASE("exit codes") {
    CHECK(rl::exit_code(rl::SystemStatus::Stable) == 0);
    CHECK(rl::exit_code(rl::SystemStatus::Unstable) == 2);
    CHECK(rl::exit_code(rl::SystemStatus::Undetermined) == 3);
    CHECK(rl::exit_code(rl::SystemStatus::Pending) == 3);
  }

  TEST_CASE("two-machine case cleared early is stable by the peak criterion") {
    const Case c = simulate_case("two_machine.net", 0.15);
    REQUIRE(c.oracle == rl::OracleVerdict::Stable);
    const rl::AssessmentReport r = rl::run_assessment(c.data);
    CHECK(r.system.status == rl::SystemStatus::Stable);
    REQUIRE_FALSE(r.pairs.empty());
    for (const auto& p : r.pairs) {
      CHECK(p.verdict.status == rl::PairStatus::Stable);
      REQUIRE(p.verdict.peak_lambda.has_value());
      CHECK(*p.verdict.peak_lambda <= 0.0);
    }
  }

  TEST_CASE("two-machine case cleared late is first-swing unstable") {
    const Case c = simulate_case("two_machine.net", 0.45);
    REQUIRE(c.oracle == rl::OracleVerdict::Unstable);
    const rl::AssessmentReport r = rl::run_assessment(c.data);
    CHECK(r.system.status == rl::SystemStatus::Unstable);
    REQUIRE(r.pairs.size() == 1);
    const auto& p = r.pairs[0];
    CHECK(p.verdict.status == rl::PairStatus::UnstableFirstSwing);
    // decided on the 24th exponent sample, available the moment it is computed
    REQUIRE(p.mle.times.size() == 24);
    CHECK(*p.verdict.decision_time == doctest::Approx(p.mle.times[23]).epsilon(1e-12));
    CHECK(*r.system.decision_time == *p.verdict.decision_time);
  }

  TEST_CASE("negative damping gives multi-swing instability on the two-machine system") {
    const Case c = simulate_case("two_machine_negdamp.net", 0.15);
    REQUIRE(c.oracle == rl::OracleVerdict::Unstable);
    const rl::AssessmentReport r = rl::run_assessment(c.data);
    CHECK(r.system.status == rl::SystemStatus::Unstable);
    CHECK(r.pairs.at(0).verdict.status == rl::PairStatus::UnstableMultiSwing);
    CHECK(*r.pairs.at(0).verdict.peak_lambda > 0.0);
  }

  TEST_CASE("pipeline internals are consistent") {
    const Case c = simulate_case("wscc9.net", 0.2);
    const rl::AssessmentReport r = rl::run_assessment(c.data);
    for (const auto& p : r.pairs) {
      CAPTURE(p.pair.severe);
      REQUIRE(p.swing.has_value());
      REQUIRE(p.m_n.has_value());
      CHECK(*p.m_n >= p.swing->w);
      if (p.swing->pattern == rl::SwingPattern::I || p.swing->pattern == rl::SwingPattern::II) {
        CHECK(*p.m_n == p.swing->w);
      }
      // the online stream equals the batch estimator over the same points
      const rl::SdgpTrace tr = rl::build_pair_trace(c.data, p.pair);
      const rl::MleSeries batch = rl::estimate_stream(
          tr, {p.swing->w, *p.m_n, kDt, p.swing->pattern, p.swing->decided_at}, p.mle.lambdas.size() + 1);
      CHECK(batch.lambdas == p.mle.lambdas);
      for (double d : p.distances) CHECK(d >= 0.0);
    }
  }

  TEST_CASE("undisturbed pairs are skipped and reported") {
    rl::AlignedDataset d;
    d.ids = {1, 2};
    d.angles = {std::vector<double>(240, 0.0), std::vector<double>(240, 0.0)};
    d.speeds = {std::vector<double>(240, 1e-9), std::vector<double>(240, 0.0)};
    const rl::AssessmentReport r = rl::run_assessment(d);
    REQUIRE(r.error.has_value());
    CHECK(r.system.status == rl::SystemStatus::Undetermined);
    CHECK(r.pairs.at(0).verdict.status == rl::PairStatus::Skipped);
    CHECK(rl::exit_code(r.system.status) == 3);
  }

  TEST_CASE("report JSON layout") {
    const Case c = simulate_case("two_machine.net", 0.15);
    const rl::AssessmentReport r = rl::run_assessment(c.data);
    const auto j = nlohmann::json::parse(rl::report_to_json(r));
    CHECK(j.at("system").at("status") == "STABLE");
    CHECK(j.at("system").at("decision_time_s").is_number());
    REQUIRE(j.at("pairs").size() == r.pairs.size());
    for (const char* key : {"severe", "least", "pattern", "w", "m_n", "status", "decision_time_s", "peak_lambda"}) {
      CHECK(j.at("pairs")[0].contains(key));
    }
    CHECK(j.at("pairs")[0].at("status") == "STABLE");
    CHECK(j.at("error").is_null());
  }

  TEST_CASE("configuration validation") {
    rl::AssessmentConfig cfg;
    cfg.sdgp.sigma = 0.0;
    CHECK_THROWS_AS(cfg.validate(), rl::Error);
    cfg.sdgp.sigma = 0.7;
    cfg.set_t_max(-1.0);
    CHECK_THROWS_AS(cfg.validate(), rl::Error);
    cfg.set_t_max(4.0);
    CHECK(cfg.swing.t_max == 4.0);
    CHECK(cfg.criteria.t_max == 4.0);
    CHECK_NOTHROW(cfg.validate());
  }
}
