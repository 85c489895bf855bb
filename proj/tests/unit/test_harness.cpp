#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "enzyrx/errors.hpp"
#include "enzyrx/harness.hpp"

using namespace enzyrx;

namespace {

LlrTrace constant_trace(const std::vector<double>& grid, double v) {
  return {Estimator::kappa, grid, std::vector<double>(grid.size(), v)};
}

std::string metrics_csv(const ExperimentResult& r) {
  std::ostringstream s;
  r.metrics.write_csv(s);
  return s.str();
}

Scenario short_scenario(std::size_t trials, double duration) {
  Scenario s = scenario_preset("tx-setting-1");
  s.trials = trials;
  s.symbol_duration = duration;
  s.steady_from = 1.0;
  s.compare_from = 1.0;
  s.threads = 1;
  return s;
}

}  // namespace

TEST_CASE("rmse") {
  const auto grid = time_grid(2.0);
  const std::vector<LlrTrace> a{constant_trace(grid, 1.0), constant_trace(grid, 3.0)};
  SUBCASE("identical traces") {
    for (double v : rmse(a, a)) CHECK(v == 0.0);
  }
  SUBCASE("constant offset") {
    const std::vector<LlrTrace> b{constant_trace(grid, 1.5), constant_trace(grid, 3.5)};
    for (double v : rmse(a, b)) CHECK(v == doctest::Approx(0.5));
  }
  SUBCASE("per-time root mean square") {
    const std::vector<LlrTrace> b{constant_trace(grid, 0.0), constant_trace(grid, 0.0)};
    for (double v : rmse(a, b)) CHECK(v == doctest::Approx(std::sqrt(5.0)));
  }
  SUBCASE("mismatch") {
    const std::vector<LlrTrace> one{constant_trace(grid, 0.0)};
    CHECK_THROWS_AS(rmse(a, one), InvalidReference);
    const std::vector<LlrTrace> other{constant_trace(time_grid(3.0), 0.0),
                                      constant_trace(time_grid(3.0), 0.0)};
    CHECK_THROWS_AS(rmse(a, other), InvalidReference);
  }
}

TEST_CASE("bit error rate and Wilson interval") {
  const std::vector<int> zeros(10, 0), ones(10, 1);
  SUBCASE("all correct") {
    const BerEstimate b = ber(zeros, ones);
    CHECK(b.rate == 0.0);
    CHECK(b.ci.lo == 0.0);
    // 20 trials with no errors: z^2/(n + z^2).
    const double z2 = 1.959963984540054 * 1.959963984540054;
    CHECK(b.ci.hi == doctest::Approx(z2 / (20.0 + z2)));
  }
  SUBCASE("always deciding zero") {
    const BerEstimate b = ber(zeros, zeros);
    CHECK(b.rate == 0.5);
    CHECK(b.errors1 == 10);
  }
  SUBCASE("unequal trial counts keep equal priors") {
    const std::vector<int> d0{1, 0, 0, 0};
    const std::vector<int> d1{1, 1};
    CHECK(ber(d0, d1).rate == doctest::Approx(0.125));
  }
  SUBCASE("reference interval") {
    // Wilson interval for 50/100 from the closed form by hand.
    const Interval w = wilson_interval(0.5, 100);
    CHECK(w.lo == doctest::Approx(0.40383).epsilon(1e-4));
    CHECK(w.hi == doctest::Approx(0.59617).epsilon(1e-4));
  }
  CHECK_THROWS_AS(ber(std::vector<int>{}, ones), InvalidReference);
}

TEST_CASE("mean with a normal interval") {
  const std::vector<double> one{3.0};
  CHECK(std::isnan(mean_ci(one).half_width));
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const MeanEstimate m = mean_ci(xs);
  CHECK(m.mean == 2.5);
  CHECK(m.half_width == doctest::Approx(1.959963984540054 * std::sqrt(5.0 / 3.0) / 2.0));
  std::vector<double> permuted{4.0, 1.0, 3.0, 2.0};
  CHECK(mean_ci(permuted).mean == m.mean);
}

TEST_CASE("metric table lookup and csv") {
  MetricTable t;
  MetricRow r;
  r.experiment = "ber";
  r.metric = "ber";
  r.estimator = "circuit";
  r.receiver = "rx";
  r.decision_time = 12.5;
  r.value = 0.25;
  r.n = 4;
  t.add(r);
  CHECK(t.value({"ber", -1, "circuit", "rx", 12.5}) == 0.25);
  CHECK_FALSE(t.find({"ber", -1, "circuit", "rx", 13.0}));
  CHECK_THROWS_AS(t.get({"missing"}), InvalidReference);
  std::ostringstream s;
  t.write_csv(s);
  CHECK(s.str().find("ber,,circuit,rx,12.5,ber,0.25,,,,4") != std::string::npos);
}

TEST_CASE("scenario presets and JSON") {
  CHECK(scenario_presets().size() == 2);
  const Scenario s2 = scenario_preset("tx-setting-2");
  CHECK(s2.tx.mrna[0] == 32.0);
  CHECK(s2.tx.mrna[1] == 96.0);
  CHECK(s2.design_th);
  CHECK_THROWS_AS(scenario_preset("tx-setting-3"), ConfigError);

  const nlohmann::json j = {
      {"preset", "tx-setting-1"},
      {"trials", 7},
      {"seed", 99},
      {"receivers",
       {{{"name", "a"}, {"voxel", {5, 3, 2}}},
        {{"name", "b"}, {"voxel", {4, 5, 2}}, {"integrator_mode", "catalytic"}}}},
      {"decision_times", {0.0, 15.0, 30.0}}};
  const Scenario s = scenario_from_json(j);
  CHECK(s.trials == 7);
  CHECK(s.seed == 99);
  REQUIRE(s.receivers.size() == 2);
  CHECK(s.receivers[1].voxel == Voxel{4, 5, 2});
  CHECK(s.receivers[1].mode == IntegratorMode::catalytic);
  CHECK(s.decisions().size() == 3);

  const Scenario back = scenario_from_json(to_json(s));
  CHECK(back.trials == s.trials);
  CHECK(back.receivers.size() == 2);
  CHECK(back.receivers[1].params.th.a1 == s.receivers[1].params.th.a1);
  CHECK(back.decisions() == s.decisions());

  CHECK_THROWS_AS(scenario_from_json({{"decision_times", {40.0}}}), ConfigError);
  CHECK_THROWS_AS(scenario_from_json({{"trials", 0}}), ConfigError);
  CHECK_THROWS_AS(scenario_from_json({{"receivers", {{{"integrator_mode", "x"}}}}}),
                  ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST_CASE("resolving a scenario designs the second setting") {
  const ResolvedScenario r1 = resolve(scenario_preset("tx-setting-1"));
  CHECK(r1.design_rules.empty());
  CHECK(r1.demod.k_ss[1] == doctest::Approx(40.0).epsilon(0.15));
  const ResolvedScenario r2 = resolve(scenario_preset("tx-setting-2"));
  CHECK_FALSE(r2.design_rules.empty());
  const ThCycleParams& th = r2.scenario.receivers[0].params.th;
  CHECK(th.p_total == std::round(th.p_total));
  const ThCoefficients c = th_coefficients(th, 37.0, r2.scenario.omega());
  CHECK(c.threshold() > r2.demod.k_ss[0]);
  CHECK(c.threshold() < r2.demod.k_ss[1]);
}

TEST_CASE("trial seeds are distinct across streams and symbols") {
  const SeedSpec a = trial_seed(1, TrialStream::medium_receiver, 0, 5);
  const SeedSpec b = trial_seed(1, TrialStream::medium_receiver, 1, 5);
  const SeedSpec c = trial_seed(1, TrialStream::one_voxel, 0, 5);
  CHECK(a.trial != b.trial);
  CHECK(a.trial != c.trial);
  CHECK(a.master == 1);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw ConfigError("boom");
                               }),
                  ConfigError);
}

TEST_CASE("experiments are reproducible and order independent") {
  Scenario s = short_scenario(3, 4.0);
  const std::string a = metrics_csv(run_experiment("circuit-compare", s));
  const std::string b = metrics_csv(run_experiment("circuit-compare", s));
  CHECK(a == b);
  s.threads = 3;
  CHECK(metrics_csv(run_experiment("circuit-compare", s)) == a);
  s.seed = 1;
  CHECK(metrics_csv(run_experiment("circuit-compare", s)) != a);
}

TEST_CASE("single trial leaves intervals undefined") {
  const ExperimentResult r = run_experiment("ber", short_scenario(1, 3.0));
  for (const auto& row : r.metrics.rows()) {
    CHECK(row.n <= 2);
    if (row.metric == "ber") CHECK(std::isnan(row.ci_half_width));
  }
  CHECK(r.metrics.value({"ber", -1, "circuit", "rx", 0.0}) == 0.5);
}

TEST_CASE("ber rows cover every decision time and estimator") {
  Scenario s = short_scenario(6, 12.0);
  s.threshold = 3.0;
  const ExperimentResult r = run_experiment("ber", s);
  for (double t : s.decisions()) {
    CAPTURE(t);
    for (const char* est : {"circuit", "kappa"}) {
      const double e0 = r.metrics.value({"error_rate", 0, est, "rx", t});
      const double e1 = r.metrics.value({"error_rate", 1, est, "rx", t});
      const double b = r.metrics.value({"ber", -1, est, "rx", t});
      CHECK(b == doctest::Approx(0.5 * (e0 + e1)));
      CHECK(b >= 0.0);
      CHECK(b <= 1.0);
    }
  }
  // Nothing has accumulated at t = 0, so every decision is symbol 0.
  CHECK(r.metrics.value({"error_rate", 1, "circuit", "rx", 0.0}) == 1.0);
}

TEST_CASE("design-check output and files") {
  const ExperimentResult r = run_experiment("design-check", scenario_preset("tx-setting-1"));
  CHECK(r.metrics.value({"a1", -1, "regression"}) == doctest::Approx(0.0463).epsilon(0.01));
  CHECK(r.metrics.value({"impedance_pass"}) == 1.0);
  REQUIRE(r.documents.count("receiver_params") == 1);
  const auto dir = std::filesystem::temp_directory_path() / "enzyrx_design_check";
  std::filesystem::remove_all(dir);
  write_outputs(r, scenario_preset("tx-setting-1"), dir);
  CHECK(std::filesystem::exists(dir / "metrics.csv"));
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(std::filesystem::exists(dir / "traces"));
  const ReceiverParams p = load_receiver_params(dir / "receiver_params.json");
  CHECK(p.th.a1 == presets::th_cycle().a1);
  std::ifstream in(dir / "summary.json");
  const nlohmann::json summary = nlohmann::json::parse(in);
  CHECK(summary.at("experiment") == "design-check");
  std::filesystem::remove_all(dir);
}

TEST_CASE("infeasible design surfaces as a designer error") {
  Scenario s = scenario_preset("tx-setting-2");
  s.receivers[0].params.front.x_total = 5;
  CHECK_THROWS_AS(run_experiment("design-check", s), InfeasibleDesign);
  CHECK_THROWS_AS(run_experiment("nonsense", scenario_preset("tx-setting-1")), InvalidReference);
}
