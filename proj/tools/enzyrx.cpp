#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "enzyrx/errors.hpp"
#include "enzyrx/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kInfeasible = 2;

std::string joined(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enzymatic molecular-communication receiver experiments"};
  std::string experiment;
  std::string config = "tx-setting-1";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<unsigned> threads;
  std::string out_dir = "out";

  app.add_option("experiment", experiment, "One of: " + joined(enzyrx::experiment_names()))
      ->required()
      ->check(CLI::IsMember(enzyrx::experiment_names()));
  app.add_option("--config", config,
                 "Scenario JSON file or preset (" + joined(enzyrx::scenario_presets()) + ")")
      ->capture_default_str();
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--trials", trials, "Trials per symbol (overrides the config)")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "Worker threads, 0 for all cores");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInternal;
  }

  try {
    enzyrx::Scenario scenario = enzyrx::load_scenario(config);
    if (seed) scenario.seed = *seed;
    if (trials) scenario.trials = *trials;
    if (threads) scenario.threads = *threads;
    const auto start = std::chrono::steady_clock::now();
    enzyrx::ExperimentResult result = enzyrx::run_experiment(experiment, scenario);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    result.summary["wall_seconds"] = wall.count();
    enzyrx::write_outputs(result, scenario, out_dir);
    std::cout << experiment << ": " << result.metrics.rows().size() << " metrics, "
              << result.traces.size() << " traces written to " << out_dir << " in "
              << wall.count() << " s\n";
    return kOk;
  } catch (const enzyrx::InfeasibleDesign& e) {
    std::cerr << "infeasible scenario: " << e.what() << '\n';
    return kInfeasible;
  } catch (const enzyrx::RegimeError& e) {
    std::cerr << "infeasible scenario: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
}
