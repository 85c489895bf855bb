#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "enzyrx/demod.hpp"
#include "enzyrx/receiver.hpp"

namespace enzyrx {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- metrics

struct MetricRow {
  std::string experiment;
  int symbol = -1;  // -1 when pooled over symbols or not symbol specific
  std::string estimator;
  std::string receiver;
  double decision_time = kNaN;
  std::string metric;
  double value = 0.0;
  double ci_half_width = kNaN;  // NaN when undefined (N = 1) or not computed
  double ci_lo = kNaN;
  double ci_hi = kNaN;
  std::size_t n = 0;
};

struct MetricQuery {
  std::string metric;
  int symbol = -1;
  std::string estimator;
  std::string receiver;
  double decision_time = kNaN;  // NaN matches rows without a decision time
};

class MetricTable {
public:
  void add(MetricRow row) { rows_.push_back(std::move(row)); }
  const std::vector<MetricRow>& rows() const noexcept { return rows_; }

  std::optional<MetricRow> find(const MetricQuery& q) const;
  // Throws InvalidReference when absent.
  const MetricRow& get(const MetricQuery& q) const;
  double value(const MetricQuery& q) const { return get(q).value; }

  // Columns experiment,symbol,estimator,receiver,decision_time,metric,value,
  // ci_half_width,ci_lo,ci_hi,n; undefined entries are left empty.
  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;

private:
  std::vector<MetricRow> rows_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// 95% Wilson score interval for a proportion p observed over n trials.
Interval wilson_interval(double p, std::size_t n, double z = 1.959963984540054);

// Sample mean with a normal-approximation 95% half-width (NaN for n < 2).
struct MeanEstimate {
  double mean = 0.0;
  double half_width = kNaN;
  std::size_t n = 0;
};
MeanEstimate mean_ci(std::span<const double> xs);

// Per grid time sqrt(mean over trials of (a - b)^2). Throws InvalidReference
// on mismatched trial counts or grids.
std::vector<double> rmse(std::span<const LlrTrace> a, std::span<const LlrTrace> b);

struct BerEstimate {
  double rate = 0.0;
  Interval ci;
  std::size_t errors0 = 0;
  std::size_t trials0 = 0;
  std::size_t errors1 = 0;
  std::size_t trials1 = 0;

  double half_width() const { return std::max(rate - ci.lo, ci.hi - rate); }
};

// Decisions made when symbol 0 (resp. 1) was sent; equal priors. Throws
// InvalidReference when either list is empty.
BerEstimate ber(std::span<const int> decided_when0, std::span<const int> decided_when1);

// Named columns of equal length, written as CSV.
struct TraceTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // data[column][row]

  void add(std::string name, std::vector<double> values);
  void write_csv(std::ostream& out) const;
};

// --------------------------------------------------------------- scenario

struct Scenario {
  std::string name = "tx-setting-1";
  std::array<int, 3> dims = presets::kMediumDims;
  double edge = presets::kVoxelEdge;
  double diffusion = presets::kDiffusion;
  std::optional<double> escape_per_face;
  TxSetting tx = presets::tx_setting_1();
  Voxel tx_voxel = presets::kTxVoxel;
  std::vector<ReceiverPlacement> receivers{ReceiverPlacement{}};
  // Design a TH-cycle for this transmitter setting instead of using the
  // receiver parameters as given.
  bool design_th = false;
  double symbol_duration = presets::kSymbolDuration;
  double threshold = presets::kDecisionThreshold;
  double grid_step = 0.1;
  std::vector<double> decision_times;  // empty: every 0.5 s up to the duration
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  // Exact filter settings on the single-voxel medium.
  double filter_tail = 1e-9;
  std::size_t filter_max_states = 3000;
  FilterOptions filter;
  std::vector<int> exact_llr_symbols{0, 1};
  // Time window of the steady-state averages in the impedance experiment.
  double steady_from = 5.0;
  // Window of the circuit-vs-log-ratio comparison.
  double compare_from = 15.0;

  VoxelLattice lattice() const;
  std::vector<double> decisions() const;
  std::vector<double> grid() const { return time_grid(symbol_duration, grid_step); }
  double omega() const { return edge * edge * edge; }
};

std::vector<std::string> scenario_presets();
Scenario scenario_preset(std::string_view name);  // throws ConfigError if unknown

// A JSON document may name a "preset" and override any field.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);
// Either a preset name or a path to a JSON file.
Scenario load_scenario(const std::string& preset_or_path);

// Scenario with designer output applied: receiver TH-cycles designed when
// requested. Throws InfeasibleDesign or RegimeError from the designer.
struct ResolvedScenario {
  Scenario scenario;
  AlphaCoeffs alpha;
  DemodParams demod;  // medium, receiver 0
  std::vector<std::pair<std::string, std::string>> design_rules;
};
ResolvedScenario resolve(const Scenario& s);

// ------------------------------------------------------------- experiments

struct ExperimentResult {
  std::string experiment;
  MetricTable metrics;
  std::map<std::string, TraceTable> traces;       // written to traces/<key>.csv
  std::map<std::string, nlohmann::json> documents;  // written to <key>.json
  nlohmann::json summary;
};

std::vector<std::string> experiment_names();

// Throws InvalidReference for an unknown name; designer failures propagate.
ExperimentResult run_experiment(std::string_view name, const Scenario& scenario);

void write_outputs(const ExperimentResult& result, const Scenario& scenario,
                   const std::filesystem::path& out_dir);

// Stream identifiers keep trial seeds distinct across the kinds of runs.
enum class TrialStream : std::uint64_t {
  medium_front_end = 1,
  medium_receiver = 2,
  one_voxel = 3,
};
SeedSpec trial_seed(std::uint64_t master, TrialStream stream, int symbol, std::size_t index);

// Runs fn(i) for i in [0, n) on up to `threads` workers; the first exception
// is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// Single-voxel demodulator constants: K feedback and transmitter coupling both
// equal the mean residence time 1/escape.
AlphaCoeffs one_voxel_alpha(const OneVoxelModel& m);

}  // namespace enzyrx
