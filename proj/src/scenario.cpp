#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "enzyrx/designer.hpp"
#include "enzyrx/errors.hpp"
#include "enzyrx/harness.hpp"

namespace enzyrx {

using nlohmann::json;

VoxelLattice Scenario::lattice() const {
  return VoxelLattice(dims, edge, diffusion, escape_per_face);
}

std::vector<double> Scenario::decisions() const {
  if (!decision_times.empty()) return decision_times;
  return time_grid(symbol_duration, 0.5);
}

std::vector<std::string> scenario_presets() { return {"tx-setting-1", "tx-setting-2"}; }

Scenario scenario_preset(std::string_view name) {
  Scenario s;
  if (name == "tx-setting-1") return s;
  if (name == "tx-setting-2") {
    s.name = "tx-setting-2";
    s.tx = presets::tx_setting_2();
    s.design_th = true;
    return s;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

namespace {

IntegratorMode mode_from_string(const std::string& m) {
  if (m == "pair-and-suspend") return IntegratorMode::pair_and_suspend;
  if (m == "catalytic") return IntegratorMode::catalytic;
  throw ConfigError("integrator_mode must be 'pair-and-suspend' or 'catalytic', got '" + m + "'");
}

std::string to_string(IntegratorMode m) {
  return m == IntegratorMode::catalytic ? "catalytic" : "pair-and-suspend";
}

json voxel_json(const Voxel& v) { return json::array({v.x, v.y, v.z}); }

void validate(const Scenario& s) {
  if (s.trials < 1) throw ConfigError("trials must be at least 1");
  if (!(s.symbol_duration > 0.0)) throw ConfigError("symbol_duration must be positive");
  if (!(s.grid_step > 0.0)) throw ConfigError("grid_step must be positive");
  if (s.receivers.empty()) throw ConfigError("at least one receiver is required");
  for (double t : s.decisions())
    if (t < 0.0 || t > s.symbol_duration + 1e-9)
      throw ConfigError("decision times must lie in [0, symbol_duration]");
  for (int sym : s.exact_llr_symbols)
    if (sym != 0 && sym != 1) throw ConfigError("exact_llr_symbols holds 0 and 1 only");
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s = scenario_preset(j.value("preset", std::string("tx-setting-1")));
    s.name = j.value("name", s.name);
    if (j.contains("medium")) {
      const json& m = j.at("medium");
      if (m.contains("dims")) s.dims = m.at("dims").get<std::array<int, 3>>();
      s.edge = m.value("edge", s.edge);
      s.diffusion = m.value("diffusion", s.diffusion);
      if (m.contains("escape_per_face")) s.escape_per_face = m.at("escape_per_face").get<double>();
    }
    if (j.contains("transmitter")) {
      const json& t = j.at("transmitter");
      s.tx.name = t.value("name", s.tx.name);
      s.tx.r_tx = t.value("r_tx", s.tx.r_tx);
      if (t.contains("mrna")) s.tx.mrna = t.at("mrna").get<std::array<double, 2>>();
      if (t.contains("voxel")) s.tx_voxel = voxel_from_json(t.at("voxel"));
    }
    if (j.contains("receivers")) {
      s.receivers.clear();
      std::size_t idx = 0;
      for (const json& r : j.at("receivers")) {
        ReceiverPlacement p;
        p.name = r.value("name", idx == 0 ? std::string("rx") : "rx" + std::to_string(idx));
        if (r.contains("voxel")) p.voxel = voxel_from_json(r.at("voxel"));
        if (r.contains("params_file"))
          p.params = load_receiver_params(r.at("params_file").get<std::string>());
        if (r.contains("params")) p.params = receiver_params_from_json(r.at("params"));
        p.mode = mode_from_string(r.value("integrator_mode", std::string("pair-and-suspend")));
        s.receivers.push_back(std::move(p));
        ++idx;
      }
    }
    s.design_th = j.value("design_th", s.design_th);
    s.symbol_duration = j.value("symbol_duration", s.symbol_duration);
    s.threshold = j.value("threshold", s.threshold);
    s.grid_step = j.value("grid_step", s.grid_step);
    if (j.contains("decision_times"))
      s.decision_times = j.at("decision_times").get<std::vector<double>>();
    s.trials = j.value("trials", s.trials);
    s.seed = j.value("seed", s.seed);
    s.threads = j.value("threads", s.threads);
    if (j.contains("filter")) {
      const json& f = j.at("filter");
      s.filter_tail = f.value("tail", s.filter_tail);
      s.filter_max_states = f.value("max_states", s.filter_max_states);
      s.filter.grid_step = f.value("grid_step", s.filter.grid_step);
      s.filter.max_block = f.value("max_block", s.filter.max_block);
    }
    if (j.contains("exact_llr_symbols"))
      s.exact_llr_symbols = j.at("exact_llr_symbols").get<std::vector<int>>();
    s.steady_from = j.value("steady_from", s.steady_from);
    s.compare_from = j.value("compare_from", s.compare_from);
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
}

json to_json(const Scenario& s) {
  json medium{{"dims", s.dims}, {"edge", s.edge}, {"diffusion", s.diffusion}};
  if (s.escape_per_face) medium["escape_per_face"] = *s.escape_per_face;
  json receivers = json::array();
  for (const auto& r : s.receivers)
    receivers.push_back({{"name", r.name},
                         {"voxel", voxel_json(r.voxel)},
                         {"integrator_mode", to_string(r.mode)},
                         {"params", to_json(r.params)}});
  return {{"name", s.name},
          {"medium", medium},
          {"transmitter",
           {{"name", s.tx.name}, {"r_tx", s.tx.r_tx}, {"mrna", s.tx.mrna},
            {"voxel", voxel_json(s.tx_voxel)}}},
          {"receivers", receivers},
          {"design_th", s.design_th},
          {"symbol_duration", s.symbol_duration},
          {"threshold", s.threshold},
          {"grid_step", s.grid_step},
          {"decision_times", s.decisions()},
          {"trials", s.trials},
          {"seed", s.seed},
          {"filter",
           {{"tail", s.filter_tail}, {"max_states", s.filter_max_states},
            {"grid_step", s.filter.grid_step}, {"max_block", s.filter.max_block}}},
          {"exact_llr_symbols", s.exact_llr_symbols},
          {"steady_from", s.steady_from},
          {"compare_from", s.compare_from}};
}

Scenario load_scenario(const std::string& preset_or_path) {
  for (const auto& p : scenario_presets())
    if (p == preset_or_path) return scenario_preset(p);
  std::ifstream in(preset_or_path);
  if (!in) throw ConfigError("'" + preset_or_path + "' is neither a preset nor a readable file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + preset_or_path + ": " + e.what());
  }
  return scenario_from_json(j);
}

ResolvedScenario resolve(const Scenario& s) {
  validate(s);
  ResolvedScenario r;
  r.scenario = s;
  const VoxelLattice lat = s.lattice();
  r.alpha = alpha_coeffs(lat, s.tx_voxel, s.receivers.front().voxel);
  if (s.design_th) {
    // Identical receivers: every placement gets the cycle designed for the
    // first receiver's location.
    const ReceiverDesign d =
        design_receiver(s.tx, r.alpha, s.omega(), s.receivers.front().params);
    for (auto& p : r.scenario.receivers) {
      p.params.th = d.params.th;
      p.params.provenance = d.params.provenance;
    }
    r.design_rules = d.rules;
  }
  r.demod = derive_demod_params(r.scenario.receivers.front().params.front, s.tx, r.alpha,
                                s.omega());
  return r;
}

SeedSpec trial_seed(std::uint64_t master, TrialStream stream, int symbol, std::size_t index) {
  const std::uint64_t trial = (static_cast<std::uint64_t>(stream) << 48) |
                              (static_cast<std::uint64_t>(symbol) << 40) |
                              static_cast<std::uint64_t>(index);
  return {master, trial};
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

AlphaCoeffs one_voxel_alpha(const OneVoxelModel& m) {
  return {1.0 / m.escape_rate, 1.0 / m.escape_rate};
}

}  // namespace enzyrx
