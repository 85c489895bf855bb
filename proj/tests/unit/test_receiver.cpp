#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "enzyrx/errors.hpp"
#include "enzyrx/kinetics.hpp"
#include "enzyrx/receiver.hpp"

using namespace enzyrx;

namespace {

const double kOmega = 1.0 / 27.0;

std::int64_t sum(const SystemState& s, const std::vector<PopIndex>& pops) {
  std::int64_t n = 0;
  for (PopIndex p : pops) n += s[p];
  return n;
}

// One-voxel TH-cycle with K_T clamped through a conservation law.
struct ClampedTh {
  std::shared_ptr<const CompiledNetwork> net;
  SystemState init;
  PopIndex ys = 0;
};

ClampedTh clamped_th(const ThCycleParams& th, std::int64_t k_total) {
  NetworkSpec spec(VoxelLattice({1, 1, 1}, 1.0 / 3.0, 0.0));
  const SpeciesId k = spec.add_species({"K", Mobility::immobile, 0});
  const ThCycleSpecies s = build_th_cycle(spec, k, 0, th, 37);
  spec.conservation.push_back({"K_T", {{{k, 0}, 1}, {{s.yk, 0}, 1}}, k_total});
  ClampedTh c;
  c.net = std::make_shared<const CompiledNetwork>(compile(spec));
  c.init = c.net->zero_state();
  c.init[c.net->population(k, 0)] = k_total;
  c.init[c.net->population(s.y, 0)] = 37;
  c.init[c.net->population(s.p, 0)] = static_cast<std::int64_t>(th.p_total);
  c.ys = c.net->population(s.ys, 0);
  return c;
}

}  // namespace

TEST_CASE("channel enumeration") {
  NetworkSpec spec(presets::medium());
  const SpeciesId k = spec.add_species({"K", Mobility::diffusing, std::nullopt});
  const ReceiverSpecies r = build_receiver(spec, k, ReceiverPlacement{});
  // 4 front-end x 4 y-states + 6 TH x 3 x-states + 3 binding + 3 dephosphorylation.
  CHECK(r.reaction_count == 40);
  CHECK(spec.species.size() == 1 + 13 + 5);
  CHECK(spec.conservation.size() == 4);
  const CompiledNetwork net = compile(spec);
  CHECK(net.count_kind(ChannelKind::reaction) == 40);
  CHECK(net.count_kind(ChannelKind::diffusion) == 504);
  CHECK(net.count_kind(ChannelKind::escape) == 144);

  ReceiverPlacement cat;
  cat.mode = IntegratorMode::catalytic;
  NetworkSpec spec2(presets::medium());
  const SpeciesId k2 = spec2.add_species({"K", Mobility::diffusing, std::nullopt});
  const ReceiverSpecies r2 = build_receiver(spec2, k2, cat);
  CHECK(r2.reaction_count == 38);
  CHECK_FALSE(r2.pair.has_value());
}

TEST_CASE("multiple receivers") {
  ReceiverPlacement a;
  a.name = "rx0";
  ReceiverPlacement b;
  b.name = "rx1";
  b.voxel = {4, 5, 2};
  SUBCASE("two receivers double the receiver channels") {
    NetworkSpec spec(presets::medium());
    const SpeciesId k = spec.add_species({"K", Mobility::diffusing, std::nullopt});
    const std::vector<ReceiverPlacement> both{a, b};
    const auto rs = place_multiple(spec, k, both);
    REQUIRE(rs.size() == 2);
    const CompiledNetwork net = compile(spec);
    CHECK(net.count_kind(ChannelKind::reaction) == 80);
    CHECK(net.count_kind(ChannelKind::diffusion) == 504);
    CHECK(net.population("rx1:J*", {4, 5, 2}) != net.population("rx0:J*", presets::kRxVoxel));
  }
  SUBCASE("one receiver matches build_receiver") {
    NetworkSpec s1(presets::medium());
    const SpeciesId k1 = s1.add_species({"K", Mobility::diffusing, std::nullopt});
    place_multiple(s1, k1, std::vector<ReceiverPlacement>{a});
    NetworkSpec s2(presets::medium());
    const SpeciesId k2 = s2.add_species({"K", Mobility::diffusing, std::nullopt});
    build_receiver(s2, k2, a);
    CHECK(compile(s1).channels() == compile(s2).channels());
  }
  SUBCASE("overlap is rejected") {
    NetworkSpec spec(presets::medium());
    const SpeciesId k = spec.add_species({"K", Mobility::diffusing, std::nullopt});
    b.voxel = a.voxel;
    CHECK_THROWS_AS(place_multiple(spec, k, std::vector<ReceiverPlacement>{a, b}),
                    UnsupportedConfiguration);
  }
  SUBCASE("bad voxel") {
    NetworkSpec spec(presets::medium());
    const SpeciesId k = spec.add_species({"K", Mobility::diffusing, std::nullopt});
    b.voxel = {7, 1, 1};
    CHECK_THROWS_AS(build_receiver(spec, k, b), InvalidReference);
  }
}

TEST_CASE("conservation holds at every event") {
  SystemConfig cfg;
  cfg.receivers[0].name = "rx0";
  ReceiverPlacement second;
  second.name = "rx1";
  second.voxel = {5, 5, 2};
  cfg.receivers.push_back(second);
  const System sys = build_system(cfg);
  const Trajectory tr = ssa_run(sys.net, sys.initial, 3.0, {11, 0});
  SystemState s = sys.initial;
  std::size_t checked = 0;
  for (const Event& e : tr.events()) {
    sys.net->fire(e.channel, s);
    sys.net->validate_state(s);
    ++checked;
  }
  CHECK(checked > 1000);
  CHECK(s == tr.final_state());
  for (const auto& r : sys.receivers) CHECK(sum(s, r.xy_all) == 37);
}

TEST_CASE("empty receiver and silent transmitter") {
  SUBCASE("X_T = 0") {
    SystemConfig cfg;
    cfg.receivers[0].params.front.x_total = 0;
    const System sys = build_system(cfg);
    const Trajectory tr = ssa_run(sys.net, sys.initial, 5.0, {1, 0}, sys.record_spec());
    const LlrTrace out = circuit_output(tr, sys.receivers[0], time_grid(5.0));
    CHECK(std::all_of(out.values.begin(), out.values.end(), [](double v) { return v == 0.0; }));
  }
  SUBCASE("no mRNA") {
    SystemConfig cfg;
    cfg.tx.mrna = {0.0, 0.0};
    const System sys = build_system(cfg);
    const Trajectory tr = ssa_run(sys.net, sys.initial, 30.0, {1, 0}, sys.record_spec());
    const LlrTrace out = circuit_output(tr, sys.receivers[0], time_grid(30.0));
    CHECK(out.estimator == Estimator::circuit);
    CHECK(std::all_of(out.values.begin(), out.values.end(), [](double v) { return v == 0.0; }));
    CHECK(tr.simulated_events() == 0);
  }
}

TEST_CASE("symbol-1 output rises and rarely steps back") {
  SystemConfig cfg;
  const System sys = build_system(cfg);
  const auto& labels = sys.net->channels();
  std::uint64_t k3 = 0;
  std::uint64_t k4 = 0;
  std::vector<double> terminal;
  for (std::uint64_t trial = 0; trial < 4; ++trial) {
    const Trajectory tr = ssa_run(sys.net, sys.initial, 30.0, {5, trial}, sys.record_spec());
    for (const Event& e : tr.events()) {
      if (labels[e.channel].label == "rx:k3") ++k3;
      if (labels[e.channel].label == "rx:k4") ++k4;
    }
    const LlrTrace out = circuit_output(tr, sys.receivers[0], time_grid(30.0));
    terminal.push_back(out.values.back());
    CHECK(out.value_at(30.0) > out.value_at(15.0));
  }
  CHECK(k3 > 100);
  CHECK(static_cast<double>(k4) < 0.02 * static_cast<double>(k3));
}

TEST_CASE("front-end-only system observes the bare cycle") {
  SystemConfig cfg;
  cfg.kind = ReceiverKind::front_end;
  const System sys = build_system(cfg);
  CHECK(sys.net->count_kind(ChannelKind::reaction) == 4);
  const auto& r = sys.receivers[0];
  CHECK(r.xs.size() == 1);
  CHECK_FALSE(r.js.has_value());
  const Trajectory tr = ssa_run(sys.net, sys.initial, 10.0, {2, 0}, sys.record_spec());
  const Observation obs = observed_activations(tr, r);
  CHECK(obs.initial == 0);
  CHECK(!obs.times.empty());
  CHECK_THROWS_AS(circuit_output(tr, r, time_grid(10.0)), InvalidReference);
}

TEST_CASE("clamped TH-cycle mean follows the threshold-hyperbolic curve") {
  // RRE steady state of the bare cycle against h0 - h1/K_T with the published
  // constants (threshold about 24.7).
  const ThCycleParams th = presets::th_cycle();
  const ThCoefficients c = th_coefficients(th, 37.0, kOmega);
  const std::vector<double> grid{0.0, 200.0};
  for (std::int64_t kt : {35, 40, 50, 80}) {
    const ClampedTh sys = clamped_th(th, kt);
    std::vector<double> init(sys.init.begin(), sys.init.end());
    const MeanTrajectory m = rre_solve(*sys.net, init, grid);
    const double ys = m.values.back()[sys.ys];
    const double target = th_function(static_cast<double>(kt), c.h0, c.h1);
    CAPTURE(kt);
    CHECK(std::abs(ys - target) / target < 0.15);
  }
  for (std::int64_t kt : {5, 10, 15}) {
    const ClampedTh sys = clamped_th(th, kt);
    std::vector<double> init(sys.init.begin(), sys.init.end());
    const MeanTrajectory m = rre_solve(*sys.net, init, grid);
    CAPTURE(kt);
    CHECK(m.values.back()[sys.ys] < 1.0);
  }
}

TEST_CASE("system configuration errors") {
  SystemConfig cfg;
  cfg.symbol = 2;
  CHECK_THROWS_AS(build_system(cfg), InvalidReference);
  SystemConfig half;
  half.receivers[0].params.th.p_total = 10.5;
  CHECK_THROWS_AS(build_system(half), InvalidReference);
}
