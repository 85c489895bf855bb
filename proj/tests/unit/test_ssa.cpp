#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <cmath>
#include <sstream>

#include "enzyrx/errors.hpp"
#include "enzyrx/params.hpp"
#include "enzyrx/ssa.hpp"

using namespace enzyrx;
using Dir = PopulationSeries::Direction;

namespace {

// Single voxel with K produced at lambda and removed at mu.
std::shared_ptr<const CompiledNetwork> birth_death(double lambda, double mu) {
  NetworkSpec spec(build_medium({1, 1, 1}, 1.0, 0.0));
  const auto K = spec.add_species({"K", Mobility::immobile, 0});
  spec.reactions.push_back({"birth", {}, {{K, 0}}, lambda});
  if (mu > 0.0) spec.reactions.push_back({"death", {{K, 0}}, {}, mu});
  return std::make_shared<const CompiledNetwork>(compile(spec));
}

std::shared_ptr<const CompiledNetwork> front_end_medium(double mrna) {
  const VoxelLattice lat = presets::medium();
  NetworkSpec spec(lat);
  const std::size_t h = lat.index(presets::kRxVoxel);
  const auto K = spec.add_species({"K", Mobility::diffusing, std::nullopt});
  const auto X = spec.add_species({"X", Mobility::immobile, h});
  const auto XK = spec.add_species({"XK", Mobility::immobile, h});
  const auto Xs = spec.add_species({"X*", Mobility::immobile, h});
  const FrontEndParams p;
  spec.reactions.push_back({"bind", {{X, h}, {K, h}}, {{XK, h}}, p.a0});
  spec.reactions.push_back({"unbind", {{XK, h}}, {{X, h}, {K, h}}, p.d0});
  spec.reactions.push_back({"activate", {{XK, h}}, {{Xs, h}, {K, h}}, p.g0});
  spec.reactions.push_back({"revert", {{Xs, h}}, {{X, h}}, p.g_minus});
  spec.reactions.push_back(build_transmitter(lat, presets::kTxVoxel, 3.38, mrna, K));
  spec.conservation.push_back({"X_T", {{{X, h}, 1}, {{XK, h}, 1}, {{Xs, h}, 1}}, 37});
  return std::make_shared<const CompiledNetwork>(compile(spec));
}

SystemState front_end_init(const CompiledNetwork& net) {
  SystemState x = net.zero_state();
  x[net.population("X", presets::kRxVoxel)] = 37;
  return x;
}

}  // namespace

TEST_CASE("philox4x64-10 known answers") {
  // Reference values from numpy.random.Philox, whose first block is produced
  // from counter 1.
  const PhiloxBlock z = philox4x64_10({1, 0, 0, 0}, {0, 0});
  CHECK(z[0] == 0x02f4ba6408e4d89bULL);
  CHECK(z[1] == 0x3dd62b0b9ca8c5b2ULL);
  CHECK(z[2] == 0x1c8667a55d902e79ULL);
  CHECK(z[3] == 0x907d7a052fd5b4dcULL);
  const PhiloxBlock z2 = philox4x64_10({2, 0, 0, 0}, {0, 0});
  CHECK(z2[0] == 0x809bf322883987c3ULL);
  CHECK(z2[3] == 0xfc6ed66767a457bcULL);
  const PhiloxBlock k = philox4x64_10({1, 0, 0, 0}, {42, 7});
  CHECK(k[0] == 0xa64064f34e84b9a3ULL);
  CHECK(k[1] == 0xe287959a866a08fdULL);
  CHECK(k[2] == 0x8dc181f009b96c03ULL);
  CHECK(k[3] == 0xf3f6001d4fa83454ULL);
}

TEST_CASE("distinct seeds give distinct streams") {
  PhiloxEngine a({1, 0}), b({0, 1}), c({1, 0});
  const auto va = a(), vb = b(), vc = c();
  CHECK(va != vb);
  CHECK(va == vc);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform_pos();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("pure birth event counts are Poisson") {
  const double lambda = 324.48, T = 30.0;
  auto net = birth_death(lambda, 0.0);
  const int runs = 200;
  double sum = 0.0;
  for (int r = 0; r < runs; ++r) {
    const Trajectory tr = ssa_run(net, net->zero_state(), T, {11, static_cast<std::uint64_t>(r)});
    CHECK(tr.termination() == Termination::horizon);
    sum += static_cast<double>(tr.events().size());
  }
  const double mean = lambda * T;  // 9734.4
  const double sigma_of_mean = std::sqrt(mean / runs);
  CHECK(std::abs(sum / runs - mean) < 3.0 * sigma_of_mean);
}

TEST_CASE("no channels gives an empty event list") {
  NetworkSpec spec(build_medium({1, 1, 1}, 1.0, 0.0));
  const auto A = spec.add_species({"A", Mobility::immobile, 0});
  (void)A;
  auto net = std::make_shared<const CompiledNetwork>(compile(spec));
  SystemState x{4};
  const Trajectory tr = ssa_run(net, x, 10.0, {1, 0});
  CHECK(tr.events().empty());
  CHECK(tr.termination() == Termination::absorbed);
  CHECK(tr.count_at(0, 7.5) == 4);
  CHECK(tr.final_state() == x);
}

TEST_CASE("absorbing state ends the run early") {
  auto net = birth_death(0.0, 2.0);
  const Trajectory tr = ssa_run(net, SystemState{3}, 100.0, {5, 0});
  CHECK(tr.termination() == Termination::absorbed);
  CHECK(tr.events().size() == 3);
  CHECK(tr.end_time() < 100.0);
  CHECK(tr.count_at(0, 100.0) == 0);
}

TEST_CASE("bad inputs are rejected") {
  auto net = birth_death(1.0, 1.0);
  CHECK_THROWS_AS(ssa_run(net, SystemState{-1}, 1.0, {0, 0}), ConservationViolation);
  CHECK_THROWS_AS(ssa_run(net, SystemState{1, 2}, 1.0, {0, 0}), InvalidReference);
  CHECK_THROWS_AS(ssa_run(net, SystemState{0}, 0.0, {0, 0}), InvalidReference);
}

TEST_CASE("population series integrals") {
  const PopulationSeries constant({0.0}, {5}, 10.0);
  CHECK(constant.time_average(0.0, 10.0) == doctest::Approx(5.0));
  const PopulationSeries step({0.0, 1.0}, {0, 2}, 3.0);
  CHECK(step.time_average(0.0, 3.0) == doctest::Approx(4.0 / 3.0));
  CHECK(step.at(1.0) == 2);  // right-continuous
  CHECK(step.at(0.999) == 0);
  CHECK_THROWS_AS(step.time_average(2.0, 2.0), InvalidReference);

  const PopulationSeries path({0.0, 1.0, 2.0, 3.0, 4.0}, {0, 1, 2, 1, 2}, 5.0);
  CHECK(path.jump_times(Dir::up).size() == 3);
  CHECK(path.jump_times(Dir::down).size() == 1);
  CHECK(constant.jump_times(Dir::up).empty());
  CHECK(constant.jump_times(Dir::down).empty());
}

TEST_CASE("front-end run: determinism, conservation, jump times") {
  auto net = front_end_medium(320);
  const SystemState init = front_end_init(*net);
  const PopIndex xs = net->population("X*", presets::kRxVoxel);
  const PopIndex x = net->population("X", presets::kRxVoxel);
  const PopIndex xk = net->population("XK", presets::kRxVoxel);
  const RecordSpec rec = RecordSpec::only({x, xk, xs, net->population("K", presets::kRxVoxel)});

  const Trajectory a = ssa_run(net, init, 30.0, {2024, 3}, rec);
  const Trajectory b = ssa_run(net, init, 30.0, {2024, 3}, rec);
  CHECK(a.events() == b.events());
  const Trajectory c = ssa_run(net, init, 30.0, {2024, 4}, rec);
  CHECK(a.events() != c.events());

  // X_T holds after every recorded event (all X states are recorded).
  SystemState s = init;
  bool ok = true;
  double last = 0.0;
  for (const Event& e : a.events()) {
    net->fire(e.channel, s);
    ok = ok && s[x] + s[xk] + s[xs] == 37 && s[x] >= 0 && s[xk] >= 0 && s[xs] >= 0;
    ok = ok && e.time > last;
    last = e.time;
  }
  CHECK(ok);

  const auto up = a.series(xs).jump_times(Dir::up);
  const auto down = a.series(xs).jump_times(Dir::down);
  CHECK(static_cast<std::int64_t>(up.size()) - static_cast<std::int64_t>(down.size()) ==
        a.count_at(xs, 30.0) - a.count_at(xs, 0.0));
  std::vector<double> fired;
  for (const Event& e : a.events())
    if (net->channels()[e.channel].label == "activate") fired.push_back(e.time);
  CHECK(up == fired);

  const auto XsId = net->species_id("X*");
  const auto XKId = net->species_id("XK");
  const std::size_t rx = net->lattice().index(presets::kRxVoxel);
  // Steady state around 12 X* and one or two XK.
  double xs_avg = 0.0, xk_avg = 0.0;
  const int runs = 8;
  for (int r = 0; r < runs; ++r) {
    const Trajectory t = ssa_run(net, init, 30.0, {7, static_cast<std::uint64_t>(r)}, rec);
    xs_avg += time_average(t, XsId, rx, 10.0, 30.0) / runs;
    xk_avg += time_average(t, XKId, rx, 10.0, 30.0) / runs;
  }
  CHECK(xs_avg == doctest::Approx(12.75).epsilon(0.15));
  CHECK(xk_avg > 0.3);
  CHECK(xk_avg < 2.5);

  CHECK_THROWS_AS(a.count_at(net->population("K", presets::kTxVoxel), 1.0), InvalidReference);
}

TEST_CASE("birth-death stationary law is Poisson(lambda/mu)") {
  const double lambda = 12.0, mu = 1.0;
  auto net = birth_death(lambda, mu);
  // Chained short runs; consecutive samples are 6/mu apart, correlation e^-6.
  const int samples = 100000;
  SystemState x{12};
  std::vector<long> hist(80, 0);
  x = ssa_run(net, x, 10.0, {99, 0}, RecordSpec::only({})).final_state();
  for (int i = 0; i < samples; ++i) {
    x = ssa_run(net, x, 6.0, {99, static_cast<std::uint64_t>(i + 1)}, RecordSpec::only({}))
            .final_state();
    hist[static_cast<std::size_t>(std::min<std::int64_t>(x[0], 79))] += 1;
  }
  const boost::math::poisson_distribution<> pois(lambda / mu);
  // Bins with expected count >= 5; tails merged.
  double chi2 = 0.0;
  int bins = 0;
  long lo_obs = 0;
  double lo_exp = 0.0;
  int k = 0;
  for (; k < 79; ++k) {
    lo_obs += hist[k];
    lo_exp += samples * boost::math::pdf(pois, k);
    if (lo_exp >= 5.0) break;
  }
  chi2 += (lo_obs - lo_exp) * (lo_obs - lo_exp) / lo_exp;
  ++bins;
  for (++k; k < 79; ++k) {
    const double e = samples * boost::math::pdf(pois, k);
    const double tail = samples * boost::math::cdf(boost::math::complement(pois, k));
    if (tail < 5.0) {
      long o = 0;
      for (int j = k; j < 80; ++j) o += hist[j];
      const double et = e + tail;
      chi2 += (o - et) * (o - et) / et;
      ++bins;
      break;
    }
    chi2 += (hist[k] - e) * (hist[k] - e) / e;
    ++bins;
  }
  const boost::math::chi_squared_distribution<> ref(bins - 1);
  const double critical = boost::math::quantile(boost::math::complement(ref, 0.01));
  INFO("chi2 = " << chi2 << ", df = " << bins - 1 << ", critical = " << critical);
  CHECK(chi2 < critical);
}

TEST_CASE("exports round-trip") {
  auto net = front_end_medium(96);
  const PopIndex xs = net->population("X*", presets::kRxVoxel);
  const Trajectory tr = ssa_run(net, front_end_init(*net), 5.0, {3, 1}, RecordSpec::only({xs}));

  std::stringstream bin;
  write_binary_log(tr, bin);
  const Trajectory back = read_binary_log(net, bin);
  CHECK(back.events() == tr.events());
  CHECK(back.horizon() == tr.horizon());
  CHECK(back.simulated_events() == tr.simulated_events());
  CHECK(back.records(xs));
  CHECK_FALSE(back.records(xs + 1));
  CHECK(back.count_at(xs, 5.0) == tr.count_at(xs, 5.0));

  std::stringstream junk("nope");
  CHECK_THROWS_AS(read_binary_log(net, junk), ConfigError);

  std::ostringstream csv;
  write_csv(tr, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "t,species,voxel,count");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == tr.events().size() + 1);
}
