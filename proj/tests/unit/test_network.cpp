#include <doctest.h>

#include <set>

#include "enzyrx/errors.hpp"
#include "enzyrx/network.hpp"
#include "enzyrx/params.hpp"

using namespace enzyrx;

namespace {

// Independent count of directed face-neighbour pairs and boundary faces.
struct FaceCount {
  std::size_t directed_pairs = 0;
  std::size_t boundary_faces = 0;
};

FaceCount enumerate_faces(int nx, int ny, int nz) {
  FaceCount fc;
  for (int z = 1; z <= nz; ++z)
    for (int y = 1; y <= ny; ++y)
      for (int x = 1; x <= nx; ++x) {
        const int nb[6][3] = {{x + 1, y, z}, {x - 1, y, z}, {x, y + 1, z},
                              {x, y - 1, z}, {x, y, z + 1}, {x, y, z - 1}};
        for (const auto& n : nb) {
          const bool inside = n[0] >= 1 && n[0] <= nx && n[1] >= 1 && n[1] <= ny && n[2] >= 1 &&
                              n[2] <= nz;
          (inside ? fc.directed_pairs : fc.boundary_faces) += 1;
        }
      }
  return fc;
}

NetworkSpec front_end_spec(const VoxelLattice& lat, const Voxel& rx) {
  NetworkSpec spec(lat);
  const std::size_t home = lat.index(rx);
  const auto K = spec.add_species({"K", Mobility::diffusing, std::nullopt});
  const auto X = spec.add_species({"X", Mobility::immobile, home});
  const auto XK = spec.add_species({"XK", Mobility::immobile, home});
  const auto Xs = spec.add_species({"X*", Mobility::immobile, home});
  const FrontEndParams p;
  spec.reactions.push_back({"bind", {{X, home}, {K, home}}, {{XK, home}}, p.a0});
  spec.reactions.push_back({"unbind", {{XK, home}}, {{X, home}, {K, home}}, p.d0});
  spec.reactions.push_back({"activate", {{XK, home}}, {{Xs, home}, {K, home}}, p.g0});
  spec.reactions.push_back({"revert", {{Xs, home}}, {{X, home}}, p.g_minus});
  spec.conservation.push_back({"X_T", {{{X, home}, 1}, {{XK, home}, 1}, {{Xs, home}, 1}}, 37});
  return spec;
}

}  // namespace

TEST_CASE("medium lattice geometry") {
  const VoxelLattice lat = build_medium({6, 6, 3}, 1.0 / 3.0, 1.0);
  CHECK(lat.size() == 108);
  CHECK(lat.jump_rate() == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(lat.escape_rate_per_face() == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(lat.volume() == doctest::Approx(1.0 / 27.0).epsilon(1e-12));

  CHECK(lat.exposed_faces(lat.index({1, 1, 1})) == 3);
  CHECK(lat.exposed_faces(lat.index({3, 3, 2})) == 0);
  CHECK(lat.exposed_faces(lat.index({1, 3, 2})) == 1);
  CHECK(lat.index({2, 3, 2}) == 1 + 6 * (2 + 6 * 1));
  for (std::size_t i = 0; i < lat.size(); ++i) CHECK(lat.index(lat.coord(i)) == i);
}

TEST_CASE("degenerate lattices") {
  const VoxelLattice one = build_medium({1, 1, 1}, 1.0, 0.0);
  CHECK(one.size() == 1);
  CHECK(one.jump_rate() == 0.0);
  CHECK(one.escape_rate(0) == 0.0);

  const VoxelLattice two = build_medium({2, 1, 1}, 1.0, 1.0);
  CHECK(two.size() == 2);
  CHECK(two.jump_rate() == 1.0);
  CHECK(two.faces(0)[0] == std::optional<std::size_t>(1));
  CHECK(two.faces(1)[1] == std::optional<std::size_t>(0));

  CHECK_THROWS_AS(build_medium({0, 6, 3}, 1.0, 1.0), InvalidGeometry);
  CHECK_THROWS_AS(build_medium({6, -1, 3}, 1.0, 1.0), InvalidGeometry);
  CHECK_THROWS_AS(build_medium({6, 6, 3}, 0.0, 1.0), InvalidGeometry);
  CHECK_THROWS_AS(build_medium({6, 6, 3}, 1.0, -1.0), InvalidGeometry);
}

TEST_CASE("transmitter source rates") {
  const VoxelLattice lat = presets::medium();
  CHECK(build_transmitter(lat, {2, 3, 2}, 3.38, 96, 0).rate == doctest::Approx(324.48));
  CHECK(build_transmitter(lat, {2, 3, 2}, 3.38, 320, 0).rate == doctest::Approx(1081.6));
  const auto zero = build_transmitter(lat, {2, 3, 2}, 3.38, 0, 0);
  CHECK(zero.rate == 0.0);
  CHECK(zero.order() == 0);
  CHECK_THROWS_AS(build_transmitter(lat, {7, 3, 2}, 3.38, 96, 0), InvalidReference);
}

TEST_CASE("medium-only compile enumerates every face") {
  NetworkSpec spec(presets::medium());
  spec.add_species({"K", Mobility::diffusing, std::nullopt});
  const CompiledNetwork net = compile(spec);
  const FaceCount fc = enumerate_faces(6, 6, 3);
  CHECK(fc.directed_pairs == 504);
  CHECK(fc.boundary_faces == 144);
  CHECK(net.count_kind(ChannelKind::diffusion) == fc.directed_pairs);
  CHECK(net.count_kind(ChannelKind::escape) == fc.boundary_faces);
  CHECK(net.count_kind(ChannelKind::reaction) == 0);
  CHECK(net.population_count() == 108);

  // Every voxel has six outgoing channels for K: jumps plus escapes.
  std::vector<int> outgoing(108, 0);
  for (const auto& c : net.channels()) outgoing[c.reactants[0]] += 1;
  for (int n : outgoing) CHECK(n == 6);
}

TEST_CASE("empty and zero-diffusion networks") {
  NetworkSpec empty(presets::medium());
  CHECK(compile(empty).channel_count() == 0);

  NetworkSpec still(build_medium({1, 1, 1}, 1.0, 0.0));
  still.add_species({"K", Mobility::diffusing, std::nullopt});
  CHECK(compile(still).channel_count() == 0);
}

TEST_CASE("front-end compiles to four reaction channels in the receiver voxel") {
  const VoxelLattice lat = presets::medium();
  const CompiledNetwork net = compile(front_end_spec(lat, presets::kRxVoxel));
  CHECK(net.count_kind(ChannelKind::reaction) == 4);
  const std::size_t rx = lat.index(presets::kRxVoxel);
  for (const auto& c : net.channels()) {
    if (c.kind != ChannelKind::reaction) continue;
    for (const auto& d : c.delta) CHECK(net.populations()[d.pop].voxel == rx);
  }
  const auto& bind = net.channels()[0];
  CHECK(bind.order == 2);
  CHECK(bind.coefficient == doctest::Approx(1e-3 * 27.0));

  SystemState x = net.zero_state();
  x[net.population("X", presets::kRxVoxel)] = 37;
  x[net.population("K", presets::kRxVoxel)] = 5;
  CHECK(net.propensity(0, x) == doctest::Approx(27e-3 * 37 * 5));
  net.validate_state(x);
}

TEST_CASE("conservation is checked statically and preserved by every channel") {
  const VoxelLattice lat = presets::medium();
  NetworkSpec spec = front_end_spec(lat, presets::kRxVoxel);
  const CompiledNetwork net = compile(spec);
  const auto stoich = net.stoichiometry();
  for (const auto& law : net.conservation())
    for (std::size_t c = 0; c < net.channel_count(); ++c) {
      long sum = 0;
      for (const auto& [p, w] : law.terms) sum += w * stoich[p][c];
      CHECK(sum == 0);
    }

  const std::size_t home = lat.index(presets::kRxVoxel);
  spec.reactions.push_back({"leak", {{spec.species_id("X*"), home}}, {}, 1.0});
  CHECK_THROWS_AS(compile(spec), ConservationViolation);
}

TEST_CASE("invalid references and unsupported orders") {
  const VoxelLattice lat = presets::medium();
  NetworkSpec spec(lat);
  const auto A = spec.add_species({"A", Mobility::immobile, 0});
  const auto B = spec.add_species({"B", Mobility::immobile, 0});
  CHECK_THROWS_AS(spec.add_species({"A", Mobility::immobile, 0}), InvalidReference);

  NetworkSpec homo = spec;
  homo.reactions.push_back({"dimer", {{A, 0}, {A, 0}}, {{B, 0}}, 1.0});
  CHECK_THROWS_AS(compile(homo), InvalidReference);

  NetworkSpec third = spec;
  third.reactions.push_back({"tri", {{A, 0}, {B, 0}, {B, 0}}, {}, 1.0});
  CHECK_THROWS_AS(compile(third), InvalidReference);

  NetworkSpec elsewhere = spec;
  elsewhere.reactions.push_back({"away", {{A, 5}}, {}, 1.0});
  CHECK_THROWS_AS(compile(elsewhere), InvalidReference);
}

TEST_CASE("compilation is deterministic") {
  const VoxelLattice lat = presets::medium();
  NetworkSpec spec = front_end_spec(lat, presets::kRxVoxel);
  spec.reactions.push_back(build_transmitter(lat, presets::kTxVoxel, 3.38, 320, 0));
  const CompiledNetwork a = compile(spec);
  const CompiledNetwork b = compile(spec);
  REQUIRE(a.channel_count() == b.channel_count());
  for (std::size_t c = 0; c < a.channel_count(); ++c) CHECK(a.channels()[c] == b.channels()[c]);

  std::set<std::string> labels;
  for (const auto& c : a.channels()) labels.insert(c.label);
  CHECK(labels.size() == a.channel_count());
}

TEST_CASE("network loads from a JSON declaration") {
  const auto doc = nlohmann::json::parse(R"({
    "lattice": {"dims": [6, 6, 3], "edge": 0.3333333333333333, "diffusion": 1.0},
    "species": [
      {"name": "K", "mobility": "diffusing"},
      {"name": "X", "home": [5, 3, 2]},
      {"name": "XK", "home": [5, 3, 2]},
      {"name": "X*", "home": [5, 3, 2]}
    ],
    "channels": [
      {"label": "bind", "rate": 0.001,
       "reactants": [{"species": "X"}, {"species": "K", "voxel": [5, 3, 2]}],
       "products": [{"species": "XK"}]},
      {"label": "unbind", "rate": 20, "reactants": [{"species": "XK"}],
       "products": [{"species": "X"}, {"species": "K", "voxel": [5, 3, 2]}]},
      {"label": "activate", "rate": 20, "reactants": [{"species": "XK"}],
       "products": [{"species": "X*"}, {"species": "K", "voxel": [5, 3, 2]}]},
      {"label": "revert", "rate": 1, "reactants": [{"species": "X*"}],
       "products": [{"species": "X"}]}
    ],
    "conservation": [
      {"name": "X_T", "total": 37,
       "terms": [{"species": "X"}, {"species": "XK"}, {"species": "X*"}]}
    ],
    "initial": [{"species": "X", "count": 37}],
    "placements": {"transmitter": {"voxel": [2, 3, 2], "r_tx": 3.38, "mrna": 320}}
  })");
  const NetworkConfig cfg = network_from_json(doc);
  const CompiledNetwork net = compile(cfg.network);
  CHECK(net.count_kind(ChannelKind::reaction) == 4);
  CHECK(net.count_kind(ChannelKind::source) == 1);
  CHECK(net.count_kind(ChannelKind::diffusion) == 504);
  const SystemState x = initial_state(net, cfg);
  CHECK(x[net.population("X", {5, 3, 2})] == 37);

  auto bad = doc;
  bad["lattice"]["dims"] = {0, 6, 3};
  CHECK_THROWS_AS(network_from_json(bad), InvalidGeometry);
  bad = doc;
  bad["species"][1]["mobility"] = "sticky";
  CHECK_THROWS_AS(network_from_json(bad), ConfigError);
}
