#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace enzyrx {

// 1-based voxel coordinate, written (x,y,z) as in "(5,3,2)".
struct Voxel {
  int x = 1;
  int y = 1;
  int z = 1;
  friend auto operator<=>(const Voxel&, const Voxel&) = default;
};

std::string to_string(const Voxel& v);

// Regular lattice of cubic voxels with absorbing walls. Linear index is
// x-fastest: idx = (x-1) + nx*((y-1) + ny*(z-1)).
class VoxelLattice {
public:
  // escape_per_face defaults to D/(50 W^2); an explicit value overrides it.
  VoxelLattice(std::array<int, 3> dims, double edge, double diffusion,
               std::optional<double> escape_per_face = std::nullopt);

  int nx() const noexcept { return dims_[0]; }
  int ny() const noexcept { return dims_[1]; }
  int nz() const noexcept { return dims_[2]; }
  std::array<int, 3> dims() const noexcept { return dims_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }
  double edge() const noexcept { return edge_; }
  double volume() const noexcept { return edge_ * edge_ * edge_; }
  double diffusion() const noexcept { return diffusion_; }

  // Rate of one molecule jumping to one given face neighbour: D/W^2.
  double jump_rate() const noexcept { return diffusion_ / (edge_ * edge_); }
  double escape_rate_per_face() const noexcept { return escape_per_face_; }

  bool contains(const Voxel& v) const noexcept;
  std::size_t index(const Voxel& v) const;  // throws InvalidReference
  Voxel coord(std::size_t idx) const;

  // Neighbour across each face, in the order +x,-x,+y,-y,+z,-z; nullopt for a
  // boundary face.
  std::array<std::optional<std::size_t>, 6> faces(std::size_t idx) const;
  int exposed_faces(std::size_t idx) const;
  double escape_rate(std::size_t idx) const { return exposed_faces(idx) * escape_per_face_; }

private:
  std::array<int, 3> dims_;
  double edge_;
  double diffusion_;
  double escape_per_face_;
};

VoxelLattice build_medium(std::array<int, 3> dims, double edge, double diffusion);

enum class Mobility { diffusing, immobile };

using SpeciesId = std::size_t;

struct SpeciesDecl {
  std::string name;
  Mobility mobility = Mobility::immobile;
  // Immobile species confined to one voxel; without a home they may exist in
  // every voxel.
  std::optional<std::size_t> home;
};

// A species in a particular voxel (linear index).
struct SpeciesAt {
  SpeciesId species = 0;
  std::size_t voxel = 0;
  friend auto operator<=>(const SpeciesAt&, const SpeciesAt&) = default;
};

// One mass-action event type. Order 0: propensity k. Order 1: k*n. Order 2
// (heterodimer only): (k/Omega)*n1*n2.
struct ReactionChannel {
  std::string label;
  std::vector<SpeciesAt> reactants;
  std::vector<SpeciesAt> products;
  double rate = 0.0;

  int order() const noexcept { return static_cast<int>(reactants.size()); }
};

struct ConservationLaw {
  std::string name;
  std::vector<std::pair<SpeciesAt, int>> terms;
  std::int64_t total = 0;
};

struct NetworkSpec {
  explicit NetworkSpec(VoxelLattice lat) : lattice(std::move(lat)) {}

  VoxelLattice lattice;
  std::vector<SpeciesDecl> species;
  std::vector<ReactionChannel> reactions;
  std::vector<ConservationLaw> conservation;

  SpeciesId add_species(SpeciesDecl decl);
  std::optional<SpeciesId> find_species(std::string_view name) const;
  SpeciesId species_id(std::string_view name) const;  // throws InvalidReference
};

ReactionChannel build_transmitter(const VoxelLattice& lattice, const Voxel& tx_voxel,
                                  double r_tx, double mrna_count, SpeciesId signal);

enum class ChannelKind : std::uint8_t { source, reaction, diffusion, escape };

std::string_view to_string(ChannelKind kind);

using PopIndex = std::uint32_t;
inline constexpr PopIndex kNoPop = static_cast<PopIndex>(-1);

struct StateDelta {
  PopIndex pop;
  int change;
  friend bool operator==(const StateDelta&, const StateDelta&) = default;
};

struct CompiledChannel {
  std::string label;
  ChannelKind kind = ChannelKind::reaction;
  int order = 0;
  double rate = 0.0;         // as declared
  double coefficient = 0.0;  // propensity prefactor: rate, or rate/Omega for order 2
  std::array<PopIndex, 2> reactants{kNoPop, kNoPop};
  std::vector<StateDelta> delta;  // sorted by population, zero entries dropped

  friend bool operator==(const CompiledChannel&, const CompiledChannel&) = default;
};

struct CompiledConservation {
  std::string name;
  std::vector<std::pair<PopIndex, int>> terms;
  std::int64_t total = 0;
};

using SystemState = std::vector<std::int64_t>;

// Immutable flat channel table. Every reaction and every diffusion or escape
// jump is its own channel.
class CompiledNetwork {
public:
  const VoxelLattice& lattice() const noexcept { return lattice_; }
  const std::vector<SpeciesDecl>& species() const noexcept { return species_; }
  const std::vector<SpeciesAt>& populations() const noexcept { return pops_; }
  const std::vector<CompiledChannel>& channels() const noexcept { return channels_; }
  const std::vector<CompiledConservation>& conservation() const noexcept { return laws_; }

  std::size_t population_count() const noexcept { return pops_.size(); }
  std::size_t channel_count() const noexcept { return channels_.size(); }
  std::size_t count_kind(ChannelKind kind) const;

  std::optional<PopIndex> find_population(SpeciesId s, std::size_t voxel) const;
  PopIndex population(SpeciesId s, std::size_t voxel) const;  // throws InvalidReference
  PopIndex population(std::string_view species, const Voxel& v) const;
  std::string population_name(PopIndex p) const;

  SpeciesId species_id(std::string_view name) const;

  SystemState zero_state() const { return SystemState(pops_.size(), 0); }

  double propensity(std::size_t channel, std::span<const std::int64_t> counts) const;
  // Same mass-action law evaluated on real-valued (mean-field) counts.
  double rate_law(std::size_t channel, std::span<const double> counts) const;
  void fire(std::size_t channel, std::span<std::int64_t> counts) const;

  // Dense stoichiometry matrix, rows = populations, cols = channels.
  std::vector<std::vector<int>> stoichiometry() const;

  std::vector<std::int64_t> conservation_totals(std::span<const std::int64_t> counts) const;
  // Throws ConservationViolation / InvalidReference when counts are negative,
  // the size is wrong, or a declared total does not hold.
  void validate_state(std::span<const std::int64_t> counts) const;

private:
  friend CompiledNetwork compile(const NetworkSpec& network);
  explicit CompiledNetwork(VoxelLattice lattice) : lattice_(std::move(lattice)) {}

  VoxelLattice lattice_;
  std::vector<SpeciesDecl> species_;
  std::vector<SpeciesAt> pops_;
  std::vector<std::vector<PopIndex>> pop_of_;  // [species][voxel] -> pop or kNoPop
  std::vector<CompiledChannel> channels_;
  std::vector<CompiledConservation> laws_;
};

// Static checks: references valid, at most bimolecular heterodimer reactions,
// every declared conservation law preserved by every channel.
CompiledNetwork compile(const NetworkSpec& network);

// Network declaration loaded from a JSON config file (schema in
// docs/config-schema.md).
struct NetworkConfig {
  NetworkSpec network;
  std::vector<std::pair<SpeciesAt, std::int64_t>> initial;
};

NetworkConfig network_from_json(const nlohmann::json& doc);
NetworkConfig load_network_config(const std::filesystem::path& path);
SystemState initial_state(const CompiledNetwork& net, const NetworkConfig& cfg);

Voxel voxel_from_json(const nlohmann::json& j);

}  // namespace enzyrx
