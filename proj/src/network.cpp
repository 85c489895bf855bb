#include "enzyrx/network.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "enzyrx/errors.hpp"

namespace enzyrx {

std::string to_string(const Voxel& v) {
  std::ostringstream os;
  os << '(' << v.x << ',' << v.y << ',' << v.z << ')';
  return os.str();
}

VoxelLattice::VoxelLattice(std::array<int, 3> dims, double edge, double diffusion,
                           std::optional<double> escape_per_face)
    : dims_(dims), edge_(edge), diffusion_(diffusion) {
  for (int d : dims_) {
    if (d < 1) throw InvalidGeometry("lattice dimensions must be >= 1");
  }
  if (!(edge_ > 0.0)) throw InvalidGeometry("voxel edge W must be > 0");
  if (!(diffusion_ >= 0.0)) throw InvalidGeometry("diffusion coefficient D must be >= 0");
  escape_per_face_ = escape_per_face.value_or(diffusion_ / (50.0 * edge_ * edge_));
  if (!(escape_per_face_ >= 0.0)) throw InvalidGeometry("escape rate must be >= 0");
}

bool VoxelLattice::contains(const Voxel& v) const noexcept {
  return v.x >= 1 && v.x <= dims_[0] && v.y >= 1 && v.y <= dims_[1] && v.z >= 1 &&
         v.z <= dims_[2];
}

std::size_t VoxelLattice::index(const Voxel& v) const {
  if (!contains(v)) throw InvalidReference("voxel " + to_string(v) + " outside lattice");
  return static_cast<std::size_t>(v.x - 1) +
         static_cast<std::size_t>(dims_[0]) *
             (static_cast<std::size_t>(v.y - 1) +
              static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(v.z - 1));
}

Voxel VoxelLattice::coord(std::size_t idx) const {
  if (idx >= size()) throw InvalidReference("voxel index out of range");
  const auto nx = static_cast<std::size_t>(dims_[0]);
  const auto ny = static_cast<std::size_t>(dims_[1]);
  return Voxel{static_cast<int>(idx % nx) + 1, static_cast<int>((idx / nx) % ny) + 1,
               static_cast<int>(idx / (nx * ny)) + 1};
}

std::array<std::optional<std::size_t>, 6> VoxelLattice::faces(std::size_t idx) const {
  const Voxel c = coord(idx);
  static constexpr std::array<std::array<int, 3>, 6> kDirs{
      {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  std::array<std::optional<std::size_t>, 6> out;
  for (std::size_t f = 0; f < 6; ++f) {
    const Voxel n{c.x + kDirs[f][0], c.y + kDirs[f][1], c.z + kDirs[f][2]};
    if (contains(n)) out[f] = index(n);
  }
  return out;
}

int VoxelLattice::exposed_faces(std::size_t idx) const {
  int n = 0;
  for (const auto& f : faces(idx)) n += f ? 0 : 1;
  return n;
}

VoxelLattice build_medium(std::array<int, 3> dims, double edge, double diffusion) {
  return VoxelLattice(dims, edge, diffusion);
}

SpeciesId NetworkSpec::add_species(SpeciesDecl decl) {
  if (find_species(decl.name)) throw InvalidReference("duplicate species '" + decl.name + "'");
  if (decl.home && *decl.home >= lattice.size())
    throw InvalidReference("home voxel of '" + decl.name + "' outside lattice");
  if (decl.mobility == Mobility::diffusing && decl.home)
    throw InvalidReference("diffusing species '" + decl.name + "' cannot have a home voxel");
  species.push_back(std::move(decl));
  return species.size() - 1;
}

std::optional<SpeciesId> NetworkSpec::find_species(std::string_view name) const {
  for (std::size_t i = 0; i < species.size(); ++i) {
    if (species[i].name == name) return i;
  }
  return std::nullopt;
}

SpeciesId NetworkSpec::species_id(std::string_view name) const {
  if (auto id = find_species(name)) return *id;
  throw InvalidReference("unknown species '" + std::string(name) + "'");
}

ReactionChannel build_transmitter(const VoxelLattice& lattice, const Voxel& tx_voxel,
                                  double r_tx, double mrna_count, SpeciesId signal) {
  const std::size_t v = lattice.index(tx_voxel);
  if (r_tx < 0.0 || mrna_count < 0.0)
    throw InvalidReference("transmitter rate and mRNA count must be non-negative");
  // The mRNA count is constant, so catalysis folds into a constant-rate source.
  return ReactionChannel{"tx:mRNA->mRNA+K", {}, {SpeciesAt{signal, v}}, r_tx * mrna_count};
}

std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::source: return "source";
    case ChannelKind::reaction: return "reaction";
    case ChannelKind::diffusion: return "diffusion";
    case ChannelKind::escape: return "escape";
  }
  return "?";
}

std::size_t CompiledNetwork::count_kind(ChannelKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      channels_.begin(), channels_.end(), [kind](const auto& c) { return c.kind == kind; }));
}

std::optional<PopIndex> CompiledNetwork::find_population(SpeciesId s, std::size_t voxel) const {
  if (s >= pop_of_.size() || voxel >= lattice_.size()) return std::nullopt;
  const PopIndex p = pop_of_[s][voxel];
  if (p == kNoPop) return std::nullopt;
  return p;
}

PopIndex CompiledNetwork::population(SpeciesId s, std::size_t voxel) const {
  if (auto p = find_population(s, voxel)) return *p;
  throw InvalidReference("species " + (s < species_.size() ? species_[s].name : "?") +
                         " does not exist in voxel " +
                         (voxel < lattice_.size() ? to_string(lattice_.coord(voxel)) : "?"));
}

PopIndex CompiledNetwork::population(std::string_view species, const Voxel& v) const {
  return population(species_id(species), lattice_.index(v));
}

SpeciesId CompiledNetwork::species_id(std::string_view name) const {
  for (std::size_t i = 0; i < species_.size(); ++i) {
    if (species_[i].name == name) return i;
  }
  throw InvalidReference("unknown species '" + std::string(name) + "'");
}

std::string CompiledNetwork::population_name(PopIndex p) const {
  const SpeciesAt& sa = pops_.at(p);
  return species_[sa.species].name + "@" + to_string(lattice_.coord(sa.voxel));
}

double CompiledNetwork::propensity(std::size_t ch, std::span<const std::int64_t> n) const {
  const CompiledChannel& c = channels_[ch];
  switch (c.order) {
    case 0: return c.coefficient;
    case 1: return c.coefficient * static_cast<double>(n[c.reactants[0]]);
    default:
      return c.coefficient * static_cast<double>(n[c.reactants[0]]) *
             static_cast<double>(n[c.reactants[1]]);
  }
}

double CompiledNetwork::rate_law(std::size_t ch, std::span<const double> n) const {
  const CompiledChannel& c = channels_[ch];
  switch (c.order) {
    case 0: return c.coefficient;
    case 1: return c.coefficient * n[c.reactants[0]];
    default: return c.coefficient * n[c.reactants[0]] * n[c.reactants[1]];
  }
}

void CompiledNetwork::fire(std::size_t ch, std::span<std::int64_t> counts) const {
  for (const StateDelta& d : channels_[ch].delta) counts[d.pop] += d.change;
}

std::vector<std::vector<int>> CompiledNetwork::stoichiometry() const {
  std::vector<std::vector<int>> m(pops_.size(), std::vector<int>(channels_.size(), 0));
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    for (const StateDelta& d : channels_[c].delta) m[d.pop][c] = d.change;
  }
  return m;
}

std::vector<std::int64_t> CompiledNetwork::conservation_totals(
    std::span<const std::int64_t> counts) const {
  std::vector<std::int64_t> out;
  out.reserve(laws_.size());
  for (const auto& law : laws_) {
    std::int64_t sum = 0;
    for (const auto& [p, w] : law.terms) sum += w * counts[p];
    out.push_back(sum);
  }
  return out;
}

void CompiledNetwork::validate_state(std::span<const std::int64_t> counts) const {
  if (counts.size() != pops_.size()) throw InvalidReference("state size does not match network");
  for (std::size_t p = 0; p < counts.size(); ++p) {
    if (counts[p] < 0)
      throw ConservationViolation("negative count for " + population_name(static_cast<PopIndex>(p)));
  }
  const auto totals = conservation_totals(counts);
  for (std::size_t i = 0; i < laws_.size(); ++i) {
    if (totals[i] != laws_[i].total) {
      throw ConservationViolation("conservation law '" + laws_[i].name + "' expects " +
                                  std::to_string(laws_[i].total) + ", state has " +
                                  std::to_string(totals[i]));
    }
  }
}

namespace {

std::vector<StateDelta> net_delta(const std::vector<PopIndex>& in, const std::vector<PopIndex>& out) {
  std::map<PopIndex, int> acc;
  for (PopIndex p : in) acc[p] -= 1;
  for (PopIndex p : out) acc[p] += 1;
  std::vector<StateDelta> d;
  for (const auto& [p, c] : acc) {
    if (c != 0) d.push_back({p, c});
  }
  return d;
}

}  // namespace

CompiledNetwork compile(const NetworkSpec& spec) {
  CompiledNetwork net(spec.lattice);
  const std::size_t nv = spec.lattice.size();
  net.species_ = spec.species;

  // Populations: diffusing species and homeless immobile ones live in every
  // voxel; homed species only at home.
  net.pop_of_.assign(spec.species.size(), std::vector<PopIndex>(nv, kNoPop));
  for (SpeciesId s = 0; s < spec.species.size(); ++s) {
    const SpeciesDecl& d = spec.species[s];
    if (d.home) {
      net.pop_of_[s][*d.home] = static_cast<PopIndex>(net.pops_.size());
      net.pops_.push_back({s, *d.home});
    } else {
      for (std::size_t v = 0; v < nv; ++v) {
        net.pop_of_[s][v] = static_cast<PopIndex>(net.pops_.size());
        net.pops_.push_back({s, v});
      }
    }
  }

  auto resolve = [&](const SpeciesAt& sa, const std::string& label) {
    if (sa.species >= spec.species.size())
      throw InvalidReference("channel '" + label + "' references unknown species");
    if (sa.voxel >= nv) throw InvalidReference("channel '" + label + "' references voxel out of range");
    const PopIndex p = net.pop_of_[sa.species][sa.voxel];
    if (p == kNoPop) {
      throw InvalidReference("channel '" + label + "': species '" + spec.species[sa.species].name +
                             "' does not exist in voxel " + to_string(spec.lattice.coord(sa.voxel)));
    }
    return p;
  };

  const double omega = spec.lattice.volume();
  for (const ReactionChannel& r : spec.reactions) {
    if (r.reactants.size() > 2)
      throw InvalidReference("channel '" + r.label + "' has order > 2 (unsupported)");
    if (!(r.rate >= 0.0)) throw InvalidReference("channel '" + r.label + "' has negative rate");
    CompiledChannel c;
    c.label = r.label;
    c.order = r.order();
    c.kind = c.order == 0 ? ChannelKind::source : ChannelKind::reaction;
    c.rate = r.rate;
    c.coefficient = c.order == 2 ? r.rate / omega : r.rate;
    std::vector<PopIndex> in, out;
    for (std::size_t i = 0; i < r.reactants.size(); ++i) {
      const PopIndex p = resolve(r.reactants[i], r.label);
      c.reactants[i] = p;
      in.push_back(p);
    }
    if (c.order == 2 && c.reactants[0] == c.reactants[1])
      throw InvalidReference("channel '" + r.label + "' is a homodimer reaction (unsupported)");
    for (const SpeciesAt& sa : r.products) out.push_back(resolve(sa, r.label));
    c.delta = net_delta(in, out);
    net.channels_.push_back(std::move(c));
  }

  const double jump = spec.lattice.jump_rate();
  const double escape = spec.lattice.escape_rate_per_face();
  static constexpr std::array<const char*, 6> kFace{"+x", "-x", "+y", "-y", "+z", "-z"};
  for (SpeciesId s = 0; s < spec.species.size(); ++s) {
    if (spec.species[s].mobility != Mobility::diffusing) continue;
    for (std::size_t v = 0; v < nv; ++v) {
      const auto faces = spec.lattice.faces(v);
      const PopIndex from = net.pop_of_[s][v];
      for (std::size_t f = 0; f < 6; ++f) {
        CompiledChannel c;
        c.order = 1;
        c.reactants[0] = from;
        const std::string where = spec.species[s].name + "@" + to_string(spec.lattice.coord(v));
        if (faces[f]) {
          if (jump <= 0.0) continue;
          c.kind = ChannelKind::diffusion;
          c.label = "diffuse:" + where + kFace[f];
          c.rate = c.coefficient = jump;
          c.delta = net_delta({from}, {net.pop_of_[s][*faces[f]]});
        } else {
          if (escape <= 0.0) continue;
          c.kind = ChannelKind::escape;
          c.label = "escape:" + where + kFace[f];
          c.rate = c.coefficient = escape;
          c.delta = {{from, -1}};
        }
        net.channels_.push_back(std::move(c));
      }
    }
  }

  for (const ConservationLaw& law : spec.conservation) {
    CompiledConservation cl{law.name, {}, law.total};
    std::map<PopIndex, int> w;
    for (const auto& [sa, coef] : law.terms) w[resolve(sa, "conservation:" + law.name)] += coef;
    for (const auto& [p, coef] : w) {
      if (coef != 0) cl.terms.emplace_back(p, coef);
    }
    for (const CompiledChannel& c : net.channels_) {
      long change = 0;
      for (const StateDelta& d : c.delta) {
        auto it = w.find(d.pop);
        if (it != w.end()) change += static_cast<long>(it->second) * d.change;
      }
      if (change != 0) {
        throw ConservationViolation("channel '" + c.label + "' changes conserved total '" +
                                    law.name + "' by " + std::to_string(change));
      }
    }
    net.laws_.push_back(std::move(cl));
  }
  return net;
}

// ---- config loading ------------------------------------------------------

Voxel voxel_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("voxel must be a [x, y, z] array");
  return Voxel{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

namespace {

SpeciesAt species_at(const NetworkSpec& spec, const nlohmann::json& j) {
  const SpeciesId s = spec.species_id(j.at("species").get<std::string>());
  std::size_t v = 0;
  if (j.contains("voxel")) {
    v = spec.lattice.index(voxel_from_json(j.at("voxel")));
  } else if (spec.species[s].home) {
    v = *spec.species[s].home;
  } else {
    throw ConfigError("term for species '" + spec.species[s].name + "' needs a voxel");
  }
  return {s, v};
}

}  // namespace

NetworkConfig network_from_json(const nlohmann::json& doc) {
  try {
    const auto& lat = doc.at("lattice");
    const auto dims = lat.at("dims").get<std::array<int, 3>>();
    std::optional<double> esc;
    if (lat.contains("escape_per_face")) esc = lat.at("escape_per_face").get<double>();
    NetworkConfig cfg{NetworkSpec(VoxelLattice(dims, lat.at("edge").get<double>(),
                                               lat.at("diffusion").get<double>(), esc)),
                      {}};
    NetworkSpec& spec = cfg.network;

    for (const auto& s : doc.value("species", nlohmann::json::array())) {
      SpeciesDecl d;
      d.name = s.at("name").get<std::string>();
      const std::string mob = s.value("mobility", "immobile");
      if (mob == "diffusing") {
        d.mobility = Mobility::diffusing;
      } else if (mob != "immobile") {
        throw ConfigError("unknown mobility '" + mob + "'");
      }
      if (s.contains("home")) d.home = spec.lattice.index(voxel_from_json(s.at("home")));
      spec.add_species(std::move(d));
    }

    for (const auto& c : doc.value("channels", nlohmann::json::array())) {
      ReactionChannel r;
      r.label = c.value("label", "");
      r.rate = c.at("rate").get<double>();
      for (const auto& t : c.value("reactants", nlohmann::json::array()))
        r.reactants.push_back(species_at(spec, t));
      for (const auto& t : c.value("products", nlohmann::json::array()))
        r.products.push_back(species_at(spec, t));
      spec.reactions.push_back(std::move(r));
    }

    for (const auto& c : doc.value("conservation", nlohmann::json::array())) {
      ConservationLaw law;
      law.name = c.at("name").get<std::string>();
      law.total = c.at("total").get<std::int64_t>();
      for (const auto& t : c.at("terms"))
        law.terms.emplace_back(species_at(spec, t), t.value("weight", 1));
      spec.conservation.push_back(std::move(law));
    }

    for (const auto& i : doc.value("initial", nlohmann::json::array()))
      cfg.initial.emplace_back(species_at(spec, i), i.at("count").get<std::int64_t>());

    if (doc.contains("placements") && doc["placements"].contains("transmitter")) {
      const auto& tx = doc["placements"]["transmitter"];
      spec.reactions.push_back(build_transmitter(
          spec.lattice, voxel_from_json(tx.at("voxel")), tx.at("r_tx").get<double>(),
          tx.at("mrna").get<double>(), spec.species_id(tx.value("species", "K"))));
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("network config: ") + e.what());
  }
}

NetworkConfig load_network_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return network_from_json(doc);
}

SystemState initial_state(const CompiledNetwork& net, const NetworkConfig& cfg) {
  SystemState s = net.zero_state();
  for (const auto& [sa, n] : cfg.initial) s[net.population(sa.species, sa.voxel)] += n;
  net.validate_state(s);
  return s;
}

}  // namespace enzyrx
