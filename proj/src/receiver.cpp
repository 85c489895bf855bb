#include "enzyrx/receiver.hpp"

#include <cmath>
#include <set>

#include "enzyrx/errors.hpp"

namespace enzyrx {

std::string_view to_string(XSite s) {
  switch (s) {
    case XSite::x: return "X";
    case XSite::xk: return "XK";
    case XSite::xs: return "X*";
  }
  return "?";
}

std::string_view to_string(YSite s) {
  switch (s) {
    case YSite::y: return "Y";
    case YSite::yk: return "YK";
    case YSite::ys: return "Y*";
    case YSite::ys_p: return "Y*P";
  }
  return "?";
}

namespace {

// Helper that keeps the "name:" prefix and the home voxel in one place.
struct Builder {
  NetworkSpec& net;
  std::string prefix;
  std::size_t voxel;
  SpeciesId signal;

  SpeciesId species(const std::string& local) {
    return net.add_species({prefix + ":" + local, Mobility::immobile, voxel});
  }
  SpeciesAt at(SpeciesId s) const { return {s, voxel}; }
  SpeciesAt k() const { return {signal, voxel}; }
  void reaction(const std::string& label, std::vector<SpeciesAt> in, std::vector<SpeciesAt> out,
                double rate) {
    net.reactions.push_back({prefix + ":" + label, std::move(in), std::move(out), rate});
  }
  void law(const std::string& name, const std::vector<SpeciesId>& members, std::int64_t total) {
    ConservationLaw l{prefix + ":" + name, {}, total};
    for (SpeciesId s : members) l.terms.emplace_back(at(s), 1);
    net.conservation.push_back(std::move(l));
  }
};

void require_totals(const ReceiverParams& p) {
  if (p.front.x_total < 0 || p.th.p_total < 0.0 || p.integrator.j_total < 0 ||
      p.integrator.ptilde_total < 0)
    throw InvalidReference("receiver totals must be non-negative");
  if (p.th.p_total != std::floor(p.th.p_total))
    throw InvalidReference("receiver P_T must be a whole molecule count");
}

std::string state_name(XSite x, YSite y) {
  return std::string(to_string(x)) + "." + std::string(to_string(y));
}

}  // namespace

ReceiverSpecies build_receiver(NetworkSpec& net, SpeciesId signal, const ReceiverPlacement& p) {
  require_totals(p.params);
  const std::size_t v = net.lattice.index(p.voxel);
  if (signal >= net.species.size()) throw InvalidReference("receiver: unknown signal species");
  Builder b{net, p.name, v, signal};
  ReceiverSpecies r;
  r.name = p.name;
  r.voxel = v;
  for (XSite x : kXSites)
    for (YSite y : kYSites)
      r.xy[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
          b.species(state_name(x, y));
  if (p.mode == IntegratorMode::pair_and_suspend) r.pair = b.species("JX*Y*");
  r.p = b.species("P");
  r.j = b.species("J");
  r.js = b.species("J*");
  r.js_pt = b.species("J*P~");
  r.pt = b.species("P~");
  r.first_reaction = net.reactions.size();

  const FrontEndParams& f = p.params.front;
  const ThCycleParams& t = p.params.th;
  const IntegratorParams& in = p.params.integrator;
  auto s = [&](XSite x, YSite y) { return b.at(r.at(x, y)); };

  // The front-end acts on the x-site whatever the y-site holds.
  for (YSite y : kYSites) {
    const std::string tag = "@" + std::string(to_string(y));
    b.reaction("a0" + tag, {s(XSite::x, y), b.k()}, {s(XSite::xk, y)}, f.a0);
    b.reaction("d0" + tag, {s(XSite::xk, y)}, {s(XSite::x, y), b.k()}, f.d0);
    b.reaction("g0" + tag, {s(XSite::xk, y)}, {s(XSite::xs, y), b.k()}, f.g0);
    b.reaction("g-" + tag, {s(XSite::xs, y)}, {s(XSite::x, y)}, f.g_minus);
  }
  // The TH-cycle acts on the y-site; P binds any Y* regardless of the x-site.
  for (XSite x : kXSites) {
    const std::string tag = "@" + std::string(to_string(x));
    b.reaction("a1" + tag, {s(x, YSite::y), b.k()}, {s(x, YSite::yk)}, t.a1);
    b.reaction("d1" + tag, {s(x, YSite::yk)}, {s(x, YSite::y), b.k()}, t.d1);
    b.reaction("k1" + tag, {s(x, YSite::yk)}, {s(x, YSite::ys), b.k()}, t.k1);
    b.reaction("a2" + tag, {s(x, YSite::ys), b.at(r.p)}, {s(x, YSite::ys_p)}, t.a2);
    b.reaction("d2" + tag, {s(x, YSite::ys_p)}, {s(x, YSite::ys), b.at(r.p)}, t.d2);
    b.reaction("k2" + tag, {s(x, YSite::ys_p)}, {s(x, YSite::y), b.at(r.p)}, t.k2);
  }
  const SpeciesAt enzyme = s(XSite::xs, YSite::ys);
  if (r.pair) {
    b.reaction("a3", {b.at(r.j), enzyme}, {b.at(*r.pair)}, in.a3);
    b.reaction("d3", {b.at(*r.pair)}, {b.at(r.j), enzyme}, in.d3);
    b.reaction("k3", {b.at(*r.pair)}, {b.at(r.js), enzyme}, in.k3);
  } else {
    b.reaction("k3/K_M3", {b.at(r.j), enzyme}, {b.at(r.js), enzyme}, in.k3 / in.km3());
  }
  b.reaction("a4", {b.at(r.js), b.at(r.pt)}, {b.at(r.js_pt)}, in.a4);
  b.reaction("d4", {b.at(r.js_pt)}, {b.at(r.js), b.at(r.pt)}, in.d4);
  b.reaction("k4", {b.at(r.js_pt)}, {b.at(r.j), b.at(r.pt)}, in.k4);
  r.reaction_count = net.reactions.size() - r.first_reaction;

  std::vector<SpeciesId> molecules;
  for (const auto& row : r.xy) molecules.insert(molecules.end(), row.begin(), row.end());
  if (r.pair) molecules.push_back(*r.pair);
  b.law("X_T", molecules, f.x_total);
  std::vector<SpeciesId> phosphatase{r.p};
  for (XSite x : kXSites) phosphatase.push_back(r.at(x, YSite::ys_p));
  b.law("P_T", phosphatase, static_cast<std::int64_t>(t.p_total));
  std::vector<SpeciesId> substrate{r.j, r.js, r.js_pt};
  if (r.pair) substrate.push_back(*r.pair);
  b.law("J_T", substrate, in.j_total);
  b.law("P~_T", {r.pt, r.js_pt}, in.ptilde_total);
  return r;
}

std::vector<ReceiverSpecies> place_multiple(NetworkSpec& net, SpeciesId signal,
                                            std::span<const ReceiverPlacement> receivers) {
  std::set<Voxel> voxels;
  std::set<std::string> names;
  for (const auto& p : receivers) {
    if (!voxels.insert(p.voxel).second)
      throw UnsupportedConfiguration("two receivers placed in voxel " + to_string(p.voxel));
    if (!names.insert(p.name).second)
      throw UnsupportedConfiguration("receiver name '" + p.name + "' used twice");
  }
  std::vector<ReceiverSpecies> out;
  out.reserve(receivers.size());
  for (const auto& p : receivers) out.push_back(build_receiver(net, signal, p));
  return out;
}

FrontEndSpecies build_front_end(NetworkSpec& net, SpeciesId signal, std::size_t voxel,
                                const FrontEndParams& p, const std::string& name) {
  if (p.x_total < 0) throw InvalidReference("front-end X_T must be non-negative");
  Builder b{net, name, voxel, signal};
  FrontEndSpecies r{name, voxel, b.species("X"), b.species("XK"), b.species("X*")};
  b.reaction("a0", {b.at(r.x), b.k()}, {b.at(r.xk)}, p.a0);
  b.reaction("d0", {b.at(r.xk)}, {b.at(r.x), b.k()}, p.d0);
  b.reaction("g0", {b.at(r.xk)}, {b.at(r.xs), b.k()}, p.g0);
  b.reaction("g-", {b.at(r.xs)}, {b.at(r.x)}, p.g_minus);
  b.law("X_T", {r.x, r.xk, r.xs}, p.x_total);
  return r;
}

ThCycleSpecies build_th_cycle(NetworkSpec& net, SpeciesId signal, std::size_t voxel,
                              const ThCycleParams& th, std::int64_t y_total,
                              const std::string& name) {
  Builder b{net, name, voxel, signal};
  ThCycleSpecies r{b.species("Y"), b.species("YK"), b.species("Y*"), b.species("Y*P"),
                   b.species("P")};
  b.reaction("a1", {b.at(r.y), b.k()}, {b.at(r.yk)}, th.a1);
  b.reaction("d1", {b.at(r.yk)}, {b.at(r.y), b.k()}, th.d1);
  b.reaction("k1", {b.at(r.yk)}, {b.at(r.ys), b.k()}, th.k1);
  b.reaction("a2", {b.at(r.ys), b.at(r.p)}, {b.at(r.ys_p)}, th.a2);
  b.reaction("d2", {b.at(r.ys_p)}, {b.at(r.ys), b.at(r.p)}, th.d2);
  b.reaction("k2", {b.at(r.ys_p)}, {b.at(r.y), b.at(r.p)}, th.k2);
  b.law("Y_T", {r.y, r.yk, r.ys, r.ys_p}, y_total);
  b.law("P_T", {r.p, r.ys_p}, static_cast<std::int64_t>(th.p_total));
  return r;
}

std::vector<PopIndex> ReceiverObservables::all() const {
  std::vector<PopIndex> out = xy_all;
  if (js) out.push_back(*js);
  if (k != kNoPop) out.push_back(k);
  return out;
}

ReceiverObservables observe(const CompiledNetwork& net, const ReceiverSpecies& r,
                            SpeciesId signal, std::int64_t x_total) {
  ReceiverObservables o;
  o.name = r.name;
  o.x_total = x_total;
  auto pop = [&](SpeciesId s) { return net.population(s, r.voxel); };
  for (XSite x : kXSites)
    for (YSite y : kYSites) {
      const PopIndex p = pop(r.at(x, y));
      o.xy_all.push_back(p);
      if (x == XSite::xs) o.xs.push_back(p);
      if (x == XSite::xk) o.xk.push_back(p);
      if (y == YSite::ys) o.ys.push_back(p);
      if (y == YSite::yk) o.yk.push_back(p);
      if (x == XSite::xs && y == YSite::ys) o.xs_ys.push_back(p);
    }
  if (r.pair) {
    const PopIndex p = pop(*r.pair);
    o.xy_all.push_back(p);
    o.xs.push_back(p);
    o.ys.push_back(p);
    o.xs_ys.push_back(p);
  }
  o.js = pop(r.js);
  o.k = net.population(signal, r.voxel);
  return o;
}

ReceiverObservables observe(const CompiledNetwork& net, const FrontEndSpecies& r,
                            SpeciesId signal, std::int64_t x_total) {
  ReceiverObservables o;
  o.name = r.name;
  o.x_total = x_total;
  o.xs = {net.population(r.xs, r.voxel)};
  o.xk = {net.population(r.xk, r.voxel)};
  o.xy_all = {net.population(r.x, r.voxel), o.xk[0], o.xs[0]};
  o.k = net.population(signal, r.voxel);
  return o;
}

void set_initial(const CompiledNetwork& net, const ReceiverSpecies& r, const ReceiverParams& p,
                 SystemState& state) {
  auto set = [&](SpeciesId s, std::int64_t n) { state.at(net.population(s, r.voxel)) = n; };
  set(r.at(XSite::x, YSite::y), p.front.x_total);
  set(r.p, static_cast<std::int64_t>(p.th.p_total));
  set(r.j, p.integrator.j_total);
  set(r.pt, p.integrator.ptilde_total);
}

void set_initial(const CompiledNetwork& net, const FrontEndSpecies& r, const FrontEndParams& p,
                 SystemState& state) {
  state.at(net.population(r.x, r.voxel)) = p.x_total;
}

RecordSpec System::record_spec() const {
  std::vector<PopIndex> pops;
  for (const auto& r : receivers) {
    const auto a = r.all();
    pops.insert(pops.end(), a.begin(), a.end());
  }
  return RecordSpec::only(std::move(pops));
}

System build_system(const SystemConfig& cfg) {
  if (cfg.symbol != 0 && cfg.symbol != 1) throw InvalidReference("symbol must be 0 or 1");
  NetworkSpec spec(cfg.lattice);
  System sys;
  sys.signal = spec.add_species({"K", Mobility::diffusing, std::nullopt});
  spec.reactions.push_back(build_transmitter(spec.lattice, cfg.tx_voxel, cfg.tx.r_tx,
                                             cfg.tx.mrna.at(static_cast<std::size_t>(cfg.symbol)),
                                             sys.signal));
  std::vector<ReceiverSpecies> full;
  std::vector<FrontEndSpecies> bare;
  if (cfg.kind == ReceiverKind::full) {
    full = place_multiple(spec, sys.signal, cfg.receivers);
  } else {
    std::set<Voxel> voxels;
    for (const auto& p : cfg.receivers) {
      if (!voxels.insert(p.voxel).second)
        throw UnsupportedConfiguration("two receivers placed in voxel " + to_string(p.voxel));
      bare.push_back(build_front_end(spec, sys.signal, spec.lattice.index(p.voxel),
                                     p.params.front, p.name));
    }
  }
  auto net = std::make_shared<const CompiledNetwork>(compile(spec));
  sys.initial = net->zero_state();
  for (std::size_t i = 0; i < full.size(); ++i) {
    const ReceiverParams& p = cfg.receivers[i].params;
    set_initial(*net, full[i], p, sys.initial);
    sys.receivers.push_back(observe(*net, full[i], sys.signal, p.front.x_total));
  }
  for (std::size_t i = 0; i < bare.size(); ++i) {
    const FrontEndParams& p = cfg.receivers[i].params.front;
    set_initial(*net, bare[i], p, sys.initial);
    sys.receivers.push_back(observe(*net, bare[i], sys.signal, p.x_total));
  }
  net->validate_state(sys.initial);
  sys.net = std::move(net);
  return sys;
}

LlrTrace circuit_output(const Trajectory& traj, const ReceiverObservables& r,
                        std::span<const double> grid) {
  if (!r.js) throw InvalidReference("circuit_output: receiver '" + r.name + "' has no J*");
  const PopulationSeries js = traj.series(*r.js);
  LlrTrace out{Estimator::circuit, {grid.begin(), grid.end()}, {}};
  out.values.reserve(grid.size());
  for (double t : grid) out.values.push_back(static_cast<double>(js.at(t)));
  return out;
}

Observation observed_activations(const Trajectory& traj, const ReceiverObservables& r) {
  return Observation::from_series(traj.series(r.xs));
}

}  // namespace enzyrx
