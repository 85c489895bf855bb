#include "enzyrx/ssa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>

#include "enzyrx/errors.hpp"

namespace enzyrx {

// ---------------------------------------------------------------------------
// PopulationSeries

PopulationSeries::PopulationSeries(std::vector<double> times, std::vector<std::int64_t> values,
                                   double horizon)
    : times_(std::move(times)), values_(std::move(values)), horizon_(horizon) {
  if (times_.empty() || times_.size() != values_.size() || times_.front() != 0.0)
    throw InvalidReference("population series needs matching times/values starting at 0");
  cumulative_.resize(times_.size());
  cumulative_[0] = 0.0;
  for (std::size_t i = 1; i < times_.size(); ++i)
    cumulative_[i] =
        cumulative_[i - 1] + static_cast<double>(values_[i - 1]) * (times_[i] - times_[i - 1]);
}

std::int64_t PopulationSeries::at(double t) const {
  // Right continuity: an event at exactly t is already applied.
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double PopulationSeries::integral(double t0, double t1) const {
  auto primitive = [this](double t) {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t i = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    return cumulative_[i] + static_cast<double>(values_[i]) * (t - times_[i]);
  };
  return primitive(t1) - primitive(t0);
}

double PopulationSeries::time_average(double t0, double t1) const {
  if (!(t1 > t0)) throw InvalidReference("time_average: empty window");
  return integral(t0, t1) / (t1 - t0);
}

std::vector<double> PopulationSeries::jump_times(Direction dir) const {
  std::vector<double> out;
  for (std::size_t i = 1; i < times_.size(); ++i) {
    const std::int64_t change = values_[i] - values_[i - 1];
    const std::int64_t n = dir == Direction::up ? change : -change;
    for (std::int64_t k = 0; k < n; ++k) out.push_back(times_[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::shared_ptr<const CompiledNetwork> net, SystemState initial,
                       double horizon, RecordSpec record)
    : net_(std::move(net)), initial_(std::move(initial)), horizon_(horizon) {
  if (!net_) throw InvalidReference("trajectory without a network");
  final_ = initial_;
  end_time_ = horizon_;
  record_all_ = record.everything;
  recorded_.assign(net_->population_count(), record.everything);
  for (PopIndex p : record.pops) {
    if (p >= recorded_.size()) throw InvalidReference("record spec names an unknown population");
    recorded_[p] = true;
  }
}

void Trajectory::require_recorded(PopIndex p) const {
  if (!records(p))
    throw InvalidReference("population " + std::to_string(p) + " was not recorded in this run");
}

std::int64_t Trajectory::count_at(PopIndex p, double t) const {
  require_recorded(p);
  std::int64_t n = initial_[p];
  const auto& chans = net_->channels();
  for (const Event& e : events_) {
    if (e.time > t) break;
    for (const StateDelta& d : chans[e.channel].delta)
      if (d.pop == p) n += d.change;
  }
  return n;
}

PopulationSeries Trajectory::series(std::span<const PopIndex> pops) const {
  std::vector<char> member(net_->population_count(), 0);
  std::int64_t n = 0;
  for (PopIndex p : pops) {
    require_recorded(p);
    member[p] += 1;
    n += initial_[p];
  }
  std::vector<double> times{0.0};
  std::vector<std::int64_t> values{n};
  const auto& chans = net_->channels();
  for (const Event& e : events_) {
    std::int64_t change = 0;
    for (const StateDelta& d : chans[e.channel].delta)
      if (member[d.pop]) change += member[d.pop] * d.change;
    if (change == 0) continue;
    n += change;
    if (times.back() == e.time) {
      values.back() = n;
    } else {
      times.push_back(e.time);
      values.push_back(n);
    }
  }
  return PopulationSeries(std::move(times), std::move(values), horizon_);
}

// ---------------------------------------------------------------------------
// Direct method

namespace {

// First-order channels that consume the same population share one leaf with
// propensity n * (sum of coefficients); sources share one constant leaf.
struct Leaf {
  enum class Kind : std::uint8_t { source, first_order, second_order } kind;
  PopIndex a = kNoPop;
  PopIndex b = kNoPop;
  double coefficient = 0.0;            // summed for grouped leaves
  std::vector<std::uint32_t> members;  // channel ids
  std::vector<double> cumulative;      // running coefficient sums over members
};

class SumTree {
public:
  explicit SumTree(std::size_t leaves) {
    cap_ = std::bit_ceil(std::max<std::size_t>(leaves, 1));
    node_.assign(2 * cap_, 0.0);
  }

  void set(std::size_t leaf, double value) {
    std::size_t i = leaf + cap_;
    node_[i] = value;
    for (i >>= 1; i >= 1; i >>= 1) node_[i] = node_[2 * i] + node_[2 * i + 1];
  }

  double total() const noexcept { return node_[1]; }
  double value(std::size_t leaf) const noexcept { return node_[leaf + cap_]; }

  // Returns the leaf whose cumulative interval contains r and leaves in r the
  // offset inside that leaf. Never lands on a zero-propensity leaf.
  std::size_t find(double& r) const {
    std::size_t i = 1;
    while (i < cap_) {
      const double left = node_[2 * i];
      const double right = node_[2 * i + 1];
      if ((r < left && left > 0.0) || right <= 0.0) {
        i = 2 * i;
        r = std::min(r, left);
      } else {
        r -= left;
        i = 2 * i + 1;
        if (r < 0.0) r = 0.0;
      }
    }
    return i - cap_;
  }

private:
  std::size_t cap_;
  std::vector<double> node_;
};

class DirectMethod {
public:
  explicit DirectMethod(const CompiledNetwork& net) : net_(net) {
    const auto& chans = net.channels();
    const std::size_t npop = net.population_count();
    std::vector<std::size_t> group_of(npop, SIZE_MAX);
    std::size_t source_leaf = SIZE_MAX;

    for (std::uint32_t c = 0; c < chans.size(); ++c) {
      const CompiledChannel& ch = chans[c];
      if (ch.coefficient <= 0.0) continue;
      std::size_t li;
      if (ch.order == 0) {
        if (source_leaf == SIZE_MAX) {
          source_leaf = leaves_.size();
          leaves_.push_back(Leaf{Leaf::Kind::source, kNoPop, kNoPop, 0.0, {}, {}});
        }
        li = source_leaf;
      } else if (ch.order == 1) {
        const PopIndex p = ch.reactants[0];
        if (group_of[p] == SIZE_MAX) {
          group_of[p] = leaves_.size();
          leaves_.push_back(Leaf{Leaf::Kind::first_order, p, kNoPop, 0.0, {}, {}});
        }
        li = group_of[p];
      } else {
        li = leaves_.size();
        leaves_.push_back(
            Leaf{Leaf::Kind::second_order, ch.reactants[0], ch.reactants[1], 0.0, {}, {}});
      }
      Leaf& leaf = leaves_[li];
      leaf.coefficient += ch.coefficient;
      leaf.members.push_back(c);
      leaf.cumulative.push_back(leaf.coefficient);
    }

    // Population -> leaves whose propensity reads it.
    std::vector<std::vector<std::uint32_t>> readers(npop);
    for (std::uint32_t li = 0; li < leaves_.size(); ++li) {
      const Leaf& l = leaves_[li];
      if (l.a != kNoPop) readers[l.a].push_back(li);
      if (l.b != kNoPop) readers[l.b].push_back(li);
    }
    affected_.resize(chans.size());
    for (std::size_t c = 0; c < chans.size(); ++c) {
      auto& dep = affected_[c];
      for (const StateDelta& d : chans[c].delta)
        dep.insert(dep.end(), readers[d.pop].begin(), readers[d.pop].end());
      std::sort(dep.begin(), dep.end());
      dep.erase(std::unique(dep.begin(), dep.end()), dep.end());
    }
  }

  void run(SystemState& x, PhiloxEngine& rng, double horizon,
           const std::vector<char>& touches_recorded, std::vector<Event>& events,
           Termination& term, double& end_time, std::uint64_t& fired) const {
    SumTree tree(leaves_.size());
    for (std::size_t li = 0; li < leaves_.size(); ++li) tree.set(li, leaf_propensity(li, x));
    const auto& chans = net_.channels();
    double t = 0.0;
    fired = 0;
    term = Termination::horizon;
    end_time = horizon;
    for (;;) {
      const double a0 = tree.total();
      if (!std::isfinite(a0)) {
        term = Termination::overflow;
        end_time = t;
        return;
      }
      if (a0 <= 0.0) {
        term = Termination::absorbed;
        end_time = t;
        return;
      }
      t += rng.exponential(a0);
      if (t > horizon) return;

      double r = rng.uniform() * a0;
      const std::size_t li = tree.find(r);
      const std::uint32_t c = pick_member(li, r, x);
      const CompiledChannel& ch = chans[c];
      for (const StateDelta& d : ch.delta) x[d.pop] += d.change;
      ++fired;
      if (touches_recorded[c]) events.push_back({t, c});
      for (std::uint32_t dep : affected_[c]) tree.set(dep, leaf_propensity(dep, x));
    }
  }

private:
  double leaf_propensity(std::size_t li, const SystemState& x) const {
    const Leaf& l = leaves_[li];
    switch (l.kind) {
      case Leaf::Kind::source:
        return l.coefficient;
      case Leaf::Kind::first_order:
        return l.coefficient * static_cast<double>(x[l.a]);
      case Leaf::Kind::second_order:
        return l.coefficient * static_cast<double>(x[l.a]) * static_cast<double>(x[l.b]);
    }
    return 0.0;
  }

  std::uint32_t pick_member(std::size_t li, double r, const SystemState& x) const {
    const Leaf& l = leaves_[li];
    if (l.members.size() == 1) return l.members[0];
    // Offset inside the leaf scaled back to coefficient units.
    double s = r;
    if (l.kind == Leaf::Kind::first_order) s /= static_cast<double>(x[l.a]);
    auto it = std::upper_bound(l.cumulative.begin(), l.cumulative.end(), s);
    if (it == l.cumulative.end()) --it;
    return l.members[static_cast<std::size_t>(it - l.cumulative.begin())];
  }

  const CompiledNetwork& net_;
  std::vector<Leaf> leaves_;
  std::vector<std::vector<std::uint32_t>> affected_;
};

}  // namespace

Trajectory ssa_run(std::shared_ptr<const CompiledNetwork> net, SystemState init, double horizon,
                   SeedSpec seed, RecordSpec record) {
  if (!net) throw InvalidReference("ssa_run: null network");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InvalidReference("ssa_run: horizon must be positive and finite");
  net->validate_state(init);

  Trajectory traj(net, init, horizon, std::move(record));
  std::vector<char> touches(net->channel_count(), 0);
  for (std::size_t c = 0; c < net->channel_count(); ++c)
    for (const StateDelta& d : net->channels()[c].delta)
      if (traj.recorded_[d.pop]) touches[c] = 1;

  PhiloxEngine rng(seed);
  DirectMethod engine(*net);
  SystemState x = std::move(init);
  engine.run(x, rng, horizon, touches, traj.events_, traj.termination_, traj.end_time_,
             traj.simulated_events_);
  traj.final_ = std::move(x);
  return traj;
}

double time_average(const Trajectory& traj, SpeciesId species, std::size_t voxel, double t0,
                    double t1) {
  if (!(t0 >= 0.0 && t1 > t0 && t1 <= traj.horizon()))
    throw InvalidReference("time_average: window must satisfy 0 <= t0 < t1 <= T");
  return traj.series(traj.network().population(species, voxel)).time_average(t0, t1);
}

std::vector<double> extract_jump_times(const Trajectory& traj, SpeciesId species,
                                       std::size_t voxel, PopulationSeries::Direction dir) {
  return traj.series(traj.network().population(species, voxel)).jump_times(dir);
}

// ---------------------------------------------------------------------------
// Export

void write_csv(const Trajectory& traj, std::ostream& out) {
  const CompiledNetwork& net = traj.network();
  const auto& pops = net.populations();
  out << "t,species,voxel,count\n";
  out.precision(17);
  SystemState x = traj.initial_state();
  for (PopIndex p = 0; p < pops.size(); ++p)
    if (traj.records(p))
      out << 0.0 << ',' << net.species()[pops[p].species].name << ',' << pops[p].voxel << ','
          << x[p] << '\n';
  for (const Event& e : traj.events()) {
    for (const StateDelta& d : net.channels()[e.channel].delta) {
      x[d.pop] += d.change;
      if (!traj.records(d.pop)) continue;
      out << e.time << ',' << net.species()[pops[d.pop].species].name << ','
          << pops[d.pop].voxel << ',' << x[d.pop] << '\n';
    }
  }
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary log assumes little-endian");

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("binary log truncated");
  return v;
}

constexpr char kMagic[4] = {'E', 'Z', 'R', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_binary_log(const Trajectory& traj, std::ostream& out) {
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, traj.horizon());
  put(out, traj.end_time());
  put(out, static_cast<std::uint32_t>(traj.termination()));
  put(out, static_cast<std::uint64_t>(traj.simulated_events()));
  const auto npop = static_cast<std::uint32_t>(traj.initial_state().size());
  put(out, npop);
  for (std::int64_t v : traj.initial_state()) put(out, v);
  for (PopIndex p = 0; p < npop; ++p) put(out, static_cast<std::uint8_t>(traj.records(p)));
  put(out, static_cast<std::uint64_t>(traj.events().size()));
  for (const Event& e : traj.events()) {
    put(out, e.time);
    put(out, e.channel);
  }
}

Trajectory read_binary_log(std::shared_ptr<const CompiledNetwork> net, std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("not an event log");
  if (get<std::uint32_t>(in) != kVersion) throw ConfigError("unsupported event log version");
  const double horizon = get<double>(in);
  const double end_time = get<double>(in);
  const auto term = get<std::uint32_t>(in);
  const auto fired = get<std::uint64_t>(in);
  const auto npop = get<std::uint32_t>(in);
  if (!net || npop != net->population_count())
    throw ConfigError("event log does not match the network");
  SystemState init(npop);
  for (auto& v : init) v = get<std::int64_t>(in);
  RecordSpec rec = RecordSpec::only({});
  for (PopIndex p = 0; p < npop; ++p)
    if (get<std::uint8_t>(in)) rec.pops.push_back(p);
  if (rec.pops.size() == npop) rec = RecordSpec::all();

  Trajectory traj(net, init, horizon, std::move(rec));
  traj.end_time_ = end_time;
  traj.termination_ = static_cast<Termination>(term);
  traj.simulated_events_ = fired;
  const auto n = get<std::uint64_t>(in);
  traj.events_.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double t = get<double>(in);
    const auto c = get<std::uint32_t>(in);
    if (c >= net->channel_count()) throw ConfigError("event log names an unknown channel");
    traj.events_.push_back({t, c});
  }
  // Replay the stored events; populations outside the record keep their
  // initial counts.
  SystemState x = traj.initial_;
  for (const Event& e : traj.events_)
    for (const StateDelta& d : net->channels()[e.channel].delta) x[d.pop] += d.change;
  traj.final_ = std::move(x);
  return traj;
}

}  // namespace enzyrx
