#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "enzyrx/network.hpp"
#include "enzyrx/rng.hpp"

namespace enzyrx {

// Which populations a run keeps an exact event record for. Recording a subset
// keeps large-medium runs small: events that touch no recorded population are
// simulated but not stored.
struct RecordSpec {
  bool everything = true;
  std::vector<PopIndex> pops;

  static RecordSpec all() { return {}; }
  static RecordSpec only(std::vector<PopIndex> p) { return {false, std::move(p)}; }
};

enum class Termination {
  horizon,   // reached T
  absorbed,  // total propensity hit zero before T; final state held to T
  overflow,  // total propensity became non-finite
};

struct Event {
  double time;
  std::uint32_t channel;
  friend bool operator==(const Event&, const Event&) = default;
};

// Right-continuous piecewise-constant count path on [0, horizon].
class PopulationSeries {
public:
  PopulationSeries(std::vector<double> times, std::vector<std::int64_t> values, double horizon);

  std::int64_t at(double t) const;
  // Exact integral of the path over [t0, t1].
  double integral(double t0, double t1) const;
  double time_average(double t0, double t1) const;

  enum class Direction { up, down };
  // Times at which the count increases (up) or decreases (down); a change of
  // size m contributes the time m times.
  std::vector<double> jump_times(Direction dir) const;

  std::span<const double> times() const noexcept { return times_; }
  std::span<const std::int64_t> values() const noexcept { return values_; }
  double horizon() const noexcept { return horizon_; }

private:
  std::vector<double> times_;          // times_[0] == 0
  std::vector<std::int64_t> values_;   // value on [times_[i], times_[i+1])
  std::vector<double> cumulative_;     // integral from 0 to times_[i]
  double horizon_;
};

class Trajectory {
public:
  Trajectory(std::shared_ptr<const CompiledNetwork> net, SystemState initial, double horizon,
             RecordSpec record);

  const CompiledNetwork& network() const noexcept { return *net_; }
  std::shared_ptr<const CompiledNetwork> network_ptr() const noexcept { return net_; }
  double horizon() const noexcept { return horizon_; }
  Termination termination() const noexcept { return termination_; }
  double end_time() const noexcept { return end_time_; }  // last simulated instant
  std::uint64_t simulated_events() const noexcept { return simulated_events_; }

  const SystemState& initial_state() const noexcept { return initial_; }
  const SystemState& final_state() const noexcept { return final_; }
  const std::vector<Event>& events() const noexcept { return events_; }

  bool records(PopIndex p) const { return p < recorded_.size() && recorded_[p]; }
  bool records_everything() const noexcept { return record_all_; }

  std::int64_t count_at(PopIndex p, double t) const;
  // Sum of several populations (weights 1) as one path.
  PopulationSeries series(std::span<const PopIndex> pops) const;
  PopulationSeries series(PopIndex p) const { return series(std::span<const PopIndex>(&p, 1)); }

private:
  friend Trajectory ssa_run(std::shared_ptr<const CompiledNetwork>, SystemState, double, SeedSpec,
                            RecordSpec);
  friend Trajectory read_binary_log(std::shared_ptr<const CompiledNetwork>, std::istream&);

  void require_recorded(PopIndex p) const;

  std::shared_ptr<const CompiledNetwork> net_;
  SystemState initial_;
  SystemState final_;
  double horizon_;
  double end_time_ = 0.0;
  Termination termination_ = Termination::horizon;
  std::uint64_t simulated_events_ = 0;
  bool record_all_ = true;
  std::vector<bool> recorded_;  // by population
  std::vector<Event> events_;
};

// Gillespie direct method. Deterministic for a fixed (network, init, seed).
Trajectory ssa_run(std::shared_ptr<const CompiledNetwork> net, SystemState init, double horizon,
                   SeedSpec seed, RecordSpec record = RecordSpec::all());

double time_average(const Trajectory& traj, SpeciesId species, std::size_t voxel, double t0,
                    double t1);

std::vector<double> extract_jump_times(const Trajectory& traj, SpeciesId species,
                                       std::size_t voxel, PopulationSeries::Direction dir);

// CSV rows "t,species,voxel,count" (count after the event; voxel is the
// 0-based linear index). Time 0 rows carry the initial recorded state.
void write_csv(const Trajectory& traj, std::ostream& out);

// Binary event log, little-endian:
//   char[4] "EZRT", u32 version(=1), f64 horizon, f64 end_time, u32 termination,
//   u64 simulated_events, u32 n_pops, i64 initial[n_pops], u8 recorded[n_pops],
//   u64 n_events, then n_events x {f64 time, u32 channel}.
void write_binary_log(const Trajectory& traj, std::ostream& out);
Trajectory read_binary_log(std::shared_ptr<const CompiledNetwork> net, std::istream& in);

}  // namespace enzyrx
