#include <algorithm>
#include <cmath>
#include <fstream>

#include "enzyrx/designer.hpp"
#include "enzyrx/errors.hpp"
#include "enzyrx/harness.hpp"
#include "enzyrx/kinetics.hpp"

namespace enzyrx {

using nlohmann::json;

namespace {

class Recorder {
public:
  Recorder(MetricTable& table, std::string experiment)
      : table_(table), experiment_(std::move(experiment)) {}

  void value(std::string metric, double v, std::size_t n, int symbol = -1,
             std::string estimator = {}, std::string receiver = {}) {
    MetricRow r;
    r.experiment = experiment_;
    r.metric = std::move(metric);
    r.value = v;
    r.n = n;
    r.symbol = symbol;
    r.estimator = std::move(estimator);
    r.receiver = std::move(receiver);
    table_.add(std::move(r));
  }

  void mean(std::string metric, std::span<const double> xs, int symbol = -1,
            std::string estimator = {}, std::string receiver = {}) {
    const MeanEstimate m = mean_ci(xs);
    MetricRow r;
    r.experiment = experiment_;
    r.metric = std::move(metric);
    r.value = m.mean;
    r.n = m.n;
    r.symbol = symbol;
    r.estimator = std::move(estimator);
    r.receiver = std::move(receiver);
    r.ci_half_width = m.half_width;
    if (!std::isnan(m.half_width)) {
      r.ci_lo = m.mean - m.half_width;
      r.ci_hi = m.mean + m.half_width;
    }
    table_.add(std::move(r));
  }

  void ber(const BerEstimate& b, double t, std::string estimator, std::string receiver) {
    MetricRow r;
    r.experiment = experiment_;
    r.metric = "ber";
    r.value = b.rate;
    r.n = b.trials0 + b.trials1;
    r.estimator = std::move(estimator);
    r.receiver = std::move(receiver);
    r.decision_time = t;
    // A single trial per symbol leaves the interval meaningless.
    if (b.trials0 > 1 || b.trials1 > 1) {
      r.ci_half_width = b.half_width();
      r.ci_lo = b.ci.lo;
      r.ci_hi = b.ci.hi;
    }
    table_.add(std::move(r));
  }

  void error_rate(int symbol, std::size_t errors, std::size_t trials, double t,
                  std::string estimator, std::string receiver) {
    MetricRow r;
    r.experiment = experiment_;
    r.metric = "error_rate";
    r.symbol = symbol;
    r.value = static_cast<double>(errors) / static_cast<double>(trials);
    r.n = trials;
    r.estimator = std::move(estimator);
    r.receiver = std::move(receiver);
    r.decision_time = t;
    table_.add(std::move(r));
  }

private:
  MetricTable& table_;
  std::string experiment_;
};

double max_of(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  return m;
}

std::vector<double> sample(const PopulationSeries& s, std::span<const double> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(static_cast<double>(s.at(t)));
  return out;
}

std::string sym(int s) { return "symbol" + std::to_string(s); }

SystemConfig medium_config(const Scenario& s, int symbol, ReceiverKind kind) {
  SystemConfig c;
  c.lattice = s.lattice();
  c.tx = s.tx;
  c.symbol = symbol;
  c.tx_voxel = s.tx_voxel;
  c.receivers = s.receivers;
  c.kind = kind;
  return c;
}

// Front-end alone in the single voxel, transmitter and receiver together.
SystemConfig one_voxel_config(const Scenario& s, const OneVoxelModel& m, int symbol) {
  SystemConfig c;
  c.lattice = m.lattice();
  c.tx = s.tx;
  c.symbol = symbol;
  c.tx_voxel = {1, 1, 1};
  ReceiverPlacement p = s.receivers.front();
  p.voxel = {1, 1, 1};
  c.receivers = {p};
  c.kind = ReceiverKind::front_end;
  return c;
}

// ------------------------------------------------------------ impedance

ExperimentResult impedance(const ResolvedScenario& rs) {
  const Scenario& s = rs.scenario;
  ExperimentResult out;
  Recorder rec(out.metrics, "impedance");
  const double T = s.symbol_duration;
  const double t0 = std::min(s.steady_from, T);
  const auto grid = s.grid();
  const std::size_t n = s.trials;

  for (int symbol : {0, 1}) {
    const System sys = build_system(medium_config(s, symbol, ReceiverKind::front_end));
    const std::size_t nr = sys.receivers.size();
    std::vector<std::vector<double>> xk(nr, std::vector<double>(n)), xs = xk;
    std::vector<std::vector<double>> xk0(nr), xs0(nr);
    parallel_for(n, s.threads, [&](std::size_t i) {
      const Trajectory tr = ssa_run(sys.net, sys.initial, T,
                                    trial_seed(s.seed, TrialStream::medium_front_end, symbol, i),
                                    sys.record_spec());
      for (std::size_t r = 0; r < nr; ++r) {
        const auto a = tr.series(sys.receivers[r].xk);
        const auto b = tr.series(sys.receivers[r].xs);
        xk[r][i] = a.time_average(t0, T);
        xs[r][i] = b.time_average(t0, T);
        if (i == 0) {
          xk0[r] = sample(a, grid);
          xs0[r] = sample(b, grid);
        }
      }
    });
    std::vector<double> init(sys.initial.begin(), sys.initial.end());
    const MeanTrajectory mean = rre_solve(*sys.net, init, grid);
    for (std::size_t r = 0; r < nr; ++r) {
      const auto& ob = sys.receivers[r];
      auto total = [&](const std::vector<PopIndex>& pops) {
        std::vector<double> v(grid.size(), 0.0);
        for (PopIndex p : pops) {
          const auto col = mean.series(p);
          for (std::size_t i = 0; i < v.size(); ++i) v[i] += col[i];
        }
        return v;
      };
      const auto rre_xk = total(ob.xk);
      const auto rre_xs = total(ob.xs);
      rec.mean("xk_time_avg", xk[r], symbol, "ssa", ob.name);
      rec.mean("xs_time_avg", xs[r], symbol, "ssa", ob.name);
      rec.value("xk_time_avg_max", max_of(xk[r]), n, symbol, "ssa", ob.name);
      rec.value("xk_final", rre_xk.back(), 1, symbol, "rre", ob.name);
      rec.value("xs_final", rre_xs.back(), 1, symbol, "rre", ob.name);
      TraceTable t;
      t.add("t", grid);
      t.add("ssa_xk", xk0[r]);
      t.add("ssa_xs", xs0[r]);
      t.add("rre_xk", rre_xk);
      t.add("rre_xs", rre_xs);
      out.traces["impedance_" + ob.name + "_" + sym(symbol)] = std::move(t);
    }
  }

  // Whole receiver under Symbol 1: K held by both cycles, and how far the
  // joint X*/Y* occupancy is from the product of the marginals.
  const System sys = build_system(medium_config(s, 1, ReceiverKind::full));
  const std::size_t nr = sys.receivers.size();
  struct Occupancy {
    double seq = 0.0, xs = 0.0, ys = 0.0, joint = 0.0;
  };
  std::vector<std::vector<Occupancy>> occ(nr, std::vector<Occupancy>(n));
  parallel_for(n, s.threads, [&](std::size_t i) {
    const Trajectory tr = ssa_run(sys.net, sys.initial, T,
                                  trial_seed(s.seed, TrialStream::medium_receiver, 1, i),
                                  sys.record_spec());
    for (std::size_t r = 0; r < nr; ++r) {
      const auto& ob = sys.receivers[r];
      std::vector<PopIndex> held = ob.xk;
      held.insert(held.end(), ob.yk.begin(), ob.yk.end());
      occ[r][i] = {tr.series(held).time_average(t0, T), tr.series(ob.xs).time_average(t0, T),
                   tr.series(ob.ys).time_average(t0, T), tr.series(ob.xs_ys).time_average(t0, T)};
    }
  });
  for (std::size_t r = 0; r < nr; ++r) {
    const auto& ob = sys.receivers[r];
    std::vector<double> seq, xs_full;
    double px = 0.0, py = 0.0, pj = 0.0;
    for (const auto& o : occ[r]) {
      seq.push_back(o.seq);
      xs_full.push_back(o.xs);
      px += o.xs;
      py += o.ys;
      pj += o.joint;
    }
    const double norm = static_cast<double>(n) * static_cast<double>(ob.x_total);
    px /= norm;
    py /= norm;
    pj /= norm;
    rec.mean("sequestered_k", seq, 1, "receiver", ob.name);
    rec.mean("xs_time_avg", xs_full, 1, "receiver", ob.name);
    rec.value("p_xs", px, n, 1, "receiver", ob.name);
    rec.value("p_ys", py, n, 1, "receiver", ob.name);
    rec.value("p_xs_ys", pj, n, 1, "receiver", ob.name);
    rec.value("independence_gap", std::abs(pj - px * py), n, 1, "receiver", ob.name);
  }
  return out;
}

// ------------------------------------------------- single-voxel experiments

struct OneVoxelSetup {
  OneVoxelModel model;
  FilterTruncation trunc;
  DemodParams demod;
};

OneVoxelSetup one_voxel_setup(const ResolvedScenario& rs) {
  const Scenario& s = rs.scenario;
  const FrontEndParams& front = s.receivers.front().params.front;
  OneVoxelSetup o;
  o.model = matched_one_voxel(s.tx, front, rs.alpha, s.omega());
  o.trunc = choose_truncation(o.model, s.filter_tail, s.filter_max_states);
  o.demod = derive_demod_params(front, s.tx, one_voxel_alpha(o.model), s.omega());
  return o;
}

void record_truncation(Recorder& rec, const OneVoxelSetup& o) {
  rec.value("filter_states", static_cast<double>(o.trunc.states()), 1);
  rec.value("filter_k_max", o.trunc.k_max, 1);
  rec.value("filter_xk_cap", o.trunc.xk_cap, 1);
  rec.value("one_voxel_escape_rate", o.model.escape_rate, 1);
}

ExperimentResult filter_validate(const ResolvedScenario& rs) {
  const Scenario& s = rs.scenario;
  ExperimentResult out;
  Recorder rec(out.metrics, "filter-validate");
  const OneVoxelSetup o = one_voxel_setup(rs);
  record_truncation(rec, o);
  const std::size_t n = s.trials;
  const double x_total = static_cast<double>(o.model.front.x_total);

  for (int symbol : {0, 1}) {
    const System sys = build_system(one_voxel_config(s, o.model, symbol));
    const auto& ob = sys.receivers.front();
    const double kap = o.demod.kappa[static_cast<std::size_t>(symbol)];
    std::vector<double> run_error(n), boundary(n);
    std::vector<std::vector<double>> per_time(n);
    TraceTable first;
    parallel_for(n, s.threads, [&](std::size_t i) {
      const Trajectory tr = ssa_run(sys.net, sys.initial, s.symbol_duration,
                                    trial_seed(s.seed, TrialStream::one_voxel, symbol, i),
                                    sys.record_spec());
      const PopulationSeries xs = tr.series(ob.xs);
      const FilterTrace f =
          exact_filter(Observation::from_series(xs), symbol, o.model, o.trunc, s.filter);
      std::vector<double> jk(f.times.size()), rel(f.times.size(), kNaN);
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t g = 0; g < f.times.size(); ++g) {
        jk[g] = kap * (x_total - static_cast<double>(xs.at(f.times[g])));
        if (f.times[g] > s.steady_from) {
          rel[g] = std::abs(jk[g] - f.j[g]) / f.j[g];
          sum += rel[g];
          ++count;
        }
      }
      run_error[i] = count ? sum / static_cast<double>(count) : kNaN;
      boundary[i] = f.max_boundary_mass;
      per_time[i] = rel;
      if (i == 0) {
        first.add("t", f.times);
        first.add("j_exact", f.j);
        first.add("j_kappa", jk);
        first.add("xs", sample(xs, f.times));
      }
    });
    rec.mean("rel_error", run_error, symbol, "kappa");
    rec.value("rel_error_max_run", max_of(run_error), n, symbol, "kappa");
    rec.value("boundary_mass_max", max_of(boundary), n, symbol, "exact");
    std::vector<double> mean_rel(per_time.front().size(), 0.0);
    for (const auto& row : per_time)
      for (std::size_t g = 0; g < row.size(); ++g) mean_rel[g] += row[g] / static_cast<double>(n);
    first.add("mean_rel_error", mean_rel);
    out.traces["filter_" + sym(symbol)] = std::move(first);
  }
  return out;
}

ExperimentResult llr_validate(const ResolvedScenario& rs) {
  const Scenario& s = rs.scenario;
  ExperimentResult out;
  Recorder rec(out.metrics, "llr-validate");
  const OneVoxelSetup o = one_voxel_setup(rs);
  record_truncation(rec, o);
  const std::size_t n = s.trials;
  const auto grid = time_grid(s.symbol_duration, s.filter.grid_step);
  const DemodParams& p = o.demod;

  for (int symbol : {0, 1}) {
    const bool exact = std::find(s.exact_llr_symbols.begin(), s.exact_llr_symbols.end(),
                                 symbol) != s.exact_llr_symbols.end();
    const System sys = build_system(one_voxel_config(s, o.model, symbol));
    const auto& ob = sys.receivers.front();
    std::vector<LlrTrace> ex(n), kap(n), hat(n);
    parallel_for(n, s.threads, [&](std::size_t i) {
      const Trajectory tr = ssa_run(sys.net, sys.initial, s.symbol_duration,
                                    trial_seed(s.seed, TrialStream::one_voxel, symbol, i),
                                    sys.record_spec());
      const PopulationSeries xs = tr.series(ob.xs);
      const Observation obs = Observation::from_series(xs);
      kap[i] = approx_llr_kappa(obs, p.kappa[0], p.kappa[1], p.k0, p.x_total, grid);
      hat[i] = approx_llr_hat(xs, tr.series(ob.k), p, grid);
      if (exact) {
        const FilterTrace j0 = exact_filter(obs, 0, o.model, o.trunc, s.filter);
        const FilterTrace j1 = exact_filter(obs, 1, o.model, o.trunc, s.filter);
        ex[i] = exact_llr(j0, j1, p.k0);
      }
    });

    auto terminal = [](const std::vector<LlrTrace>& v, bool absolute) {
      std::vector<double> t;
      for (const auto& l : v) t.push_back(absolute ? std::abs(l.values.back()) : l.values.back());
      return t;
    };
    rec.mean("terminal", terminal(kap, false), symbol, "kappa");
    rec.mean("terminal", terminal(hat, false), symbol, "hat");
    double hat_max = 0.0;
    std::size_t hat_nonzero = 0;
    for (const auto& l : hat) {
      double m = 0.0;
      for (double v : l.values) m = std::max(m, std::abs(v));
      hat_max = std::max(hat_max, m);
      if (m > 0.0) ++hat_nonzero;
    }
    rec.value("max_abs", hat_max, n, symbol, "hat");
    rec.value("nonzero_fraction", static_cast<double>(hat_nonzero) / static_cast<double>(n), n,
              symbol, "hat");

    TraceTable first;
    first.add("t", grid);
    first.add("kappa", kap.front().values);
    first.add("hat", hat.front().values);
    if (exact) {
      first.add("exact", ex.front().values);
      rec.mean("terminal", terminal(ex, false), symbol, "exact");
      rec.mean("terminal_abs", terminal(ex, true), symbol, "exact");
      const auto rk = rmse(kap, ex);
      const auto rh = rmse(hat, ex);
      rec.value("rmse_max", max_of(rk), n, symbol, "kappa");
      rec.value("rmse_max", max_of(rh), n, symbol, "hat");
      rec.value("rmse_terminal", rk.back(), n, symbol, "kappa");
      rec.value("rmse_terminal", rh.back(), n, symbol, "hat");
      TraceTable r;
      r.add("t", grid);
      r.add("rmse_kappa", rk);
      r.add("rmse_hat", rh);
      out.traces["llr_rmse_" + sym(symbol)] = std::move(r);
    }
    out.traces["llr_" + sym(symbol)] = std::move(first);
  }
  return out;
}

// ------------------------------------------------------ full-medium batches

// Circuit output and the log-ratio estimate from the same receiver, per
// receiver and trial.
struct MediumBatch {
  std::vector<std::vector<LlrTrace>> circuit;  // [receiver][trial]
  std::vector<std::vector<LlrTrace>> kappa;
  std::vector<std::vector<double>> circuit_time_avg;
  std::vector<std::string> names;
};

std::vector<DemodParams> receiver_demods(const ResolvedScenario& rs) {
  const Scenario& s = rs.scenario;
  const VoxelLattice lat = s.lattice();
  const DiffusionOperator op = diffusion_matrix(lat);
  std::vector<DemodParams> out;
  for (const auto& r : s.receivers)
    out.push_back(derive_demod_params(r.params.front, s.tx,
                                      alpha_coeffs(op, lat.index(s.tx_voxel), lat.index(r.voxel)),
                                      s.omega()));
  return out;
}

MediumBatch medium_batch(const ResolvedScenario& rs, int symbol) {
  const Scenario& s = rs.scenario;
  const System sys = build_system(medium_config(s, symbol, ReceiverKind::full));
  const auto demods = receiver_demods(rs);
  const auto grid = s.grid();
  const std::size_t nr = sys.receivers.size();
  const std::size_t n = s.trials;
  MediumBatch b;
  b.circuit.assign(nr, std::vector<LlrTrace>(n));
  b.kappa.assign(nr, std::vector<LlrTrace>(n));
  b.circuit_time_avg.assign(nr, std::vector<double>(n));
  for (const auto& r : sys.receivers) b.names.push_back(r.name);
  parallel_for(n, s.threads, [&](std::size_t i) {
    const Trajectory tr = ssa_run(sys.net, sys.initial, s.symbol_duration,
                                  trial_seed(s.seed, TrialStream::medium_receiver, symbol, i),
                                  sys.record_spec());
    for (std::size_t r = 0; r < nr; ++r) {
      const auto& ob = sys.receivers[r];
      const DemodParams& p = demods[r];
      b.circuit[r][i] = circuit_output(tr, ob, grid);
      b.kappa[r][i] = approx_llr_kappa(observed_activations(tr, ob), p.kappa[0], p.kappa[1], p.k0,
                                       p.x_total, grid);
      b.circuit_time_avg[r][i] = tr.series(*ob.js).time_average(0.0, s.symbol_duration);
    }
  });
  return b;
}

std::vector<double> mean_trace(const std::vector<LlrTrace>& v) {
  std::vector<double> m(v.front().values.size(), 0.0);
  for (const auto& l : v)
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += l.values[i] / static_cast<double>(v.size());
  return m;
}

ExperimentResult circuit_compare(const ResolvedScenario& rs) {
  const Scenario& s = rs.scenario;
  ExperimentResult out;
  Recorder rec(out.metrics, "circuit-compare");
  const auto grid = s.grid();
  for (int symbol : {0, 1}) {
    const MediumBatch b = medium_batch(rs, symbol);
    for (std::size_t r = 0; r < b.names.size(); ++r) {
      const auto& name = b.names[r];
      const auto err = rmse(b.circuit[r], b.kappa[r]);
      double window_max = 0.0, window_ss = 0.0;
      std::size_t window_n = 0;
      for (std::size_t g = 0; g < grid.size(); ++g)
        if (grid[g] >= s.compare_from - 1e-9) {
          window_max = std::max(window_max, err[g]);
          window_ss += err[g] * err[g];
          ++window_n;
        }
      const std::size_t n = b.circuit[r].size();
      rec.value("rmse_window_max", window_max, n, symbol, "circuit", name);
      rec.value("rmse_window", std::sqrt(window_ss / static_cast<double>(std::max<std::size_t>(window_n, 1))),
                n, symbol, "circuit", name);
      std::vector<double> tc, tk;
      for (const auto& l : b.circuit[r]) tc.push_back(l.values.back());
      for (const auto& l : b.kappa[r]) tk.push_back(l.values.back());
      rec.mean("terminal", tc, symbol, "circuit", name);
      rec.mean("terminal", tk, symbol, "kappa", name);
      rec.mean("time_avg", b.circuit_time_avg[r], symbol, "circuit", name);
      rec.value("time_avg_max", max_of(b.circuit_time_avg[r]), n, symbol, "circuit", name);
      TraceTable t;
      t.add("t", grid);
      t.add("circuit", b.circuit[r].front().values);
      t.add("kappa", b.kappa[r].front().values);
      t.add("circuit_mean", mean_trace(b.circuit[r]));
      t.add("kappa_mean", mean_trace(b.kappa[r]));
      t.add("rmse", err);
      out.traces["circuit_" + name + "_" + sym(symbol)] = std::move(t);
    }
  }
  return out;
}

ExperimentResult ber_experiment(const ResolvedScenario& rs) {
  const Scenario& s = rs.scenario;
  ExperimentResult out;
  Recorder rec(out.metrics, "ber");
  const auto times = s.decisions();
  const std::array<MediumBatch, 2> batch{medium_batch(rs, 0), medium_batch(rs, 1)};
  for (std::size_t r = 0; r < batch[0].names.size(); ++r) {
    const auto& name = batch[0].names[r];
    TraceTable t;
    t.add("t", times);
    for (const auto& [est, pick] :
         {std::pair{std::string("circuit"), &MediumBatch::circuit},
          std::pair{std::string("kappa"), &MediumBatch::kappa}}) {
      std::vector<double> rate, lo, hi;
      for (double td : times) {
        std::array<std::vector<int>, 2> d;
        for (int sym_sent : {0, 1})
          for (const auto& l : (batch[static_cast<std::size_t>(sym_sent)].*pick)[r])
            d[static_cast<std::size_t>(sym_sent)].push_back(decide(l, s.threshold, td));
        const BerEstimate b = ber(d[0], d[1]);
        rec.ber(b, td, est, name);
        rec.error_rate(0, b.errors0, b.trials0, td, est, name);
        rec.error_rate(1, b.errors1, b.trials1, td, est, name);
        rate.push_back(b.rate);
        lo.push_back(b.ci.lo);
        hi.push_back(b.ci.hi);
      }
      t.add(est, rate);
      t.add(est + "_lo", lo);
      t.add(est + "_hi", hi);
    }
    out.traces["ber_" + name] = std::move(t);
  }
  return out;
}

// ---------------------------------------------------------- design check

json rules_json(const std::vector<std::pair<std::string, std::string>>& rules) {
  json j = json::object();
  for (const auto& [k, v] : rules) j[k] = v;
  return j;
}

ExperimentResult design_check(const ResolvedScenario& rs) {
  const Scenario& s = rs.scenario;
  ExperimentResult out;
  Recorder rec(out.metrics, "design-check");
  const double omega = s.omega();
  const ReceiverParams& rp = s.receivers.front().params;
  const double y_total = static_cast<double>(rp.front.x_total);
  json report;

  // Published cycle fed back through the design rules.
  const ThCycleParams published = presets::th_cycle();
  const ThCoefficients pc = th_coefficients(published, y_total, omega);
  const ThDesign reg =
      design_th_cycle(th_design_target(pc, y_total, 40.0, omega), presets::kDesignK1);
  rec.value("a1", reg.params.a1, 1, -1, "regression");
  rec.value("a2", reg.params.a2, 1, -1, "regression");
  rec.value("a2_rel_error", std::abs(reg.params.a2 - published.a2) / published.a2, 1, -1,
            "regression");
  rec.value("k2", reg.params.k2, 1, -1, "regression");
  rec.value("p_total", reg.params.p_total, 1, -1, "regression");
  rec.value("alpha", reg.alpha, 1, -1, "regression");
  report["regression"] = {{"input", {{"h0", pc.h0}, {"h1", pc.h1}, {"k_t_max", 40.0}}},
                          {"params", to_json(reg.params)},
                          {"rules", rules_json(reg.rules)}};

  // The same target written through rho and the kappa ratio.
  const DemodParams d1 = derive_demod_params(rp.front, presets::tx_setting_1(), rs.alpha, omega);
  const double rho = infer_rho(pc, d1);
  const ThDesign via_rho = design_th_cycle(th_design_target(d1, rho, y_total, 40.0),
                                           presets::kDesignK1);
  rec.value("rho", rho, 1, -1, "kappa-target");
  rec.value("a2", via_rho.params.a2, 1, -1, "kappa-target");
  rec.value("p_total", via_rho.params.p_total, 1, -1, "kappa-target");
  report["kappa_target"] = {{"rho", rho}, {"params", to_json(via_rho.params)}};

  // The receiver this scenario runs.
  const ThCoefficients c = th_coefficients(rp.th, y_total, omega);
  rec.value("h0", c.h0, 1);
  rec.value("h1", c.h1, 1);
  rec.value("threshold", c.threshold(), 1);
  rec.value("k_mean", rs.demod.k_ss[0], 1, 0);
  rec.value("k_mean", rs.demod.k_ss[1], 1, 1);
  const ImpedanceReport imp = check_impedance(rp.front, rp.th, rs.demod.k_ss[1], omega);
  json imp_j = json::array();
  for (const auto& ch : imp.checks) {
    rec.value("impedance " + ch.name, ch.ratio, 1);
    imp_j.push_back({{"name", ch.name}, {"ratio", ch.ratio}, {"margin", ch.margin},
                     {"pass", ch.pass}});
  }
  rec.value("impedance_pass", imp.all_pass() ? 1.0 : 0.0, 1);
  const IntegratorReport integ = design_integrator(rs.demod.xs_ss[1], omega, rp.integrator);
  json int_j = json::array();
  for (const auto& ch : integ.checks) {
    rec.value("integrator " + ch.name, ch.ratio, 1);
    int_j.push_back({{"name", ch.name}, {"ratio", ch.ratio}, {"margin", ch.margin},
                     {"pass", ch.pass}});
  }
  rec.value("enzyme_bound_fraction", integ.enzyme_bound_fraction, 1);
  rec.value("integrator_pass", integ.all_pass() ? 1.0 : 0.0, 1);
  report["receiver"] = {{"th", to_json(rp.th)},
                        {"h0", c.h0},
                        {"h1", c.h1},
                        {"threshold", c.threshold()},
                        {"impedance", imp_j},
                        {"impedance_note", imp.note},
                        {"integrator", int_j},
                        {"enzyme_bound_fraction", integ.enzyme_bound_fraction},
                        {"design_rules", rules_json(rs.design_rules)}};
  out.documents["design_report"] = report;
  ReceiverParams written = rp;
  for (const auto& [k, v] : rs.design_rules) written.provenance[k] = v;
  out.documents["receiver_params"] = to_json(written);
  return out;
}

}  // namespace

std::vector<std::string> experiment_names() {
  return {"impedance", "filter-validate", "llr-validate", "circuit-compare", "ber", "design-check"};
}

ExperimentResult run_experiment(std::string_view name, const Scenario& scenario) {
  const auto names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw InvalidReference("unknown experiment '" + std::string(name) + "'");
  const ResolvedScenario rs = resolve(scenario);
  ExperimentResult out;
  if (name == "impedance") out = impedance(rs);
  else if (name == "filter-validate") out = filter_validate(rs);
  else if (name == "llr-validate") out = llr_validate(rs);
  else if (name == "circuit-compare") out = circuit_compare(rs);
  else if (name == "ber") out = ber_experiment(rs);
  else out = design_check(rs);
  out.experiment = std::string(name);
  out.summary = {{"experiment", out.experiment},
                 {"scenario", to_json(rs.scenario)},
                 {"demod", to_json(rs.demod)},
                 {"alpha", {{"rx_tx", rs.alpha.rx_tx}, {"rx_rx", rs.alpha.rx_rx}}},
                 {"design_rules", rules_json(rs.design_rules)},
                 {"metrics", out.metrics.to_json()}};
  return out;
}

void write_outputs(const ExperimentResult& result, const Scenario& scenario,
                   const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "traces", ec);
  if (ec) throw ConfigError("cannot create " + (out_dir / "traces").string() + ": " + ec.message());
  auto open = [](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(out_dir / "metrics.csv");
    result.metrics.write_csv(f);
  }
  for (const auto& [key, table] : result.traces) {
    auto f = open(out_dir / "traces" / (key + ".csv"));
    table.write_csv(f);
  }
  for (const auto& [key, doc] : result.documents) {
    auto f = open(out_dir / (key + ".json"));
    f << doc.dump(2) << '\n';
  }
  json summary = result.summary;
  summary["seed"] = scenario.seed;
  summary["trials"] = scenario.trials;
  auto f = open(out_dir / "summary.json");
  f << summary.dump(2) << '\n';
}

}  // namespace enzyrx
