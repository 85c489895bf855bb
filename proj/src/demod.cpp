#include "enzyrx/demod.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <cmath>
#include <ostream>

#include "enzyrx/errors.hpp"

namespace enzyrx {

// ---------------------------------------------------------------------------
// Parameters

double kappa(double k_ss, double xs_ss, std::int64_t x_total, double alpha_rx_rx, double g1,
             double omega, double hm0) {
  const double k_conc = k_ss / omega;
  const double feedback = alpha_rx_rx * g1 * (static_cast<double>(x_total) - xs_ss) / omega;
  return k_conc / (feedback + k_conc + hm0);
}

double kappa_dominance(double k_ss, double xs_ss, std::int64_t x_total, double alpha_rx_rx,
                       double g1, double omega, double hm0) {
  const double feedback = alpha_rx_rx * g1 * (static_cast<double>(x_total) - xs_ss) / omega;
  return hm0 / std::max(feedback, k_ss / omega);
}

DemodParams derive_demod_params(const FrontEndParams& front, const TxSetting& tx,
                                const AlphaCoeffs& alpha, double omega, G1Alias g1_alias) {
  DemodParams p;
  p.hm0 = front.hm0();
  p.gamma = front.gamma();
  p.omega = omega;
  p.g_minus = front.g_minus;
  p.g0 = front.g0;
  p.k0 = front.g0;
  p.g1_alias = g1_alias;
  p.g1 = g1_alias == G1Alias::g0 ? front.g0 : front.d0 + front.g0;
  p.x_total = front.x_total;
  p.alpha_rx_tx = alpha.rx_tx;
  p.alpha_rx_rx = alpha.rx_rx;
  for (int s = 0; s < 2; ++s) {
    p.k_ss[s] = k_steady(alpha, tx.r_tx, tx.mrna[s]);
    p.xs_ss[s] = qss_frontend_counts(p.k_ss[s], front, omega).second;
    p.kappa[s] = kappa(p.k_ss[s], p.xs_ss[s], p.x_total, p.alpha_rx_rx, p.g1, omega, p.hm0);
  }
  p.provenance = {
      {"hm0", "(d0 + g0) / a0"},
      {"gamma", "g0 / g_minus"},
      {"omega", "voxel edge cubed"},
      {"k0", "bound to g0, the only X*-producing rate constant"},
      {"g1", g1_alias == G1Alias::g0 ? "alias of g0" : "alias of d0 + g0"},
      {"alpha_rx_tx", "-(D^-1)[rx, tx] of the K jump generator"},
      {"alpha_rx_rx", "-(D^-1)[rx, rx] of the K jump generator"},
      {"k_ss", "alpha_rx_tx * r_tx * mRNA count of " + tx.name},
      {"xs_ss", "quasi-steady front-end at k_ss"},
      {"kappa", "[K]/(alpha_rx_rx g1 (X_T - xs_ss)/omega + [K] + hm0)"},
  };
  return p;
}

nlohmann::json to_json(const DemodParams& p) {
  return {
      {"hm0", p.hm0},
      {"gamma", p.gamma},
      {"omega", p.omega},
      {"g_minus", p.g_minus},
      {"g0", p.g0},
      {"k0", p.k0},
      {"g1", p.g1},
      {"g1_alias", p.g1_alias == G1Alias::g0 ? "g0" : "d0_plus_g0"},
      {"x_total", p.x_total},
      {"alpha_rx_tx", p.alpha_rx_tx},
      {"alpha_rx_rx", p.alpha_rx_rx},
      {"k_ss", p.k_ss},
      {"xs_ss", p.xs_ss},
      {"kappa", p.kappa},
      {"log_ratio", p.log_ratio()},
      {"k_threshold", p.k_threshold()},
      {"provenance", p.provenance},
  };
}

DemodParams demod_params_from_json(const nlohmann::json& j) {
  try {
    DemodParams p;
    p.hm0 = j.at("hm0").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.omega = j.at("omega").get<double>();
    p.g_minus = j.at("g_minus").get<double>();
    p.g0 = j.at("g0").get<double>();
    p.k0 = j.at("k0").get<double>();
    p.g1 = j.at("g1").get<double>();
    p.g1_alias = j.value("g1_alias", "g0") == "g0" ? G1Alias::g0 : G1Alias::d0_plus_g0;
    p.x_total = j.at("x_total").get<std::int64_t>();
    p.alpha_rx_tx = j.at("alpha_rx_tx").get<double>();
    p.alpha_rx_rx = j.at("alpha_rx_rx").get<double>();
    p.k_ss = j.at("k_ss").get<std::array<double, 2>>();
    p.xs_ss = j.at("xs_ss").get<std::array<double, 2>>();
    p.kappa = j.at("kappa").get<std::array<double, 2>>();
    if (j.contains("provenance"))
      p.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("demodulator parameters: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Single-voxel model

VoxelLattice OneVoxelModel::lattice() const {
  // No neighbours, so only the escape channels remain; spread over six faces.
  return VoxelLattice({1, 1, 1}, std::cbrt(omega), 0.0, escape_rate / 6.0);
}

OneVoxelModel matched_one_voxel(const TxSetting& tx, const FrontEndParams& front,
                                const AlphaCoeffs& medium_alpha, double omega) {
  if (!(medium_alpha.rx_tx > 0.0))
    throw InvalidReference("matched_one_voxel: no K reaches the receiver voxel");
  OneVoxelModel m;
  m.omega = omega;
  m.escape_rate = 1.0 / medium_alpha.rx_tx;
  m.source_rate = {tx.source_rate(0), tx.source_rate(1)};
  m.front = front;
  return m;
}

FilterTruncation choose_truncation(const OneVoxelModel& model, double tail,
                                   std::size_t max_states) {
  const double mean = std::max(model.k_mean(0), model.k_mean(1));
  FilterTruncation t;
  if (mean > 0.0) {
    const boost::math::poisson_distribution<> pois(mean);
    int k = static_cast<int>(mean);
    while (boost::math::cdf(boost::math::complement(pois, k)) >= tail) ++k;
    t.k_max = k;
  }
  const auto per_row = max_states / static_cast<std::size_t>(t.k_max + 1);
  if (per_row < 2) throw InvalidReference("choose_truncation: state budget too small");
  t.xk_cap = static_cast<int>(std::min<std::size_t>(per_row - 1,
                                                   static_cast<std::size_t>(model.front.x_total)));
  return t;
}

// ---------------------------------------------------------------------------
// Observations and posterior

Observation Observation::from_series(const PopulationSeries& xs) {
  Observation o;
  o.horizon = xs.horizon();
  o.initial = xs.values().front();
  for (std::size_t i = 1; i < xs.times().size(); ++i) {
    const std::int64_t change = xs.values()[i] - xs.values()[i - 1];
    for (std::int64_t n = 0; n < std::abs(change); ++n) {
      o.times.push_back(xs.times()[i]);
      o.steps.push_back(change > 0 ? +1 : -1);
    }
  }
  return o;
}

PopulationSeries Observation::as_series() const {
  std::vector<double> t{0.0};
  std::vector<std::int64_t> v{initial};
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::int64_t next = v.back() + steps[i];
    if (t.back() == times[i]) {
      v.back() = next;
    } else {
      t.push_back(times[i]);
      v.push_back(next);
    }
  }
  return PopulationSeries(std::move(t), std::move(v), horizon);
}

std::vector<double> Observation::up_times() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (steps[i] > 0) out.push_back(times[i]);
  return out;
}

double PosteriorGrid::mean_xk() const {
  const int stride = trunc.xk_cap + 1;
  double s = 0.0, z = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    s += static_cast<double>(static_cast<int>(i) % stride) * weights[i];
    z += weights[i];
  }
  return s / z;
}

double PosteriorGrid::mean_k() const {
  const int stride = trunc.xk_cap + 1;
  double s = 0.0, z = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    s += static_cast<double>(static_cast<int>(i) / stride) * weights[i];
    z += weights[i];
  }
  return s / z;
}

double PosteriorGrid::mass() const {
  double z = 0.0;
  for (double w : weights) z += w;
  return z;
}

double PosteriorGrid::boundary_mass() const {
  const std::size_t stride = static_cast<std::size_t>(trunc.xk_cap) + 1;
  double z = 0.0;
  for (std::size_t i = static_cast<std::size_t>(trunc.k_max) * stride; i < weights.size(); ++i)
    z += weights[i];
  return z / mass();
}

// ---------------------------------------------------------------------------
// Exact filter

namespace {

// Unnormalised forward equation of (K, XK) given a fixed X*, propagated by
// uniformisation. Rates leaving the grid are dropped, so the only loss of
// mass is the activation hazard g0 * XK.
class HiddenStateFilter {
public:
  HiddenStateFilter(const OneVoxelModel& m, int symbol, const FilterTruncation& t)
      : m_(m), trunc_(t), stride_(t.xk_cap + 1), lambda_(m.source_rate.at(symbol)),
        cache_(static_cast<std::size_t>(m.front.x_total) + 1) {
    if (t.k_max < 1 || t.xk_cap < 1) throw InvalidReference("exact_filter: truncation too small");
    if (!(m.front.g0 > 0.0)) throw InvalidReference("exact_filter: g0 must be positive");
    post_.trunc = t;
    post_.weights.assign(t.states(), 0.0);
    post_.weights[0] = 1.0;
    scratch_.resize(post_.weights.size());
    acc_.resize(post_.weights.size());
  }

  const PosteriorGrid& posterior() const { return post_; }
  double log_decay() const { return log_decay_; }

  void propagate(double dt, std::int64_t xs, double max_block) {
    if (!(dt > 0.0)) return;
    const Coeffs& c = coeffs(xs);
    const double total = c.lambda * dt;
    const int blocks = std::max(1, static_cast<int>(std::ceil(total / max_block)));
    for (int b = 0; b < blocks; ++b) block(c, total / blocks);
  }

  // Activation: reweight by g0 * XK and move one XK to X* releasing its K.
  // Returns the pre-update posterior mean of XK.
  double activate() {
    const double j = post_.mean_xk();
    std::fill(scratch_.begin(), scratch_.end(), 0.0);
    const double g0 = m_.front.g0;
    for (int k = 0; k <= trunc_.k_max; ++k) {
      const int dest = std::min(k + 1, trunc_.k_max);
      for (int xk = 1; xk < stride_; ++xk)
        scratch_[idx(dest, xk - 1)] += g0 * xk * post_.weights[idx(k, xk)];
    }
    double z = 0.0;
    for (double v : scratch_) z += v;
    if (!(z > 0.0))
      throw InconsistentObservation("activation observed while no XK is possible");
    for (double& v : scratch_) v /= z;
    post_.weights.swap(scratch_);
    log_jumps_ += std::log(z);
    return j;
  }

  double log_z() const { return log_decay_ + log_jumps_; }

private:
  struct Coeffs {
    bool ready = false;
    double lambda = 0.0;  // uniformisation rate
    double birth = 0.0;   // lambda_s / Lambda
    std::vector<double> keep, escape, bind, unbind;  // per state, / Lambda
  };

  std::size_t idx(int k, int xk) const {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(stride_) +
           static_cast<std::size_t>(xk);
  }

  const Coeffs& coeffs(std::int64_t xs) {
    Coeffs& c = cache_.at(static_cast<std::size_t>(xs));
    if (c.ready) return c;
    const std::size_t n = trunc_.states();
    std::vector<double> out(n), esc(n), bnd(n), unb(n);
    const double bind_coef = m_.front.a0 / m_.omega;
    double peak = 0.0;
    for (int k = 0; k <= trunc_.k_max; ++k)
      for (int xk = 0; xk < stride_; ++xk) {
        const std::size_t i = idx(k, xk);
        const double free_x =
            std::max<double>(0.0, static_cast<double>(m_.front.x_total - xs - xk));
        const double birth = k < trunc_.k_max ? lambda_ : 0.0;
        esc[i] = m_.escape_rate * k;
        bnd[i] = xk + 1 < stride_ ? bind_coef * k * free_x : 0.0;
        unb[i] = k < trunc_.k_max ? m_.front.d0 * xk : 0.0;
        out[i] = birth + esc[i] + bnd[i] + unb[i] + m_.front.g0 * xk;
        peak = std::max(peak, out[i]);
      }
    c.lambda = peak > 0.0 ? peak : 1.0;
    c.birth = lambda_ / c.lambda;
    c.keep.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      c.keep[i] = 1.0 - out[i] / c.lambda;
      esc[i] /= c.lambda;
      bnd[i] /= c.lambda;
      unb[i] /= c.lambda;
    }
    c.escape = std::move(esc);
    c.bind = std::move(bnd);
    c.unbind = std::move(unb);
    c.ready = true;
    return c;
  }

  // y = P v with P = I + Q/Lambda, in pull form.
  void step(const Coeffs& c, const std::vector<double>& v, std::vector<double>& y) const {
    const int kmax = trunc_.k_max;
    const int cap = stride_ - 1;
    for (int k = 0; k <= kmax; ++k) {
      const std::size_t row = idx(k, 0);
      for (int xk = 0; xk <= cap; ++xk) {
        const std::size_t i = row + static_cast<std::size_t>(xk);
        double s = c.keep[i] * v[i];
        if (k > 0) {
          s += c.birth * v[i - stride_];                                            // (k-1, xk)
          if (xk < cap) s += c.unbind[i - stride_ + 1] * v[i - stride_ + 1];        // (k-1, xk+1)
        }
        if (k < kmax) {
          s += c.escape[i + stride_] * v[i + stride_];                              // (k+1, xk)
          if (xk > 0) s += c.bind[i + stride_ - 1] * v[i + stride_ - 1];            // (k+1, xk-1)
        }
        y[i] = s;
      }
    }
  }

  void block(const Coeffs& c, double mean) {
    // Poisson(mean) weights, right tail cut below 1e-18 past the mode.
    const double log_mean = std::log(mean);
    auto& w = post_.weights;
    std::vector<double>& v = scratch_;
    v = w;
    double p = std::exp(-mean);
    double log_p = -mean;
    for (std::size_t i = 0; i < w.size(); ++i) acc_[i] = p * v[i];
    std::vector<double>& next = next_;
    next.resize(w.size());
    for (int n = 1;; ++n) {
      step(c, v, next);
      v.swap(next);
      log_p += log_mean - std::log(static_cast<double>(n));
      p = std::exp(log_p);
      for (std::size_t i = 0; i < w.size(); ++i) acc_[i] += p * v[i];
      if (n > mean && p < 1e-18) break;
    }
    double z = 0.0;
    for (double a : acc_) z += a;
    if (!(z > 0.0) || !std::isfinite(z))
      throw InconsistentObservation("posterior mass vanished during propagation");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = acc_[i] / z;
    log_decay_ += std::log(z);
  }

  const OneVoxelModel& m_;
  FilterTruncation trunc_;
  int stride_;
  double lambda_;
  std::vector<Coeffs> cache_;
  PosteriorGrid post_;
  std::vector<double> scratch_, acc_, next_;
  double log_decay_ = 0.0;
  double log_jumps_ = 0.0;
};

}  // namespace

FilterTrace exact_filter(const Observation& obs, int symbol, const OneVoxelModel& model,
                         const FilterTruncation& trunc, const FilterOptions& opt) {
  if (symbol != 0 && symbol != 1) throw InvalidReference("exact_filter: symbol must be 0 or 1");
  const std::int64_t xt = model.front.x_total;
  if (obs.initial < 0 || obs.initial > xt)
    throw InconsistentObservation("initial X* outside [0, X_T]");

  HiddenStateFilter filter(model, symbol, trunc);
  FilterTrace out;
  out.symbol = symbol;
  out.times = time_grid(obs.horizon, opt.grid_step);
  const double g0 = model.front.g0;
  std::int64_t xs = obs.initial;
  double t = 0.0;
  std::size_t e = 0;
  for (double g : out.times) {
    while (e < obs.times.size() && obs.times[e] <= g) {
      filter.propagate(obs.times[e] - t, xs, opt.max_block);
      t = std::max(t, obs.times[e]);
      if (obs.steps[e] > 0) {
        if (xs >= xt) throw InconsistentObservation("activation with X* already at X_T");
        out.up_times.push_back(obs.times[e]);
        out.integral_before_up.push_back(-filter.log_decay() / g0);
        out.j_before_up.push_back(filter.activate());
        ++xs;
      } else {
        if (xs <= 0) throw InconsistentObservation("reversion with X* already at 0");
        --xs;
      }
      ++e;
    }
    filter.propagate(g - t, xs, opt.max_block);
    t = g;
    out.j.push_back(filter.posterior().mean_xk());
    out.integral.push_back(-filter.log_decay() / g0);
    out.log_z.push_back(filter.log_z());
    out.max_boundary_mass = std::max(out.max_boundary_mass, filter.posterior().boundary_mass());
  }
  out.final_posterior = filter.posterior();
  out.final_posterior.log_normalizer = filter.log_z();
  return out;
}

// ---------------------------------------------------------------------------
// Log-ratio estimators

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::exact: return "exact";
    case Estimator::kappa: return "kappa";
    case Estimator::hat: return "hat";
    case Estimator::circuit: return "circuit";
  }
  return "?";
}

double LlrTrace::value_at(double t) const {
  if (times.empty()) throw InvalidReference("empty trace");
  auto it = std::upper_bound(times.begin(), times.end(), t + 1e-9);
  if (it == times.begin()) return values.front();
  return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

std::vector<double> time_grid(double horizon, double step) {
  if (!(step > 0.0) || horizon < 0.0) throw InvalidReference("time_grid: bad horizon or step");
  const auto n = static_cast<std::size_t>(std::llround(horizon / step));
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = static_cast<double>(i) * step;
  g.back() = horizon;
  return g;
}

LlrTrace exact_llr(const FilterTrace& j0, const FilterTrace& j1, double k0) {
  if (j0.times != j1.times || j0.up_times != j1.up_times)
    throw InvalidReference("exact_llr: filters ran on different observations");
  constexpr double kFloor = 1e-300;
  LlrTrace out{Estimator::exact, j0.times, {}};
  out.values.reserve(j0.times.size());
  double jumps = 0.0;
  std::size_t u = 0;
  for (std::size_t i = 0; i < j0.times.size(); ++i) {
    while (u < j0.up_times.size() && j0.up_times[u] <= j0.times[i]) {
      if (j0.j_before_up[u] <= kFloor || j1.j_before_up[u] <= kFloor)
        throw PositivityViolation("J_s(t-) not positive at an activation; the log-ratio needs "
                                  "J1/J0 strictly positive");
      jumps += std::log(j1.j_before_up[u] / j0.j_before_up[u]);
      ++u;
    }
    out.values.push_back(jumps - k0 * (j1.integral[i] - j0.integral[i]));
  }
  return out;
}

LlrTrace approx_llr_kappa(const Observation& obs, double kappa0, double kappa1, double k0,
                          std::int64_t x_total, std::span<const double> grid) {
  if (!(kappa0 > 0.0) || !(kappa1 > 0.0)) throw InvalidReference("kappa must be positive");
  LlrTrace out{Estimator::kappa, {grid.begin(), grid.end()}, {}};
  const double jump = std::log(kappa1 / kappa0);
  const double slope = k0 * (kappa1 - kappa0);
  double area = 0.0;  // int (X_T - X*) ds up to t
  double t = 0.0;
  std::int64_t xs = obs.initial;
  int ups = 0;
  std::size_t e = 0;
  for (double g : grid) {
    while (e < obs.times.size() && obs.times[e] <= g) {
      area += static_cast<double>(x_total - xs) * (obs.times[e] - t);
      t = obs.times[e];
      xs += obs.steps[e];
      if (obs.steps[e] > 0) ++ups;
      ++e;
    }
    area += static_cast<double>(x_total - xs) * (g - t);
    t = g;
    out.values.push_back(ups * jump - slope * area);
  }
  return out;
}

double hat_rate_factor(double k_count, const DemodParams& p) {
  if (k_count <= 0.0) return 0.0;
  const double v = p.log_ratio() - p.hm0 * p.omega * (p.kappa[1] - p.kappa[0]) / k_count;
  return std::max(0.0, v);
}

LlrTrace approx_llr_hat(const PopulationSeries& xs, const PopulationSeries& k,
                        const DemodParams& p, std::span<const double> grid) {
  std::vector<double> cuts(xs.times().begin(), xs.times().end());
  cuts.insert(cuts.end(), k.times().begin(), k.times().end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Integrand g_- X* phi(K) is constant on [cuts[i], cuts[i+1]).
  std::vector<double> rate(cuts.size()), cum(cuts.size(), 0.0);
  for (std::size_t i = 0; i < cuts.size(); ++i)
    rate[i] = p.g_minus * static_cast<double>(xs.at(cuts[i])) *
              hat_rate_factor(static_cast<double>(k.at(cuts[i])), p);
  for (std::size_t i = 1; i < cuts.size(); ++i)
    cum[i] = cum[i - 1] + rate[i - 1] * (cuts[i] - cuts[i - 1]);

  LlrTrace out{Estimator::hat, {grid.begin(), grid.end()}, {}};
  for (double g : grid) {
    auto it = std::upper_bound(cuts.begin(), cuts.end(), g);
    const std::size_t i = it == cuts.begin() ? 0 : static_cast<std::size_t>(it - cuts.begin()) - 1;
    out.values.push_back(cum[i] + rate[i] * (g - cuts[i]));
  }
  return out;
}

ThCoefficients th_coefficients(const ThCycleParams& th, double y_total, double omega) {
  const double r = th.k2 / th.k1;
  return {y_total - (1.0 + r) * th.p_total, r * th.p_total * th.hm1() * omega};
}

double th_function(double k_total, double h0, double h1) {
  if (!(h0 > 0.0)) throw InfeasibleDesign("TH function needs h0 > 0; the cycle cannot threshold");
  if (k_total <= 0.0 || k_total < h1 / h0) return 0.0;
  return h0 - h1 / k_total;
}

int decide(const LlrTrace& trace, double threshold, double t_decision) {
  if (trace.times.empty() || t_decision > trace.times.back() + 1e-9 || t_decision < 0.0)
    throw InvalidReference("decide: decision time outside the trace");
  return trace.value_at(t_decision) > threshold ? 1 : 0;
}

QuadraticRoot entropic_ss_root(int symbol, double xs, const DemodParams& p) {
  const double free_x = static_cast<double>(p.x_total) - xs;
  const double k_conc = p.k_ss.at(symbol) / p.omega;
  const double q2 = p.alpha_rx_rx * p.g1 / p.omega;
  const double q1 = -(p.alpha_rx_rx * p.g1 * free_x / p.omega + k_conc + p.hm0);
  const double q0 = k_conc * free_x;
  if (q0 == 0.0) return {0.0, 0.0};
  const double disc = q1 * q1 - 4.0 * q2 * q0;
  if (disc < 0.0) throw InvalidReference("entropic_ss_root: negative discriminant");
  // Cancellation-free form of (-q1 - sqrt(disc)) / (2 q2).
  return {2.0 * q0 / (-q1 + std::sqrt(disc)), -q0 / q1};
}

double binomial_reciprocal_error(int m, double f) {
  if (m < 1 || !(f > 0.0) || f > 1.0) throw InvalidReference("binomial_reciprocal_error: bad m, f");
  const boost::math::binomial_distribution<> bin(m, f);
  double mean_recip = 0.0;
  for (int q = 1; q <= m; ++q) mean_recip += boost::math::pdf(bin, q) / q;
  const double recip_mean = 1.0 / (m * f);
  return std::abs(mean_recip - recip_mean) / recip_mean;
}

void write_llr_csv(std::ostream& out, std::span<const LlrTrace> traces) {
  out << "t,value,estimator\n";
  out.precision(12);
  for (const LlrTrace& tr : traces)
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      out << tr.times[i] << ',' << tr.values[i] << ',' << to_string(tr.estimator) << '\n';
}

}  // namespace enzyrx
