#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "enzyrx/kinetics.hpp"
#include "enzyrx/params.hpp"
#include "enzyrx/ssa.hpp"

namespace enzyrx {

// Which rate constant stands in for g1 in the kappa denominator.
enum class G1Alias { g0, d0_plus_g0 };

// Every constant the demodulators need, derived from the front-end, the
// transmitter setting and the medium geometry.
struct DemodParams {
  double hm0 = 0.0;    // um^-3
  double gamma = 0.0;
  double omega = 0.0;  // um^3
  double g_minus = 0.0;
  double g0 = 0.0;
  double k0 = 0.0;  // birth constant of X* in the log-ratio ODE
  double g1 = 0.0;
  G1Alias g1_alias = G1Alias::g0;
  std::int64_t x_total = 0;
  double alpha_rx_tx = 0.0;  // s
  double alpha_rx_rx = 0.0;  // s
  std::array<double, 2> k_ss{};   // counts
  std::array<double, 2> xs_ss{};  // counts
  std::array<double, 2> kappa{};
  std::map<std::string, std::string> provenance;

  double log_ratio() const { return std::log(kappa[1] / kappa[0]); }
  // K count below which the nonnegative estimator stops integrating.
  double k_threshold() const { return hm0 * omega * (kappa[1] - kappa[0]) / log_ratio(); }
};

DemodParams derive_demod_params(const FrontEndParams& front, const TxSetting& tx,
                                const AlphaCoeffs& alpha, double omega,
                                G1Alias g1_alias = G1Alias::g0);

nlohmann::json to_json(const DemodParams& p);
DemodParams demod_params_from_json(const nlohmann::json& j);

// kappa_s = [K]/(alpha g1 (X_T - X*_ss)/Omega + [K] + H_M0) with [K] = K_ss/Omega.
double kappa(double k_ss, double xs_ss, std::int64_t x_total, double alpha_rx_rx, double g1,
             double omega, double hm0);
// Ratio of H_M0 to the larger of the two competing denominator terms; the
// approximation wants this >= 10.
double kappa_dominance(double k_ss, double xs_ss, std::int64_t x_total, double alpha_rx_rx,
                       double g1, double omega, double hm0);

// Well-mixed single voxel on which the exact filter is tractable.
struct OneVoxelModel {
  double omega = 0.0;
  double escape_rate = 0.0;  // total first-order K removal rate
  std::array<double, 2> source_rate{};
  FrontEndParams front;

  VoxelLattice lattice() const;
  // Steady mean K count for a symbol, source/escape.
  double k_mean(int symbol) const { return source_rate.at(symbol) / escape_rate; }
};

// Escape rate 1/alpha_RX,TX so that the single voxel reproduces the mean K of
// the receiver voxel in the full medium.
OneVoxelModel matched_one_voxel(const TxSetting& tx, const FrontEndParams& front,
                                const AlphaCoeffs& medium_alpha, double omega);

struct FilterTruncation {
  int k_max = 0;
  int xk_cap = 0;
  std::size_t states() const {
    return static_cast<std::size_t>(k_max + 1) * static_cast<std::size_t>(xk_cap + 1);
  }
};

// Smallest K_max whose Poisson tail at the larger symbol mean is below tail,
// then the largest XK cap (<= X_T) keeping the grid within max_states.
FilterTruncation choose_truncation(const OneVoxelModel& model, double tail = 1e-9,
                                   std::size_t max_states = 3000);

// X* activation history: initial value and unit steps in time order.
struct Observation {
  double horizon = 0.0;
  std::int64_t initial = 0;
  std::vector<double> times;
  std::vector<int> steps;  // +1 activation, -1 reversion

  static Observation from_series(const PopulationSeries& xs);
  PopulationSeries as_series() const;
  std::vector<double> up_times() const;
};

// Probability table over (K, XK); index k * (xk_cap + 1) + xk.
struct PosteriorGrid {
  FilterTruncation trunc;
  std::vector<double> weights;
  double log_normalizer = 0.0;

  double at(int k, int xk) const {
    return weights[static_cast<std::size_t>(k) * (trunc.xk_cap + 1) + xk];
  }
  double mean_xk() const;
  double mean_k() const;
  double mass() const;
  double boundary_mass() const;  // mass at k = k_max
};

struct FilterOptions {
  double grid_step = 0.1;
  // Largest uniformisation mean per propagation block.
  double max_block = 400.0;
};

// Output of the exact filter under one hypothesis.
struct FilterTrace {
  int symbol = 0;
  std::vector<double> times;     // shared comparison grid
  std::vector<double> j;         // E[XK | history] at grid times
  std::vector<double> integral;  // int_0^t J ds at grid times
  std::vector<double> log_z;     // log unnormalised likelihood at grid times
  std::vector<double> up_times;
  std::vector<double> j_before_up;         // J(t-) at each activation
  std::vector<double> integral_before_up;  // int_0^t J ds at each activation
  double max_boundary_mass = 0.0;
  PosteriorGrid final_posterior;
};

FilterTrace exact_filter(const Observation& obs, int symbol, const OneVoxelModel& model,
                         const FilterTruncation& trunc, const FilterOptions& opt = {});

enum class Estimator { exact, kappa, hat, circuit };
std::string_view to_string(Estimator e);

// Decision-statistic samples on the comparison grid. Between grid points the
// trace is read as piecewise constant.
struct LlrTrace {
  Estimator estimator = Estimator::exact;
  std::vector<double> times;
  std::vector<double> values;

  double value_at(double t) const;
};

// Standard comparison grid 0, step, ..., horizon.
std::vector<double> time_grid(double horizon, double step = 0.1);

// L jumps by log(J1(t-)/J0(t-)) at activations and drifts by -k0 (J1 - J0).
LlrTrace exact_llr(const FilterTrace& j0, const FilterTrace& j1, double k0);

LlrTrace approx_llr_kappa(const Observation& obs, double kappa0, double kappa1, double k0,
                          std::int64_t x_total, std::span<const double> grid);

// phi(K) = [log(k1/k0) - H_M0 Omega (k1 - k0)/K]_+, phi(0) = 0.
double hat_rate_factor(double k_count, const DemodParams& p);

LlrTrace approx_llr_hat(const PopulationSeries& xs, const PopulationSeries& k,
                        const DemodParams& p, std::span<const double> grid);

struct ThCoefficients {
  double h0 = 0.0;  // count
  double h1 = 0.0;  // count^2
  double threshold() const { return h1 / h0; }
};

ThCoefficients th_coefficients(const ThCycleParams& th, double y_total, double omega);

// 0 below h1/h0, h0 - h1/K_T above; all quantities in counts.
double th_function(double k_total, double h0, double h1);

int decide(const LlrTrace& trace, double threshold, double t_decision);

struct QuadraticRoot {
  double root = 0.0;    // smaller root
  double approx = 0.0;  // -q0/q1
};

QuadraticRoot entropic_ss_root(int symbol, double xs, const DemodParams& p);

// Relative error |E[I(1/Q)] - 1/E[Q]| / (1/E[Q]) for Q ~ Binomial(m, f), by
// exact summation.
double binomial_reciprocal_error(int m, double f);

void write_llr_csv(std::ostream& out, std::span<const LlrTrace> traces);

}  // namespace enzyrx
