#include "enzyrx/designer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "enzyrx/errors.hpp"

namespace enzyrx {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

RatioCheck ratio_check(std::string name, double num, double den, double margin, double slack) {
  const double ratio = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
  return {std::move(name), ratio, margin, ratio >= margin * (1.0 - slack)};
}

}  // namespace

ThDesignInput th_design_target(const DemodParams& p, double rho, double y_total,
                               double k_t_max) {
  return {rho * p.log_ratio(), rho * p.hm0 * (p.kappa[1] - p.kappa[0]), rho, y_total, k_t_max,
          p.omega};
}

ThDesignInput th_design_target(const ThCoefficients& c, double y_total, double k_t_max,
                               double omega) {
  return {c.h0 / omega, c.h1 / (omega * omega), 0.0, y_total, k_t_max, omega};
}

double infer_rho(const ThCoefficients& c, const DemodParams& p) {
  return c.h0 / p.omega / p.log_ratio();
}

ThDesign design_th_cycle(const ThDesignInput& in, double k1) {
  if (!(in.omega > 0.0) || !(in.k_t_max > 0.0) || !(k1 > 0.0))
    throw InvalidReference("design_th_cycle: omega, K_T,max and k1 must be positive");
  if (!(in.zeta0 > 0.0)) throw InfeasibleDesign("design_th_cycle: zeta0 must be positive");
  if (!(in.zeta1 > 0.0))
    throw RegimeError("design_th_cycle: zeta1 <= 0 gives k2/k1 = 0, a plateau without threshold");

  ThDesign d;
  const double y_conc = in.y_total / in.omega;
  const double hm1 = 10.0 * in.k_t_max / in.omega;
  const double p_conc = y_conc - in.zeta0 - in.zeta1 / hm1;
  if (!(p_conc > 0.0))
    throw InfeasibleDesign("design_th_cycle: [P]_T = [Y]_T - zeta0 - zeta1/H_M1 = " + fmt(p_conc) +
                           " <= 0");
  const double ratio = in.zeta1 / (hm1 * p_conc);  // k2/k1
  const double k2 = ratio * k1;
  const double hm2 = p_conc / 80.0;

  ThCycleParams& t = d.params;
  t.k1 = k1;
  t.d1 = k1;
  t.a1 = 2.0 * k1 / hm1;
  t.k2 = k2;
  t.d2 = k2;
  t.a2 = 2.0 * k2 / hm2;
  t.p_total = p_conc * in.omega;
  d.p_total_conc = p_conc;
  d.alpha = k1 * (in.k_t_max / in.omega) / (k2 * p_conc);
  if (!(d.alpha > 1.0))
    throw RegimeError("design_th_cycle: alpha = k1[K]_T/(k2[P]_T) = " + fmt(d.alpha) +
                      " <= 1 at K_T,max; the cycle would not be hyperbolic");

  d.rules = {
      {"H_M1 = 10 K_T,max / Omega", fmt(hm1)},
      {"[P]_T = [Y]_T - zeta0 - zeta1 / H_M1", fmt(p_conc)},
      {"k2/k1 = zeta1 / (H_M1 [P]_T)", fmt(ratio)},
      {"H_M2 = [P]_T / 80", fmt(hm2)},
      {"d1 = k1", fmt(k1)},
      {"d2 = k2", fmt(k2)},
      {"a1 = 2 k1 / H_M1", fmt(t.a1)},
      {"a2 = 2 k2 / H_M2", fmt(t.a2)},
      {"P_T = [P]_T Omega", fmt(t.p_total)},
  };
  return d;
}

bool ImpedanceReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

ImpedanceReport check_impedance(const FrontEndParams& front, const ThCycleParams& th,
                                double k1_ss_count, double omega,
                                const ImpedanceMargins& m) {
  ImpedanceReport r;
  const double k_conc = k1_ss_count / omega;
  if (!(k_conc > 0.0)) {
    r.degenerate = true;
    r.note = "no signalling molecules reach the receiver; K ratios are infinite";
  }
  r.checks.push_back(ratio_check("H_M0/[K]1", front.hm0(), k_conc, m.front, m.slack));
  r.checks.push_back(ratio_check("H_M1/[K]1", th.hm1(), k_conc, m.th, m.slack));
  r.checks.push_back(
      ratio_check("[P]_T/H_M2", th.p_total / omega, th.hm2(), m.phosphatase, m.slack));
  return r;
}

bool IntegratorReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return enzyme_bound_fraction < max_bound_fraction;
}

IntegratorReport design_integrator(double enzyme_scale, double omega,
                                   const IntegratorParams& base, double substrate_margin,
                                   double max_bound_fraction) {
  if (!(enzyme_scale > 0.0) || !(omega > 0.0))
    throw InvalidReference("design_integrator: enzyme scale and omega must be positive");
  IntegratorReport r;
  r.params = base;
  r.enzyme_scale = enzyme_scale;
  r.max_bound_fraction = max_bound_fraction;
  const IntegratorParams& p = r.params;
  const double j_conc = static_cast<double>(p.j_total) / omega;
  r.checks.push_back(ratio_check("K_M3/[J]_T", p.km3(), j_conc, substrate_margin, 0.0));
  r.checks.push_back(ratio_check("K_M4/[J]_T", p.km4(), j_conc, substrate_margin, 0.0));
  r.enzyme_bound_fraction = j_conc / (p.km3() + j_conc);
  return r;
}

ReceiverDesign design_receiver(const TxSetting& tx, const AlphaCoeffs& alpha, double omega,
                               const ReceiverParams& reference, double k1) {
  ReceiverDesign out;
  out.params = reference;
  const TxSetting ref_tx = presets::tx_setting_1();
  const DemodParams ref_demod = derive_demod_params(reference.front, ref_tx, alpha, omega);
  const ThCoefficients ref_th =
      th_coefficients(reference.th, static_cast<double>(reference.front.x_total), omega);
  out.rho = infer_rho(ref_th, ref_demod);
  out.demod = derive_demod_params(reference.front, tx, alpha, omega);
  if (tx.mrna == ref_tx.mrna && tx.r_tx == ref_tx.r_tx) {
    out.params.provenance["th_cycle"] = "published constants for tx-setting-1";
    return out;
  }
  const ThDesignInput target = th_design_target(
      out.demod, out.rho, static_cast<double>(reference.front.x_total), out.demod.k_ss[1]);
  ThDesign d = design_th_cycle(target, k1);
  // The simulator needs an integer phosphatase count.
  d.params.p_total = std::max(1.0, std::round(d.params.p_total));
  out.params.th = d.params;
  out.designed = true;
  out.rules = d.rules;
  out.rules.emplace_back("rho = h0 / Omega / log(kappa1/kappa0) of the published cycle",
                         fmt(out.rho));
  out.rules.emplace_back("K_T,max = Symbol-1 mean K of " + tx.name, fmt(out.demod.k_ss[1]));
  out.params.provenance["th_cycle"] = "designed for " + tx.name;
  for (const auto& [rule, value] : out.rules) out.params.provenance[rule] = value;
  return out;
}

}  // namespace enzyrx
