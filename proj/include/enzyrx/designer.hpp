#pragma once

#include <string>
#include <utility>
#include <vector>

#include "enzyrx/demod.hpp"
#include "enzyrx/params.hpp"

namespace enzyrx {

// Target of the TH-cycle: [Y*] = [zeta0 - zeta1/[K]_T]_+ in concentrations.
struct ThDesignInput {
  double zeta0 = 0.0;    // um^-3
  double zeta1 = 0.0;    // um^-6
  double rho = 0.0;      // um^-3 per unit log-ratio
  double y_total = 0.0;  // count
  double k_t_max = 0.0;  // count, largest K_T the cycle will see
  double omega = 0.0;    // um^3
};

// zeta0 = rho log(kappa1/kappa0), zeta1 = rho H_M0 (kappa1 - kappa0).
ThDesignInput th_design_target(const DemodParams& p, double rho, double y_total, double k_t_max);

// Target that reproduces a given TH curve (counts form) exactly.
ThDesignInput th_design_target(const ThCoefficients& c, double y_total, double k_t_max,
                               double omega);

// rho whose plateau zeta0 matches the h0 of an existing cycle.
double infer_rho(const ThCoefficients& c, const DemodParams& p);

struct ThDesign {
  ThCycleParams params;
  double p_total_conc = 0.0;  // um^-3, before rounding to a count
  double alpha = 0.0;         // k1 [K]_T,max / (k2 [P]_T)
  std::vector<std::pair<std::string, std::string>> rules;  // rule, value
};

// Throws InfeasibleDesign when [P]_T <= 0 and RegimeError when zeta1 <= 0 or
// alpha <= 1 at K_T,max.
ThDesign design_th_cycle(const ThDesignInput& in, double k1);

struct RatioCheck {
  std::string name;
  double ratio = 0.0;
  double margin = 0.0;
  bool pass = false;
};

struct ImpedanceReport {
  std::vector<RatioCheck> checks;
  bool degenerate = false;  // no K reaches the receiver
  std::string note;

  bool all_pass() const;
};

struct ImpedanceMargins {
  double front = 10.0;
  double th = 10.0;
  double phosphatase = 10.0;
  // Relative slack so a ratio equal to its margin by construction passes.
  double slack = 1e-3;
};

// H_M0/[K]1, H_M1/[K]1 and [P]_T/H_M2.
ImpedanceReport check_impedance(const FrontEndParams& front, const ThCycleParams& th,
                                double k1_ss_count, double omega,
                                const ImpedanceMargins& margins = {});

struct IntegratorReport {
  IntegratorParams params;
  double enzyme_scale = 0.0;  // expected peak X*-Y* count
  std::vector<RatioCheck> checks;
  // Share of free X*-Y* held in JX*Y* at steady state, about [J]/(K_M3 + [J]).
  double enzyme_bound_fraction = 0.0;
  double max_bound_fraction = 0.01;
  bool all_pass() const;
};

// Integrator constants (defaults as published) with the far-from-saturation
// checks K_M3/[J]_T and K_M4/[J]_T >= substrate_margin, and the bound enzyme
// fraction below max_bound_fraction.
IntegratorReport design_integrator(double enzyme_scale, double omega,
                                   const IntegratorParams& base = presets::integrator(),
                                   double substrate_margin = 100.0,
                                   double max_bound_fraction = 0.01);

// Receiver for a transmitter setting. Setting 1 with the published constants
// needs no design; other settings get a TH-cycle designed at K_T,max equal to
// the Symbol-1 mean using rho inferred from the published cycle.
struct ReceiverDesign {
  ReceiverParams params;
  DemodParams demod;
  double rho = 0.0;
  bool designed = false;
  std::vector<std::pair<std::string, std::string>> rules;
};

ReceiverDesign design_receiver(const TxSetting& tx, const AlphaCoeffs& alpha, double omega,
                               const ReceiverParams& reference = presets::receiver(),
                               double k1 = presets::kDesignK1);

}  // namespace enzyrx
