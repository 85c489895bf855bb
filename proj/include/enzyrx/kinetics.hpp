#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "enzyrx/network.hpp"
#include "enzyrx/params.hpp"

namespace enzyrx {

struct OdeOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 1e-6;
  std::size_t max_steps = 50'000'000;
};

// Mean-field counts per population sampled on a time grid.
struct MeanTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[i][pop] at times[i]

  std::vector<double> series(PopIndex p) const;
};

// Reaction-rate equations of the compiled network, in mean molecule counts
// per voxel (concentration times Omega). Adaptive Dormand-Prince 5(4) with
// dense output; throws IntegrationFailure carrying the last good time.
MeanTrajectory rre_solve(const CompiledNetwork& net, std::vector<double> init,
                         std::span<const double> t_grid, const OdeOptions& opt = {});

// Quasi-steady front-end. Concentration form: returns ([XK], [X*]) for total
// [X]_T = x_total_conc.
std::pair<double, double> qss_frontend(double k_conc, const FrontEndParams& p,
                                       double x_total_conc);
// Count form on a voxel of volume omega: K and the result are molecule counts.
std::pair<double, double> qss_frontend_counts(double k_count, const FrontEndParams& p,
                                              double omega);

// X_T * (gamma[K]1/(H+(1+gamma)[K]1) - gamma[K]0/(H+(1+gamma)[K]0)).
double sensitivity(double gamma, double k0_conc, double k1_conc, double hm0,
                   double x_total = 1.0);

struct GammaOptimum {
  double gamma = 0.0;        // numeric maximiser on (1, gamma_max]
  double sensitivity = 0.0;  // per unit X_T at gamma
  double closed_form_reciprocal = 0.0;  // 1/(xi0 xi1)
  double closed_form_sqrt = 0.0;        // 1/sqrt(xi0 xi1)
  bool degenerate = false;              // [K]0 == [K]1: no maximiser
  bool at_upper_bound = false;
};

GammaOptimum optimal_gamma(double k0_conc, double k1_conc, double hm0, double gamma_max = 1e4,
                           double rel_tol = 1e-6);

// K jump generator on the lattice: (i,j) = rate j -> i, diagonal = -(jumps out
// + escape).
struct DiffusionOperator {
  Eigen::MatrixXd matrix;
  double total_escape = 0.0;
};

DiffusionOperator diffusion_matrix(const VoxelLattice& lattice);

struct AlphaCoeffs {
  double rx_tx = 0.0;  // -(D^-1)[rx, tx]
  double rx_rx = 0.0;  // -(D^-1)[rx, rx]
};

AlphaCoeffs alpha_coeffs(const DiffusionOperator& op, std::size_t tx_voxel, std::size_t rx_voxel);
AlphaCoeffs alpha_coeffs(const VoxelLattice& lattice, const Voxel& tx, const Voxel& rx);

// Steady mean K count in the receiver voxel: alpha_RX,TX * r_TX * m_s.
inline double k_steady(const AlphaCoeffs& a, double r_tx, double mrna) {
  return a.rx_tx * r_tx * mrna;
}

}  // namespace enzyrx
