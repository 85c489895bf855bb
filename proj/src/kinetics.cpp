#include "enzyrx/kinetics.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>

#include "enzyrx/errors.hpp"

namespace enzyrx {

std::vector<double> MeanTrajectory::series(PopIndex p) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v.at(p));
  return out;
}

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

struct RateEquations {
  const CompiledNetwork& net;

  void operator()(const State& x, State& dxdt, double /*t*/) const {
    std::fill(dxdt.begin(), dxdt.end(), 0.0);
    for (const CompiledChannel& c : net.channels()) {
      double flux = c.coefficient;
      if (c.order >= 1) flux *= x[c.reactants[0]];
      if (c.order == 2) flux *= x[c.reactants[1]];
      if (flux == 0.0) continue;
      for (const StateDelta& d : c.delta) dxdt[d.pop] += d.change * flux;
    }
  }
};

}  // namespace

MeanTrajectory rre_solve(const CompiledNetwork& net, std::vector<double> init,
                         std::span<const double> t_grid, const OdeOptions& opt) {
  if (init.size() != net.population_count())
    throw InvalidReference("rre_solve: initial state size does not match network");
  if (t_grid.empty()) return {};
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidReference("rre_solve: time grid must increase");

  MeanTrajectory out;
  out.times.assign(t_grid.begin(), t_grid.end());
  out.values.reserve(t_grid.size());
  double last_good = t_grid.front();
  auto observer = [&](const State& x, double t) {
    for (double v : x)
      if (!std::isfinite(v)) throw IntegrationFailure("rre_solve: state became non-finite", last_good);
    last_good = t;
    out.values.push_back(x);
  };

  if (t_grid.size() == 1) {
    observer(init, t_grid.front());
    return out;
  }
  RateEquations rhs{net};
  auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol,
                                           odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_times(stepper, rhs, init, t_grid.begin(), t_grid.end(), opt.initial_step,
                            observer, odeint::max_step_checker(opt.max_steps));
  } catch (const IntegrationFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegrationFailure(std::string("rre_solve: ") + e.what(), last_good);
  }
  return out;
}

std::pair<double, double> qss_frontend(double k_conc, const FrontEndParams& p,
                                       double x_total_conc) {
  if (k_conc < 0.0) throw InvalidReference("qss_frontend: [K] must be >= 0");
  if (std::isinf(k_conc)) {
    const double g = p.gamma();
    return {x_total_conc / (1.0 + g), x_total_conc * g / (1.0 + g)};
  }
  const double den = p.hm0() + (1.0 + p.gamma()) * k_conc;
  return {x_total_conc * k_conc / den, x_total_conc * p.gamma() * k_conc / den};
}

std::pair<double, double> qss_frontend_counts(double k_count, const FrontEndParams& p,
                                              double omega) {
  const auto [xk, xs] =
      qss_frontend(k_count / omega, p, static_cast<double>(p.x_total) / omega);
  return {xk * omega, xs * omega};
}

double sensitivity(double gamma, double k0, double k1, double hm0, double x_total) {
  auto active = [&](double k) { return gamma * k / (hm0 + (1.0 + gamma) * k); };
  return x_total * (active(k1) - active(k0));
}

GammaOptimum optimal_gamma(double k0, double k1, double hm0, double gamma_max, double rel_tol) {
  if (!(hm0 > 0.0) || k0 < 0.0 || k1 < 0.0)
    throw InvalidReference("optimal_gamma: need H_M0 > 0 and [K] >= 0");
  GammaOptimum r;
  const double xi0 = k0 / (hm0 + k0);
  const double xi1 = k1 / (hm0 + k1);
  r.closed_form_reciprocal = 1.0 / (xi0 * xi1);
  r.closed_form_sqrt = 1.0 / std::sqrt(xi0 * xi1);
  if (k0 == k1) {
    r.degenerate = true;
    r.gamma = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  // Maximise |S|; the sign only reflects which symbol carries more K.
  auto f = [&](double g) { return std::abs(sensitivity(g, k0, k1, hm0)); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 1.0, b = gamma_max;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > rel_tol * 0.5 * (a + b)) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  r.gamma = 0.5 * (a + b);
  r.sensitivity = sensitivity(r.gamma, k0, k1, hm0);
  r.at_upper_bound = gamma_max - r.gamma <= rel_tol * gamma_max * 2.0;
  return r;
}

DiffusionOperator diffusion_matrix(const VoxelLattice& lattice) {
  const auto n = static_cast<Eigen::Index>(lattice.size());
  DiffusionOperator op;
  op.matrix = Eigen::MatrixXd::Zero(n, n);
  const double jump = lattice.jump_rate();
  for (std::size_t j = 0; j < lattice.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    for (const auto& nb : lattice.faces(j)) {
      if (!nb) continue;
      op.matrix(static_cast<Eigen::Index>(*nb), jj) += jump;
      op.matrix(jj, jj) -= jump;
    }
    const double esc = lattice.escape_rate(j);
    op.matrix(jj, jj) -= esc;
    op.total_escape += esc;
  }
  return op;
}

AlphaCoeffs alpha_coeffs(const DiffusionOperator& op, std::size_t tx, std::size_t rx) {
  const auto n = static_cast<std::size_t>(op.matrix.rows());
  if (tx >= n || rx >= n) throw InvalidReference("alpha_coeffs: voxel index out of range");
  if (!(op.total_escape > 0.0))
    throw SingularOperator("diffusion operator is singular: the medium needs an escape path");
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.matrix);
  if (!(std::abs(lu.determinant()) > 0.0) || lu.rcond() < 1e-14)
    throw SingularOperator("diffusion operator is numerically singular");
  // Column rx of D^-1 is not needed; solve for row rx via the transpose.
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  e(static_cast<Eigen::Index>(rx)) = 1.0;
  const Eigen::VectorXd row = op.matrix.transpose().partialPivLu().solve(e);
  return {-row(static_cast<Eigen::Index>(tx)), -row(static_cast<Eigen::Index>(rx))};
}

AlphaCoeffs alpha_coeffs(const VoxelLattice& lattice, const Voxel& tx, const Voxel& rx) {
  return alpha_coeffs(diffusion_matrix(lattice), lattice.index(tx), lattice.index(rx));
}

}  // namespace enzyrx
