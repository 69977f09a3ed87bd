#pragma once

#include <vector>

#include "hrg/model.hpp"
#include "hrg/rgflow.hpp"

namespace hrg {

// Everything derived from the supercritical fixed point at one (b, theta):
// the limit coefficients, the limit potential and its first derivative on the
// grid, the stationary single-site density nu ~ e^{-(b+1)v} (normalized to
// unit mean on the grid), and the step weights gamma(q) used by the charge
// path sums. identity_residual is the sup-norm defect of the self-consistency
//   e^{-v(z)} = int e^{-b v(z+zeta)} mu_{1/beta}(dzeta)
// evaluated by wrapped-Gaussian quadrature. For b*theta <= 1 the data is
// trivial: lam = delta, v = 0, nu = uniform.
struct StarData {
  SpectralCoeffs lam_star;
  PeriodicFunction v_star;
  PeriodicFunction v1_star;
  std::vector<double> nu_star;
  std::vector<double> gamma_star;   // gamma(q), q = 0..Q, symmetric
  bool trivial = false;
  bool converged = true;
  double identity_residual = 0.0;
};
StarData star_data(int b, double theta, int q_max = 16, int grid_size = 512,
                   double tol = 1e-12, long max_iters = 1'000'000);

// gamma(q) = [ (b-1)-fold convolution of lam ](q) / [ b-fold ](0).
std::vector<double> gamma_star_weights(const SpectralCoeffs& lam_star, int b);

// Path sums over charge trajectories: gamma_j(0) for j = 1..J, where j = 1 is
// gamma(0) and j >= 2 sums over paths 0 -> q_1 -> ... -> q_{j-1} -> 0 through
// nonzero intermediate states, each step weighted by gamma(step) and each
// source state by theta^{(q+alpha)^2 - alpha^2}. J is chosen adaptively:
// stop when gamma_J(0) * max(1, gamma(0))^{-J} < 1e-14.
std::vector<double> charge_path_sums(const std::vector<double>& gamma_star,
                                     double theta, double alpha,
                                     int q_path = 8);

// Smallest t >= 1 with sum_j gamma_j(0) t^{-j} = 1. Exactly 1 when alpha == 0
// (the series then sums to 1 at t = 1). Bisection bracket [1, 2], doubled up
// to 16 on failure.
double t_star_solve(const std::vector<double>& path_sums, double tol = 1e-14);

// t_star at (alpha, beta) for branching factor b, via the fixed point when
// supercritical; 1 when subcritical or alpha == 0.
struct ChargeExponentData {
  double t_star = 1.0;
  double kappa = 0.0;     // 4 beta_c alpha^2 / beta - (4/log b) log t_star
  double tau = 0.0;       // closed form, see tau_exponent
  double theta = 0.0;
  bool supercritical = false;
};
ChargeExponentData kappa_exponent(double alpha, double beta, int b,
                                  int q_max = 16, double tol = 1e-12,
                                  long max_iters = 1'000'000);

// Closed forms.
// tau(alpha) = 2 (b^3-1)/((b-1)(b+1)^3) [ (b-1)/(b^{1+2a}-1)
//              + (b-1)/(b^{1-2a}-1) - 2 ],  |alpha| < 1/2.
double tau_exponent(double alpha, int b);
// c_bar = (8 pi^2 / beta_c^2) b (b^3-1) / ((b-1)^3 (b+1)^2).
double c_bar(int b);

// Effective variance of the large-scale Gaussian:
//   subcritical (b*theta <= 1):  1/beta;
//   supercritical:  1/beta - (b/beta^2)((b+1)/(b-1)) <(v')^2>_nu
// with the average taken under nu ~ e^{-(b+1)v} at the fixed point.
double sigma2(double beta, int b, int q_max = 16, int grid_size = 512,
              double tol = 1e-12, long max_iters = 1'000'000);
double sigma2_from_star(const StarData& star, double beta, int b);

// Near-critical linearizations used as cross-checks:
//   sigma2 ~ 1/beta - jump_coefficient(b) * (beta - beta_c),
//   t_star ~ 1 + tau(alpha) (b*theta - 1),
//   kappa ~ 4 beta_c alpha^2 / beta  (exact subcritically).
double jump_coefficient(int b);

// One row of a sigma2 scan. fp_converged records per-row fixed-point health
// (always true subcritically, where no iteration is run).
struct Sigma2Row {
  double beta;
  double sigma2;
  double dsigma2_dbeta;   // centered difference; one-sided at the ends
  bool fp_converged = true;
};
std::vector<Sigma2Row> sigma2_scan(int b, double beta_lo, double beta_hi,
                                   int points, int q_max = 16,
                                   int grid_size = 512, int threads = 1);

// Derivative jump across beta_c estimated from a scan: difference of the
// one-sided slopes taken at the two grid points immediately left and right
// of beta_c. Requires at least two points on each side.
double sigma2_jump_estimate(const std::vector<Sigma2Row>& scan, int b);

}  // namespace hrg
