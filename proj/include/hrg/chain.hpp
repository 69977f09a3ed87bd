#pragma once

#include <vector>

#include "hrg/model.hpp"
#include "hrg/rgflow.hpp"

namespace hrg {

// Mod-1 marginal density of one level of the coarsening chain, sampled on the
// grid with unit mean (so (1/G) sum rho = 1).
struct MarginalDensity {
  std::vector<double> rho;
  int level = 0;
};

// One downward step of the mod-1 marginal: given the law of phi_{k+1}, the
// kernel into level k has density proportional to
// e^{-b v_{k-1}(z)} * wrapped_gauss(z - phi_{k+1}; sigma_k^2/beta),
// normalized in z separately for each conditioning value.
MarginalDensity propagate_density(const MarginalDensity& rho_above,
                                  const PeriodicFunction& v_below,
                                  double sigma_sq_over_beta, int b);

// Wrapped Gaussian sum_{j} exp(-(t+j)^2/(2 var)) / sqrt(2 pi var); the wrap
// count covers the 1e-16 tail.
double wrapped_gauss(double t, double var);

// Deterministic per-level state for covariance and charge queries: the
// coefficient flow, potentials, mod-1 marginals rho[k] (k = 1..n; the level
// above the root is a point mass at 0), and the variance accumulators
// s[k+1] = s[k]/b + sigma_k^2.
struct ChainLevels {
  ModelConfig config;
  FlowTrace flow;
  std::vector<Potentials> pots;        // pots[k] built from lam_k, k = 0..n
  std::vector<MarginalDensity> rho;    // rho[k], valid for k = 1..n
  std::vector<double> s;               // s[0..n+1]
  std::vector<double> v_min;           // grid minimum of pots[k].v, k = 0..n
};
ChainLevels build_chain(const ModelConfig& config);

// Expectation of a grid function under the level-k marginal; level n+1 means
// evaluation at 0.
double level_expectation(const ChainLevels& chain, int level,
                         const PeriodicFunction& f);

// Exact two-point function <phi_x phi_y> for a leaf pair at branch depth k,
// via the conditional-variance ladder: the predictable projection
// M_k = phi_k - (s_k/beta) v'_{k-1}(phi_k) satisfies an exact one-step
// recursion for E(M_k^2) whose per-level increments are returned by
// covariance_increments; covariance_exact(k) sums them from level k up and
// adds the top anchor (s_{n+1} v'_n(0)/beta)^2.
double covariance_exact(const ChainLevels& chain, int k);
std::vector<double> covariance_increments(const ChainLevels& chain);

// Charge weights at one level: w(q) over q in [q_lo, q_lo + size), generally
// asymmetric in q for alpha != 0.
struct ChargeWeights {
  std::vector<double> w;
  int q_lo = 0;
  int level = 1;
  double alpha = 0.0;

  double at(int q) const;
  double w0() const { return at(0); }
};

// Level-1 weights w_1(q) = (a(q)/a(0)) theta_0^{(q+alpha)^2}.
ChargeWeights init_charge_weights(const ModelConfig& config, double alpha);

// One step: w'(q) = theta_k^{(q+alpha)^2} sum_l gamma_k(q-l) w(l), where
// gamma_k is built from the coefficients one level below the step. Modes with
// weight < 1e-18 * max are dropped; |q| <= 64.
ChargeWeights charge_weights_step(const ChargeWeights& w,
                                  const SpectralCoeffs& lam_below,
                                  double theta_k, int b);

// All levels 1..n+1 of the weight recursion.
std::vector<ChargeWeights> run_charge_weights(const ChainLevels& chain,
                                              double alpha);

// Exact fractional-charge pair correlation <e^{2 pi i alpha (phi_x - phi_y)}>
// at branch depth k >= 1: the expectation E |f_k(phi_k)|^2 of the squared
// modulus of f_k(z) = sum_q w_k(q) e^{2 pi i q z} / sum_q lam_{k-1}(q)
// e^{2 pi i q z}. Returns 1 for k = 0.
double charge_correlation_exact(const ChainLevels& chain, double alpha, int k);

// Exact single-charge expectation <e^{2 pi i alpha phi_x}> = f_{n+1}(0).
double single_charge_exact(const ChainLevels& chain, double alpha);

// Per-level diagnostic row: EM2 = E(M_k^2), its increment to the level above,
// the charge weight w_k(0) and ratio w_{k+1}(0)/w_k(0), and the total-
// variation distance of rho_k to the stationary density (uniform when
// subcritical).
struct ChainLevelRow {
  int k;
  double em2;
  double increment;
  double w0;
  double w0_ratio;
  double tv_to_nu_star;
};
std::vector<ChainLevelRow> chain_level_table(const ChainLevels& chain,
                                             double alpha);

}  // namespace hrg
