#pragma once

#include <vector>

#include "hrg/model.hpp"

namespace hrg {

// Normalized Fourier coefficients lam(q) = a(q)/a(0) of e^{-v}. Only q >= 0 is
// stored; lam(-q) = lam(q). Invariants: lam[0] == 1, lam[q] > 0.
struct SpectralCoeffs {
  std::vector<double> lam;

  int max_q() const { return static_cast<int>(lam.size()) - 1; }
  double at(int q) const;       // symmetric lookup; 0 beyond the truncation
  double sup_ratio() const;     // sup over stored q of lam(q+1)/lam(q)
};

// Gaussian-weighted b-fold convolution step:
//   raw(q) = theta_k^{q^2} * sum_{l_1+...+l_b = q} prod_i lam(l_i),
//   next = raw / raw(0),  log_g0 = log raw(0) excluding theta (raw(0) has
//   theta^0), so log a_{k+1}(0) = b log a_k(0) + log_g0.
// Truncation: modes with raw(q) < 1e-16 * raw(0) are dropped; the stored range
// never exceeds |q| <= 64.
struct RgStepResult {
  SpectralCoeffs lam;
  double log_g0;
};
RgStepResult rg_step(const SpectralCoeffs& lam, double theta_k, int b,
                     int q_cap = 64);

// Level-0 coefficients lam_0(q) = (a(q)/a(0)) * theta_0^{q^2} and the matching
// normalizer log a_0(0) = (1/2) log(2 pi sigma_0^2 / beta) + log a(0).
SpectralCoeffs init_coeffs(const ModelConfig& config);
double init_log_a0(const ModelConfig& config);

// Coefficient flow along the profile: levels[k] holds lam_k for k = 0..n,
// sup_ratio[k] the running ratio bound, log_a0[k] the accumulated normalizer
// (which saturates to -inf for very deep flows; the per-step log_g0[k] stays
// bounded and allows per-site accumulation), log_g0[0] = 0.
struct FlowTrace {
  std::vector<SpectralCoeffs> levels;
  std::vector<double> sup_ratio;
  std::vector<double> log_a0;
  std::vector<double> log_g0;
};
FlowTrace run_flow(const ModelConfig& config);

// Grid samples of a smooth 1-periodic function at z_j = j/grid_size.
struct PeriodicFunction {
  std::vector<double> values;

  int grid_size() const { return static_cast<int>(values.size()); }
  double operator[](int j) const { return values[j]; }
};

// Pointwise spectral evaluation from coefficients, any z. With
// d(z) = 1 + 2 sum_{q>=1} lam(q) cos(2 pi q z):
//   potential_value  = -log d,
//   potential_deriv  = -d'/d,
//   potential_deriv2 = -d''/d + (d'/d)^2.
double potential_value(const SpectralCoeffs& lam, double z);
double potential_deriv(const SpectralCoeffs& lam, double z);
double potential_deriv2(const SpectralCoeffs& lam, double z);

// v, v', v'' sampled on the grid. The additive normalization of v is fixed by
// the coefficient normalization lam(0) = 1, never by a separate constant.
struct Potentials {
  PeriodicFunction v;
  PeriodicFunction v1;
  PeriodicFunction v2;
};
Potentials potential_from_coeffs(const SpectralCoeffs& lam, int grid_size);

// Weighted l1 distance sum_{q>=1} w^{q-1} |lam(q) - lam'(q)| with weight
// w = 2 b^{3/2} sqrt(max(b*theta - 1, 0)); plain l1 when b*theta <= 1.
double weighted_distance(const SpectralCoeffs& a, const SpectralCoeffs& c,
                         int b, double theta);

// Fixed point of the constant-theta step. Iterates from the theta^{q^2} seed
// (or a caller-supplied one) until successive iterates differ by < tol in the
// weighted metric. residual is the final successive-iterate distance;
// error_estimate = residual * r / (1 - r) for the tail of the geometric series,
// with r the smoothed empirical contraction ratio. trivial is set when
// b*theta <= 1 (the only fixed point is the delta coefficient and the
// iteration is not run).
struct FixedPointResult {
  SpectralCoeffs lam;
  bool trivial = false;
  bool converged = false;
  long iterations = 0;
  double residual = 0.0;
  double error_estimate = 0.0;
};
FixedPointResult fixed_point(int b, double theta, int q_max = 16,
                             double tol = 1e-12, long max_iters = 1'000'000);
FixedPointResult fixed_point_from(SpectralCoeffs seed, int b, double theta,
                                  double tol = 1e-12,
                                  long max_iters = 1'000'000);

}  // namespace hrg
