#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hrg/model.hpp"
#include "hrg/rgflow.hpp"

namespace hrg {

// Explicit b^n x b^n hierarchical Laplacian. Off-diagonal (x, y) carries the
// ball sum c_{k(x,y)} + ... + c_n; the diagonal carries
// -c_{n+1} - sum_k c_k (b^k - 1), so every row sums to -c_{n+1}.
Eigen::MatrixXd build_laplacian(const LaplacianProfile& profile);

// Max-abs entry difference between (-Laplacian)^{-1} and the finite-range
// decomposition sigma_0^2 Q_0 + sum_k sigma_k^2 b^k Q_k, where
// (Q_k)_{xy} = b^{-k} 1{branch_depth(x,y) <= k}.
double verify_decomposition(const LaplacianProfile& profile,
                            const std::vector<double>& sigma_sq);

// Brute-force Gibbs enumeration for integer-valued fields (DG measure only):
// every site ranges over {-q_site, ..., q_site}. Returns, per requested pair,
// the exact truncated <phi_x phi_y> and <cos 2 pi alpha (phi_x - phi_y)>, and
// the same values at truncation q_site - 1 so callers can see the truncation
// shift. Rows with x == y and alpha != 0 return the single-site expectation
// <cos 2 pi alpha phi_x> instead of the (trivial) difference. Kahan-
// compensated sums; enumeration is partitioned over the value of site 0 and
// merged in fixed order.
struct GibbsObservable {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  double alpha = 0.0;   // 0 means covariance-only for this row
};
struct GibbsValue {
  double covariance = 0.0;
  double charge = 0.0;
  double covariance_prev_q = 0.0;   // at q_site - 1
  double charge_prev_q = 0.0;
};
struct GibbsResult {
  std::vector<GibbsValue> values;
  double log_z = 0.0;
  long states = 0;
};
GibbsResult gibbs_brute(const ModelConfig& config, int q_site,
                        const std::vector<GibbsObservable>& observables,
                        const std::string& cache_dir = "");

// Direct quadrature of the coarsening integral: given e^{-v} via v on the
// grid, returns v_next with
//   e^{-v_next(z)} = int_0^1 e^{-b v(u)} wrapped_gauss(u - z; sigma_sq/beta) du
// up to the caller's normalization (v_next is shifted so its d(0)-mode is 1,
// matching the coefficient convention).
PeriodicFunction potential_recursion_direct(const PeriodicFunction& v,
                                            double sigma_sq_over_beta, int b);

// Cosine modes m(q) = int_0^1 e^{-v(z)} cos(2 pi q z) dz / same at q=0,
// for comparing a grid potential against spectral coefficients.
std::vector<double> normalized_modes(const PeriodicFunction& v, int q_max);

}  // namespace hrg
