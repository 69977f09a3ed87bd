#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hrg {

// Single-site a-priori measure, identified by its cosine-series coefficients
// a(q) = \int nu(dphi) e^{-2 pi i q phi} up to an overall constant.
struct MeasureSpec {
  enum class Kind { DG, SineGordon, HardCore, Custom };

  Kind kind = Kind::DG;
  double kappa = 0.0;           // SineGordon / HardCore coupling
  std::vector<double> custom;   // Custom: a(0), a(1), ... ; a(0) > 0

  static MeasureSpec dg();
  static MeasureSpec sine_gordon(double kappa);
  static MeasureSpec hard_core(double kappa);
  static MeasureSpec custom_coeffs(std::vector<double> coeffs);

  std::string name() const;
};

// Diagnostics for Assumption-type requirements on the measure.
struct MeasureDiagnostics {
  bool strictly_positive = true;   // a(q) > 0 for all q up to the truncation
  bool ratio_bounded = true;       // sup a(q+1)/a(q) finite over nonzero modes
  double sup_ratio = 0.0;
};

// a(q) for q = 0..q_max. DG: all ones. SineGordon: modified-Bessel series
// sum_{l>=0} (kappa/2)^{2l+q} / ((l+q)! l!). HardCore: {1, kappa, 0, 0, ...},
// kappa in [0, 1/2]. Custom: stored list, zero-padded.
std::vector<double> fourier_coeffs(const MeasureSpec& m, int q_max);

MeasureDiagnostics measure_diagnostics(const MeasureSpec& m, int q_max);

// 2 pi^2 / log b; the temperature separating the two covariance regimes.
double beta_critical(int b);

// Variance profile presets. massive_profile requires b = L^2 for integer L >= 2
// and returns sigma_k^2, k = 0..n, for mass-squared m2 > 0.
std::vector<double> constant_profile(int n);
std::vector<double> massive_profile(int b, int n, double m2);

struct ModelConfig {
  int b = 2;
  double beta = 20.0;
  int n = 8;
  std::vector<double> sigma_sq;   // sigma_k^2 for k = 0..n; must have size n+1
  MeasureSpec measure;
  int q_max = 16;
  int grid_size = 512;
  std::uint64_t seed = 1;

  double theta() const;               // e^{-2 pi^2 / beta}
  double theta_level(int k) const;    // theta^{sigma_k^2}
  double beta_c() const;              // beta_critical(b)
  bool supercritical() const;         // b * theta() > 1
  std::size_t sites() const;          // b^n

  // Throws std::invalid_argument on any violated precondition
  // (b >= 2, beta > 0, n >= 1, positive profile of size n+1, valid measure).
  void validate() const;
};

ModelConfig make_config(int b, double beta, int n,
                        MeasureSpec measure = MeasureSpec::dg(),
                        std::vector<double> sigma_sq = {});

// JSON config file; documented keys: b, beta, n, sigma_profile, measure,
// q_max, grid_size, seed. Throws std::invalid_argument with the offending key.
ModelConfig load_config(const std::string& path);

// Conductance profile of the hierarchical Laplacian. conductance[k-1] holds
// c_k for k = 1..n+1 (c_{n+1} is the mass term); partial_sum[k] holds
// u_k = sum_{j<=k} b^j sigma_j^2.
struct LaplacianProfile {
  std::vector<double> conductance;
  std::vector<double> partial_sum;
  int b = 2;
  int n = 1;
};

// c_{n+1} = 1/u_n, c_k = b^{-k}(1/u_{k-1} - 1/u_k). All c_k > 0 iff the
// sigma_k^2 are positive.
LaplacianProfile build_profile(const ModelConfig& config);

// Inverse map: u_n = 1/c_{n+1}, u_{k-1} = 1/(b^k c_k + 1/u_k),
// sigma_k^2 = (u_k - u_{k-1})/b^k. Round-trips build_profile exactly.
std::vector<double> sigma_from_profile(const LaplacianProfile& profile);

// Leaves are integers in [0, b^n) read as base-b strings, most significant
// digit coarsest. branch_depth = n minus the common-prefix length; 0 iff x==y.
int branch_depth(std::uint64_t x, std::uint64_t y, int b, int n);

// b^{k(x,y)/2}, and 0 on the diagonal.
double hier_distance(std::uint64_t x, std::uint64_t y, int b, int n);

}  // namespace hrg
