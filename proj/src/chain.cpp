#include "hrg/chain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hrg/observables.hpp"

namespace hrg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kWeightDrop = 1e-18;   // charge-mode drop relative to max
constexpr int kQHard = 64;

double grid_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// circulant row of the wrapped-Gaussian kernel: row[j] = wg(j/G; var)
std::vector<double> kernel_row(int grid, double var) {
  std::vector<double> row(grid);
  for (int j = 0; j < grid; ++j)
    row[j] = wrapped_gauss(static_cast<double>(j) / grid, var);
  return row;
}

}  // namespace

double wrapped_gauss(double t, double var) {
  if (!(var > 0.0)) throw std::invalid_argument("wrapped_gauss: var must be > 0");
  t -= std::round(t);   // periodic; center the sum
  const double sw = std::sqrt(var);
  // exp(-u^2/2var) < 1e-16 needs |u| > 8.6 sqrt(var); |t| <= 1/2 after centering
  const int j_max = static_cast<int>(std::ceil(9.0 * sw)) + 1;
  const double norm = 1.0 / std::sqrt(2.0 * kPi * var);
  double s = 0.0;
  for (int j = -j_max; j <= j_max; ++j) {
    const double u = t + j;
    s += std::exp(-u * u / (2.0 * var));
  }
  return norm * s;
}

MarginalDensity propagate_density(const MarginalDensity& rho_above,
                                  const PeriodicFunction& v_below,
                                  double sigma_sq_over_beta, int b) {
  const int g = v_below.grid_size();
  if (static_cast<int>(rho_above.rho.size()) != g)
    throw std::invalid_argument("propagate_density: grid mismatch");
  const std::vector<double> row = kernel_row(g, sigma_sq_over_beta);
  std::vector<double> ebv(g);
  for (int j = 0; j < g; ++j) ebv[j] = std::exp(-b * v_below[j]);

  // per-source normalizer N(u) = (1/G) sum_z ebv(z) row(z-u)
  std::vector<double> norm(g, 0.0);
  for (int u = 0; u < g; ++u) {
    double acc = 0.0;
    for (int z = 0; z < g; ++z) acc += ebv[z] * row[(z - u + g) % g];
    norm[u] = acc / g;
  }
  MarginalDensity out;
  out.level = rho_above.level - 1;
  out.rho.assign(g, 0.0);
  std::vector<double> src(g);
  for (int u = 0; u < g; ++u) src[u] = rho_above.rho[u] / norm[u];
  for (int z = 0; z < g; ++z) {
    double acc = 0.0;
    for (int u = 0; u < g; ++u) acc += row[(z - u + g) % g] * src[u];
    out.rho[z] = ebv[z] * acc / g;
  }
  // unit mean up to quadrature roundoff; renormalize to keep the invariant tight
  const double m = grid_mean(out.rho);
  for (double& x : out.rho) x /= m;
  return out;
}

ChainLevels build_chain(const ModelConfig& config) {
  config.validate();
  ChainLevels c;
  c.config = config;
  c.flow = run_flow(config);
  const int n = config.n;
  const int g = config.grid_size;
  c.pots.reserve(n + 1);
  c.v_min.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    c.pots.push_back(potential_from_coeffs(c.flow.levels[k], g));
    c.v_min.push_back(
        *std::min_element(c.pots[k].v.values.begin(), c.pots[k].v.values.end()));
  }
  c.s.assign(n + 2, 0.0);
  for (int k = 0; k <= n; ++k)
    c.s[k + 1] = c.s[k] / config.b + config.sigma_sq[k];

  // marginals: level n conditioned on phi_{n+1} = 0, then downward
  c.rho.resize(n + 1);
  {
    MarginalDensity top;
    top.level = n;
    top.rho.resize(g);
    const std::vector<double> row = kernel_row(g, config.sigma_sq[n] / config.beta);
    for (int z = 0; z < g; ++z)
      top.rho[z] = std::exp(-config.b * c.pots[n - 1].v[z]) * row[z];
    const double m = grid_mean(top.rho);
    for (double& x : top.rho) x /= m;
    c.rho[n] = std::move(top);
  }
  for (int k = n - 1; k >= 1; --k)
    c.rho[k] = propagate_density(c.rho[k + 1], c.pots[k - 1].v,
                                 config.sigma_sq[k] / config.beta, config.b);
  return c;
}

double level_expectation(const ChainLevels& chain, int level,
                         const PeriodicFunction& f) {
  const int n = chain.config.n;
  if (level == n + 1) return f[0];
  if (level < 1 || level > n)
    throw std::invalid_argument("level_expectation: level must be in [1, n+1]");
  const auto& rho = chain.rho[level].rho;
  const int g = static_cast<int>(rho.size());
  double acc = 0.0;
  for (int j = 0; j < g; ++j) acc += rho[j] * f[j];
  return acc / g;
}

std::vector<double> covariance_increments(const ChainLevels& chain) {
  const ModelConfig& cfg = chain.config;
  const int n = cfg.n;
  const double beta = cfg.beta;
  const int g = cfg.grid_size;
  // grid products reused across levels
  std::vector<PeriodicFunction> vp2(n + 1), curv(n + 1);
  for (int i = 0; i <= n; ++i) {
    vp2[i].values.resize(g);
    curv[i].values.resize(g);
    for (int j = 0; j < g; ++j) {
      const double d1 = chain.pots[i].v1[j];
      vp2[i].values[j] = d1 * d1;
      curv[i].values[j] = d1 * d1 - chain.pots[i].v2[j];
    }
  }
  std::vector<double> inc(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double ss = cfg.sigma_sq[i];
    double v = ss / beta;
    v += ss / (beta * beta) * (ss + 2.0 * chain.s[i] / cfg.b) *
         level_expectation(chain, i + 1, curv[i]);
    double t2 = -chain.s[i + 1] * chain.s[i + 1] *
                level_expectation(chain, i + 1, vp2[i]);
    if (i >= 1)
      t2 += chain.s[i] * chain.s[i] * level_expectation(chain, i, vp2[i - 1]);
    inc[i] = v + t2 / (beta * beta);
  }
  return inc;
}

double covariance_exact(const ChainLevels& chain, int k) {
  const int n = chain.config.n;
  if (k < 0 || k > n)
    throw std::invalid_argument("covariance_exact: k must be in [0, n]");
  const std::vector<double> inc = covariance_increments(chain);
  const double top =
      chain.s[n + 1] * potential_deriv(chain.flow.levels[n], 0.0) / chain.config.beta;
  double acc = top * top;
  for (int i = n; i >= k; --i) acc += inc[i];
  return acc;
}

double ChargeWeights::at(int q) const {
  const int i = q - q_lo;
  if (i < 0 || i >= static_cast<int>(w.size())) return 0.0;
  return w[static_cast<std::size_t>(i)];
}

namespace {

void trim_weights(ChargeWeights& w) {
  double mx = 0.0;
  for (double v : w.w) mx = std::max(mx, std::abs(v));
  const double floor = kWeightDrop * mx;
  std::size_t lo = 0, hi = w.w.size();
  while (hi > lo + 1 && std::abs(w.w[hi - 1]) < floor) --hi;
  while (lo + 1 < hi && std::abs(w.w[lo]) < floor) ++lo;
  if (lo > 0 || hi < w.w.size()) {
    w.w = std::vector<double>(w.w.begin() + lo, w.w.begin() + hi);
    w.q_lo += static_cast<int>(lo);
  }
}

}  // namespace

ChargeWeights init_charge_weights(const ModelConfig& config, double alpha) {
  if (!(std::abs(alpha) < 0.5))
    throw std::invalid_argument("init_charge_weights: need |alpha| < 1/2");
  const std::vector<double> a = fourier_coeffs(config.measure, kQHard);
  const double th0 = config.theta_level(0);
  ChargeWeights w;
  w.level = 1;
  w.alpha = alpha;
  w.q_lo = -kQHard;
  w.w.assign(2 * kQHard + 1, 0.0);
  for (int q = -kQHard; q <= kQHard; ++q) {
    const double shift = q + alpha;
    w.w[q + kQHard] =
        (a[std::abs(q)] / a[0]) * std::pow(th0, shift * shift);
  }
  trim_weights(w);
  return w;
}

ChargeWeights charge_weights_step(const ChargeWeights& w,
                                  const SpectralCoeffs& lam_below,
                                  double theta_k, int b) {
  const std::vector<double> gamma = gamma_star_weights(lam_below, b);
  const int gq = static_cast<int>(gamma.size()) - 1;
  const int in_lo = w.q_lo;
  const int in_hi = w.q_lo + static_cast<int>(w.w.size()) - 1;
  const int out_lo = std::max(in_lo - gq, -kQHard);
  const int out_hi = std::min(in_hi + gq, kQHard);
  ChargeWeights out;
  out.level = w.level + 1;
  out.alpha = w.alpha;
  out.q_lo = out_lo;
  out.w.assign(out_hi - out_lo + 1, 0.0);
  for (int q = out_lo; q <= out_hi; ++q) {
    double acc = 0.0;
    const int l_lo = std::max(in_lo, q - gq);
    const int l_hi = std::min(in_hi, q + gq);
    for (int l = l_lo; l <= l_hi; ++l)
      acc += gamma[std::abs(q - l)] * w.w[l - in_lo];
    const double shift = q + w.alpha;
    out.w[q - out_lo] = std::pow(theta_k, shift * shift) * acc;
  }
  trim_weights(out);
  return out;
}

std::vector<ChargeWeights> run_charge_weights(const ChainLevels& chain,
                                              double alpha) {
  const int n = chain.config.n;
  std::vector<ChargeWeights> levels(n + 2);
  levels[1] = init_charge_weights(chain.config, alpha);
  for (int k = 1; k <= n; ++k)
    levels[k + 1] = charge_weights_step(levels[k], chain.flow.levels[k - 1],
                                        chain.config.theta_level(k),
                                        chain.config.b);
  return levels;
}

namespace {

// E |f_k(phi_k)|^2 with f_k = (sum_q w(q) e^{2 pi i q z}) * e^{v_{k-1}(z)}
PeriodicFunction modulus_sq_on_grid(const ChargeWeights& w,
                                    const PeriodicFunction& v_below) {
  const int g = v_below.grid_size();
  PeriodicFunction out;
  out.values.resize(g);
  for (int j = 0; j < g; ++j) {
    const double z = static_cast<double>(j) / g;
    double re = 0.0, im = 0.0;
    for (int i = 0; i < static_cast<int>(w.w.size()); ++i) {
      const int q = w.q_lo + i;
      re += w.w[i] * std::cos(2.0 * kPi * q * z);
      im += w.w[i] * std::sin(2.0 * kPi * q * z);
    }
    const double amp = std::exp(v_below[j]);   // 1 / d_{k-1}(z)
    out.values[j] = (re * re + im * im) * amp * amp;
  }
  return out;
}

}  // namespace

double charge_correlation_exact(const ChainLevels& chain, double alpha, int k) {
  const int n = chain.config.n;
  if (k < 0 || k > n)
    throw std::invalid_argument("charge_correlation_exact: k must be in [0, n]");
  if (k == 0) return 1.0;
  const std::vector<ChargeWeights> w = run_charge_weights(chain, alpha);
  const PeriodicFunction f2 = modulus_sq_on_grid(w[k], chain.pots[k - 1].v);
  return level_expectation(chain, k, f2);
}

double single_charge_exact(const ChainLevels& chain, double alpha) {
  const int n = chain.config.n;
  const std::vector<ChargeWeights> w = run_charge_weights(chain, alpha);
  double num = 0.0;
  for (double v : w[n + 1].w) num += v;
  double den = 1.0;
  for (int q = 1; q <= chain.flow.levels[n].max_q(); ++q)
    den += 2.0 * chain.flow.levels[n].lam[q];
  return num / den;
}

std::vector<ChainLevelRow> chain_level_table(const ChainLevels& chain,
                                             double alpha) {
  const ModelConfig& cfg = chain.config;
  const int n = cfg.n;
  const std::vector<double> inc = covariance_increments(chain);
  const std::vector<ChargeWeights> w = run_charge_weights(chain, alpha);
  const double top =
      chain.s[n + 1] * potential_deriv(chain.flow.levels[n], 0.0) / cfg.beta;

  // stationary reference for the TV column
  std::vector<double> ref(cfg.grid_size, 1.0);
  if (cfg.supercritical()) {
    StarData star = star_data(cfg.b, cfg.theta(), cfg.q_max, cfg.grid_size);
    ref = star.nu_star;
  }

  std::vector<ChainLevelRow> rows;
  rows.reserve(n);
  double em2 = top * top;
  std::vector<double> em2_at(n + 2, 0.0);
  em2_at[n + 1] = em2;
  for (int i = n; i >= 0; --i) em2_at[i] = em2_at[i + 1] + inc[i];
  for (int k = 1; k <= n; ++k) {
    ChainLevelRow r;
    r.k = k;
    r.em2 = em2_at[k];
    r.increment = inc[k];
    r.w0 = w[k].at(0);
    r.w0_ratio = w[k + 1].at(0) / w[k].at(0);
    double tv = 0.0;
    for (int j = 0; j < cfg.grid_size; ++j)
      tv += std::abs(chain.rho[k].rho[j] - ref[j]);
    r.tv_to_nu_star = 0.5 * tv / cfg.grid_size;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace hrg
