#include "hrg/observables.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hrg/chain.hpp"

namespace hrg {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> to_full(const std::vector<double>& s) {
  const int q = static_cast<int>(s.size()) - 1;
  std::vector<double> f(2 * q + 1);
  for (int i = -q; i <= q; ++i) f[q + i] = s[std::abs(i)];
  return f;
}

std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& c) {
  std::vector<double> r(a.size() + c.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) r[i + j] += a[i] * c[j];
  return r;
}

double beta_from_theta(double theta) { return -2.0 * kPi * kPi / std::log(theta); }

void parallel_for(int jobs, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, jobs));
  if (threads == 1) {
    for (int i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < jobs; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<double> gamma_star_weights(const SpectralCoeffs& lam_star, int b) {
  if (b < 2) throw std::invalid_argument("gamma_star_weights: b must be >= 2");
  const std::vector<double> f = to_full(lam_star.lam);
  std::vector<double> num = f;
  for (int i = 2; i < b; ++i) num = convolve(num, f);   // (b-1)-fold
  std::vector<double> den = convolve(num, f);           // b-fold
  const int cn = (b - 1) * lam_star.max_q();
  const int cd = b * lam_star.max_q();
  const double g0 = den[cd];
  std::vector<double> gamma(cn + 1);
  for (int q = 0; q <= cn; ++q) gamma[q] = num[cn + q] / g0;
  return gamma;
}

std::vector<double> charge_path_sums(const std::vector<double>& gamma_star,
                                     double theta, double alpha, int q_path) {
  if (q_path < 1) throw std::invalid_argument("charge_path_sums: q_path >= 1");
  const int gq = static_cast<int>(gamma_star.size()) - 1;
  auto gam = [&](int d) {
    d = std::abs(d);
    return d <= gq ? gamma_star[d] : 0.0;
  };
  // nonzero states -q_path..-1, 1..q_path; source factor theta^{(q+alpha)^2-alpha^2}
  std::vector<int> st;
  for (int q = -q_path; q <= q_path; ++q)
    if (q != 0) st.push_back(q);
  const int m = static_cast<int>(st.size());
  std::vector<double> omega(m);
  for (int i = 0; i < m; ++i)
    omega[i] = std::pow(theta, double(st[i]) * st[i] + 2.0 * st[i] * alpha);

  std::vector<double> sums;
  sums.push_back(gam(0));                    // j = 1: direct return
  std::vector<double> x(m);
  for (int i = 0; i < m; ++i) x[i] = gam(st[i]);   // after first hop from 0
  const double t_lower = std::max(1.0, gam(0));
  double t_pow = t_lower;
  for (int j = 2; j <= 20'000; ++j) {
    double close = 0.0;
    for (int i = 0; i < m; ++i) close += x[i] * omega[i] * gam(-st[i]);
    sums.push_back(close);
    t_pow *= t_lower;
    if (!(close > 1e-14 / t_pow) || !std::isfinite(close)) break;
    std::vector<double> nx(m, 0.0);
    for (int i = 0; i < m; ++i) {
      const double xi = x[i] * omega[i];
      if (xi == 0.0) continue;
      for (int l = 0; l < m; ++l) nx[l] += xi * gam(st[l] - st[i]);
    }
    x = std::move(nx);
  }
  return sums;
}

double t_star_solve(const std::vector<double>& path_sums, double tol) {
  auto series = [&](double t) {
    double s = 0.0, tp = 1.0;
    for (double g : path_sums) {
      tp /= t;
      s += g * tp;
    }
    return s;
  };
  if (series(1.0) <= 1.0) return 1.0;
  double lo = 1.0, hi = 2.0;
  while (series(hi) > 1.0) {
    hi *= 2.0;
    if (hi > 16.0)
      throw std::runtime_error("t_star_solve: no root below bracket cap 16");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (series(mid) > 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

StarData star_data(int b, double theta, int q_max, int grid_size, double tol,
                   long max_iters) {
  StarData s;
  FixedPointResult fp = fixed_point(b, theta, q_max, tol, max_iters);
  s.trivial = fp.trivial;
  s.converged = fp.converged;
  s.lam_star = std::move(fp.lam);
  s.gamma_star = gamma_star_weights(s.lam_star, b);
  Potentials p = potential_from_coeffs(s.lam_star, grid_size);
  s.v_star = std::move(p.v);
  s.v1_star = std::move(p.v1);

  // nu ~ e^{-(b+1) v} = d^{b+1} up to constants; normalize to unit grid mean
  s.nu_star.resize(grid_size);
  double mean = 0.0;
  for (int j = 0; j < grid_size; ++j) {
    s.nu_star[j] = std::exp(-(b + 1.0) * s.v_star[j]);
    mean += s.nu_star[j];
  }
  mean /= grid_size;
  for (double& v : s.nu_star) v /= mean;

  if (!s.trivial) {
    // self-consistency of the limit potential under one coarsening step
    const double beta = beta_from_theta(theta);
    const double g0 = [&] {
      std::vector<double> f = to_full(s.lam_star.lam);
      std::vector<double> c = f;
      for (int i = 1; i < b; ++i) c = convolve(c, f);
      return c[b * s.lam_star.max_q()];
    }();
    const double scale = std::pow(g0, -1.0 / (b - 1.0));
    std::vector<double> env(grid_size);
    for (int j = 0; j < grid_size; ++j)
      env[j] = scale * std::exp(-s.v_star[j]);
    double worst = 0.0;
    for (int j = 0; j < grid_size; ++j) {
      double acc = 0.0;
      for (int u = 0; u < grid_size; ++u) {
        const double t = double(u - j) / grid_size;
        acc += std::pow(env[u], b) * wrapped_gauss(t, 1.0 / beta);
      }
      acc /= grid_size;
      worst = std::max(worst, std::abs(acc - env[j]));
    }
    s.identity_residual = worst;
  }
  return s;
}

double tau_exponent(double alpha, int b) {
  if (!(std::abs(alpha) < 0.5))
    throw std::invalid_argument("tau_exponent: need |alpha| < 1/2");
  const double bd = b;
  const double pref = 2.0 * (bd * bd * bd - 1.0) / ((bd - 1.0) * std::pow(bd + 1.0, 3));
  return pref * ((bd - 1.0) / (std::pow(bd, 1.0 + 2.0 * alpha) - 1.0) +
                 (bd - 1.0) / (std::pow(bd, 1.0 - 2.0 * alpha) - 1.0) - 2.0);
}

double c_bar(int b) {
  const double bd = b;
  const double bc = beta_critical(b);
  return 8.0 * kPi * kPi / (bc * bc) * bd * (bd * bd * bd - 1.0) /
         (std::pow(bd - 1.0, 3) * (bd + 1.0) * (bd + 1.0));
}

double jump_coefficient(int b) {
  const double bd = b;
  const double bc = beta_critical(b);
  return 32.0 * std::pow(kPi, 4) / std::pow(bc, 4) * bd * (bd * bd * bd - 1.0) /
         (std::pow(bd - 1.0, 3) * (bd + 1.0) * (bd + 1.0));
}

ChargeExponentData kappa_exponent(double alpha, double beta, int b, int q_max,
                                  double tol, long max_iters) {
  if (!(std::abs(alpha) < 0.5))
    throw std::invalid_argument("kappa_exponent: need |alpha| < 1/2");
  ChargeExponentData r;
  r.theta = std::exp(-2.0 * kPi * kPi / beta);
  r.tau = tau_exponent(alpha, b);
  const double bc = beta_critical(b);
  const double sub = 4.0 * bc * alpha * alpha / beta;
  r.supercritical = b * r.theta > 1.0;
  if (!r.supercritical || alpha == 0.0) {
    r.t_star = 1.0;
    r.kappa = sub;
    return r;
  }
  FixedPointResult fp = fixed_point(b, r.theta, q_max, tol, max_iters);
  const std::vector<double> gamma = gamma_star_weights(fp.lam, b);
  r.t_star = t_star_solve(charge_path_sums(gamma, r.theta, alpha));
  r.kappa = sub - 4.0 / std::log(static_cast<double>(b)) * std::log(r.t_star);
  return r;
}

double sigma2_from_star(const StarData& star, double beta, int b) {
  if (star.trivial) return 1.0 / beta;
  const int g = star.v_star.grid_size();
  double num = 0.0, den = 0.0;
  for (int j = 0; j < g; ++j) {
    const double d1 = star.v1_star[j];
    num += star.nu_star[j] * d1 * d1;
    den += star.nu_star[j];
  }
  const double mean_vp2 = num / den;
  return 1.0 / beta -
         (b / (beta * beta)) * ((b + 1.0) / (b - 1.0)) * mean_vp2;
}

double sigma2(double beta, int b, int q_max, int grid_size, double tol,
              long max_iters) {
  const double theta = std::exp(-2.0 * kPi * kPi / beta);
  if (b * theta <= 1.0) return 1.0 / beta;
  StarData s = star_data(b, theta, q_max, grid_size, tol, max_iters);
  return sigma2_from_star(s, beta, b);
}

std::vector<Sigma2Row> sigma2_scan(int b, double beta_lo, double beta_hi,
                                   int points, int q_max, int grid_size,
                                   int threads) {
  if (points < 2) throw std::invalid_argument("sigma2_scan: need >= 2 points");
  if (!(beta_lo > 0.0 && beta_hi > beta_lo))
    throw std::invalid_argument("sigma2_scan: bad beta range");
  std::vector<Sigma2Row> rows(points);
  parallel_for(points, threads, [&](int i) {
    const double beta =
        beta_lo + (beta_hi - beta_lo) * static_cast<double>(i) / (points - 1);
    rows[i].beta = beta;
    const double theta = std::exp(-2.0 * kPi * kPi / beta);
    if (b * theta <= 1.0) {
      rows[i].sigma2 = 1.0 / beta;
    } else {
      StarData star = star_data(b, theta, q_max, grid_size);
      rows[i].sigma2 = sigma2_from_star(star, beta, b);
      rows[i].fp_converged = star.converged;
    }
  });
  for (int i = 0; i < points; ++i) {
    const int lo = std::max(0, i - 1), hi = std::min(points - 1, i + 1);
    rows[i].dsigma2_dbeta =
        (rows[hi].sigma2 - rows[lo].sigma2) / (rows[hi].beta - rows[lo].beta);
  }
  return rows;
}

double sigma2_jump_estimate(const std::vector<Sigma2Row>& scan, int b) {
  const double bc = beta_critical(b);
  int i = -1;
  for (std::size_t j = 0; j < scan.size(); ++j) {
    if (scan[j].beta > bc) {
      i = static_cast<int>(j);
      break;
    }
  }
  if (i < 2 || i + 1 >= static_cast<int>(scan.size()))
    throw std::invalid_argument(
        "sigma2_jump_estimate: need two scan points on each side of beta_c");
  const auto slope = [&](int a, int c) {
    return (scan[c].sigma2 - scan[a].sigma2) / (scan[c].beta - scan[a].beta);
  };
  return slope(i - 2, i - 1) - slope(i, i + 1);
}

}  // namespace hrg
