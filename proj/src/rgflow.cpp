#include "hrg/rgflow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hrg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDropRel = 1e-16;   // mode drop threshold relative to q = 0
constexpr double kSeedFloor = 1e-14; // auto-extension floor for seeds

// Symmetric sequence s(0..Q) -> full sequence over [-Q, Q].
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

}  // namespace

double SpectralCoeffs::at(int q) const {
  const int aq = std::abs(q);
  return aq <= max_q() ? lam[aq] : 0.0;
}

double SpectralCoeffs::sup_ratio() const {
  double r = 0.0;
  for (int q = 0; q < max_q(); ++q)
    if (lam[q] > 0.0) r = std::max(r, lam[q + 1] / lam[q]);
  return r;
}

RgStepResult rg_step(const SpectralCoeffs& lam, double theta_k, int b,
                     int q_cap) {
  if (b < 2) throw std::invalid_argument("rg_step: b must be >= 2");
  if (!(theta_k > 0.0 && theta_k < 1.0))
    throw std::invalid_argument("rg_step: theta must lie in (0, 1)");
  if (lam.lam.empty() || lam.lam[0] != 1.0)
    throw std::invalid_argument("rg_step: coefficients must be normalized");

  const std::vector<double> f = to_full(lam.lam);
  std::vector<double> conv = f;
  for (int i = 1; i < b; ++i) conv = convolve(conv, f);
  const int center = b * lam.max_q();

  const double zero_mode = conv[center];
  const int reach = std::min(center, q_cap);
  std::vector<double> next;
  next.reserve(reach + 1);
  for (int q = 0; q <= reach; ++q) {
    const double raw = conv[center + q] * std::pow(theta_k, double(q) * q);
    if (q > 0 && raw < kDropRel * zero_mode) break;
    next.push_back(raw);
  }
  for (double& v : next) v /= zero_mode;

  RgStepResult out;
  out.lam.lam = std::move(next);
  out.log_g0 = std::log(zero_mode);
  return out;
}

SpectralCoeffs init_coeffs(const ModelConfig& config) {
  config.validate();
  const double theta0 = config.theta_level(0);
  // extend past q_max while the seed mode is above the floor (cap 64)
  int q_hi = config.q_max;
  const std::vector<double> probe = fourier_coeffs(config.measure, 64);
  while (q_hi < 64 &&
         (probe[q_hi] / probe[0]) * std::pow(theta0, double(q_hi) * q_hi) >
             kSeedFloor)
    ++q_hi;
  std::vector<double> a = fourier_coeffs(config.measure, q_hi);
  SpectralCoeffs lam;
  lam.lam.resize(a.size());
  for (int q = 0; q < static_cast<int>(a.size()); ++q)
    lam.lam[q] = (a[q] / a[0]) * std::pow(theta0, double(q) * q);
  // drop trailing zero modes (hard-core has a(q) = 0 beyond q = 1)
  while (lam.lam.size() > 1 && lam.lam.back() < kDropRel) lam.lam.pop_back();
  return lam;
}

double init_log_a0(const ModelConfig& config) {
  const std::vector<double> a = fourier_coeffs(config.measure, 0);
  return 0.5 * std::log(2.0 * kPi * config.sigma_sq[0] / config.beta) +
         std::log(a[0]);
}

FlowTrace run_flow(const ModelConfig& config) {
  FlowTrace t;
  t.levels.reserve(config.n + 1);
  t.levels.push_back(init_coeffs(config));
  t.sup_ratio.push_back(t.levels[0].sup_ratio());
  t.log_a0.push_back(init_log_a0(config));
  t.log_g0.push_back(0.0);
  for (int k = 1; k <= config.n; ++k) {
    RgStepResult s = rg_step(t.levels.back(), config.theta_level(k), config.b);
    t.log_a0.push_back(config.b * t.log_a0.back() + s.log_g0);
    t.log_g0.push_back(s.log_g0);
    t.sup_ratio.push_back(s.lam.sup_ratio());
    t.levels.push_back(std::move(s.lam));
  }
  return t;
}

double potential_value(const SpectralCoeffs& lam, double z) {
  double d = 1.0;
  for (int q = 1; q <= lam.max_q(); ++q)
    d += 2.0 * lam.lam[q] * std::cos(2.0 * kPi * q * z);
  if (!(d > 0.0))
    throw std::domain_error("potential: coefficient density not positive");
  return -std::log(d);
}

double potential_deriv(const SpectralCoeffs& lam, double z) {
  double d = 1.0, d1 = 0.0;
  for (int q = 1; q <= lam.max_q(); ++q) {
    const double w = 2.0 * kPi * q;
    d += 2.0 * lam.lam[q] * std::cos(w * z);
    d1 -= 2.0 * lam.lam[q] * w * std::sin(w * z);
  }
  if (!(d > 0.0))
    throw std::domain_error("potential: coefficient density not positive");
  return -d1 / d;
}

double potential_deriv2(const SpectralCoeffs& lam, double z) {
  double d = 1.0, d1 = 0.0, d2 = 0.0;
  for (int q = 1; q <= lam.max_q(); ++q) {
    const double w = 2.0 * kPi * q;
    d += 2.0 * lam.lam[q] * std::cos(w * z);
    d1 -= 2.0 * lam.lam[q] * w * std::sin(w * z);
    d2 -= 2.0 * lam.lam[q] * w * w * std::cos(w * z);
  }
  if (!(d > 0.0))
    throw std::domain_error("potential: coefficient density not positive");
  const double r = d1 / d;
  return -d2 / d + r * r;
}

Potentials potential_from_coeffs(const SpectralCoeffs& lam, int grid_size) {
  if (grid_size < 8)
    throw std::invalid_argument("potential_from_coeffs: grid too small");
  Potentials p;
  p.v.values.resize(grid_size);
  p.v1.values.resize(grid_size);
  p.v2.values.resize(grid_size);
  for (int j = 0; j < grid_size; ++j) {
    const double z = static_cast<double>(j) / grid_size;
    double d = 1.0, d1 = 0.0, d2 = 0.0;
    for (int q = 1; q <= lam.max_q(); ++q) {
      const double w = 2.0 * kPi * q;
      const double c = std::cos(w * z), s = std::sin(w * z);
      d += 2.0 * lam.lam[q] * c;
      d1 -= 2.0 * lam.lam[q] * w * s;
      d2 -= 2.0 * lam.lam[q] * w * w * c;
    }
    if (!(d > 0.0))
      throw std::domain_error("potential: coefficient density not positive");
    const double r = d1 / d;
    p.v.values[j] = -std::log(d);
    p.v1.values[j] = -r;
    p.v2.values[j] = -d2 / d + r * r;
  }
  return p;
}

double weighted_distance(const SpectralCoeffs& a, const SpectralCoeffs& c,
                         int b, double theta) {
  const double excess = std::max(b * theta - 1.0, 0.0);
  const double w = 2.0 * std::pow(static_cast<double>(b), 1.5) * std::sqrt(excess);
  double dist = 0.0, wq = 1.0;
  const int hi = std::max(a.max_q(), c.max_q());
  for (int q = 1; q <= hi; ++q) {
    dist += wq * std::abs(a.at(q) - c.at(q));
    wq *= (w > 0.0 ? w : 1.0);
  }
  return dist;
}

FixedPointResult fixed_point_from(SpectralCoeffs seed, int b, double theta,
                                  double tol, long max_iters) {
  FixedPointResult r;
  if (b * theta <= 1.0) {
    r.trivial = true;
    r.converged = true;
    r.lam.lam = {1.0};
    return r;
  }
  SpectralCoeffs cur = std::move(seed);
  double prev_d = -1.0, ratio = 0.5;
  for (long it = 1; it <= max_iters; ++it) {
    SpectralCoeffs next = rg_step(cur, theta, b).lam;
    const double d = weighted_distance(next, cur, b, theta);
    cur = std::move(next);
    r.iterations = it;
    r.residual = d;
    if (prev_d > 0.0 && d > 0.0) {
      const double inst = std::min(d / prev_d, 1.0 - 1e-12);
      ratio = 0.9 * ratio + 0.1 * inst;
    }
    prev_d = d;
    r.error_estimate = d * ratio / (1.0 - ratio);
    if (d < tol) {
      r.converged = true;
      break;
    }
  }
  r.lam = std::move(cur);
  return r;
}

FixedPointResult fixed_point(int b, double theta, int q_max, double tol,
                             long max_iters) {
  if (b < 2) throw std::invalid_argument("fixed_point: b must be >= 2");
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("fixed_point: theta must lie in (0, 1)");
  if (b * theta <= 1.0) {
    FixedPointResult r;
    r.trivial = true;
    r.converged = true;
    r.lam.lam = {1.0};
    return r;
  }
  int q_hi = q_max;
  while (q_hi < 64 && std::pow(theta, double(q_hi) * q_hi) > kSeedFloor) ++q_hi;
  SpectralCoeffs seed;
  seed.lam.resize(q_hi + 1);
  for (int q = 0; q <= q_hi; ++q) seed.lam[q] = std::pow(theta, double(q) * q);
  return fixed_point_from(std::move(seed), b, theta, tol, max_iters);
}

}  // namespace hrg
