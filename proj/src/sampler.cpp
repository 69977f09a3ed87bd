#include "hrg/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

namespace hrg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEnvelopeMargin = 1e-12;
constexpr long kMaxRejects = 1'000'000;

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// lanes used by the pair sampler: spine shares the level lane, the two
// branches below the split get disjoint lane offsets
constexpr std::uint64_t kBranchA = 1ULL << 32;
constexpr std::uint64_t kBranchB = 2ULL << 32;

}  // namespace

KeyedRng::KeyedRng(std::uint64_t seed, std::uint64_t item, std::uint64_t lane) {
  state_ = mix64(seed ^ mix64(item ^ mix64(lane)));
}

std::uint64_t KeyedRng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double KeyedRng::uniform() {
  const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return u > 0.0 ? u : 0x1.0p-53;
}

double KeyedRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

namespace {

// site-level draw: density prop. to nu(dphi) e^{-(beta_0/2)(phi - prev)^2}
double sample_site(const ChainLevels& chain, double prev, KeyedRng& rng) {
  const ModelConfig& cfg = chain.config;
  const double beta0 = cfg.beta / cfg.sigma_sq[0];
  switch (cfg.measure.kind) {
    case MeasureSpec::Kind::DG: {
      const int reach =
          static_cast<int>(std::ceil(12.0 * std::sqrt(1.0 / beta0))) + 2;
      const long center = std::lround(prev);
      std::vector<double> cdf;
      cdf.reserve(2 * reach + 1);
      double total = 0.0;
      for (long q = center - reach; q <= center + reach; ++q) {
        const double d = static_cast<double>(q) - prev;
        total += std::exp(-0.5 * beta0 * d * d);
        cdf.push_back(total);
      }
      const double u = rng.uniform() * total;
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      return static_cast<double>(center - reach + (it - cdf.begin()));
    }
    case MeasureSpec::Kind::SineGordon: {
      const double sd = std::sqrt(1.0 / beta0);
      for (long tries = 0; tries < kMaxRejects; ++tries) {
        const double phi = prev + sd * rng.normal();
        const double acc =
            std::exp(-cfg.measure.kappa * (1.0 - std::cos(2.0 * kPi * phi)));
        if (rng.uniform() <= acc) return phi;
      }
      break;
    }
    case MeasureSpec::Kind::HardCore: {
      const double sd = std::sqrt(1.0 / beta0);
      const double bound = 1.0 + 2.0 * cfg.measure.kappa;
      for (long tries = 0; tries < kMaxRejects; ++tries) {
        const double phi = prev + sd * rng.normal();
        const double dens = 1.0 + 2.0 * cfg.measure.kappa * std::cos(2.0 * kPi * phi);
        if (rng.uniform() * bound <= dens) return phi;
      }
      break;
    }
    case MeasureSpec::Kind::Custom: {
      const std::vector<double> a = fourier_coeffs(cfg.measure, 64);
      double bound = 1.0;
      for (std::size_t q = 1; q < a.size(); ++q) bound += 2.0 * a[q] / a[0];
      const double sd = std::sqrt(1.0 / beta0);
      for (long tries = 0; tries < kMaxRejects; ++tries) {
        const double phi = prev + sd * rng.normal();
        double dens = 1.0;
        for (std::size_t q = 1; q < a.size(); ++q)
          dens += 2.0 * (a[q] / a[0]) * std::cos(2.0 * kPi * q * phi);
        if (dens < 0.0)
          throw std::domain_error("sample_site: custom density negative");
        if (rng.uniform() * bound <= dens) return phi;
      }
      break;
    }
  }
  throw std::runtime_error("sample_site: rejection cap exceeded");
}

}  // namespace

double sample_kernel(const ChainLevels& chain, int level, double prev,
                     KeyedRng& rng) {
  const ModelConfig& cfg = chain.config;
  if (level < 0 || level > cfg.n)
    throw std::invalid_argument("sample_kernel: level must be in [0, n]");
  if (level == 0) return sample_site(chain, prev, rng);
  const double sd = std::sqrt(cfg.sigma_sq[level] / cfg.beta);
  const SpectralCoeffs& lam_below = chain.flow.levels[level - 1];
  const double v_floor = chain.v_min[level - 1] - kEnvelopeMargin;
  for (long tries = 0; tries < kMaxRejects; ++tries) {
    const double phi = prev + sd * rng.normal();
    const double acc =
        std::exp(-cfg.b * (potential_value(lam_below, phi) - v_floor));
    if (rng.uniform() <= acc) return phi;
  }
  throw std::runtime_error("sample_kernel: rejection cap exceeded");
}

namespace {

struct PairDraw {
  double cov;
  double ccos;
  double csin;
};

PairDraw draw_pair(const ChainLevels& chain, int k, double alpha,
                   std::uint64_t seed, std::uint64_t item) {
  const int n = chain.config.n;
  double spine = 0.0;   // phi_{n+1}
  for (int lev = n; lev >= k; --lev) {
    KeyedRng rng(seed, item, static_cast<std::uint64_t>(lev));
    spine = sample_kernel(chain, lev, spine, rng);
  }
  double a = spine, c = spine;
  for (int lev = k - 1; lev >= 0; --lev) {
    KeyedRng ra(seed, item, kBranchA | static_cast<std::uint64_t>(lev));
    a = sample_kernel(chain, lev, a, ra);
    KeyedRng rb(seed, item, kBranchB | static_cast<std::uint64_t>(lev));
    c = sample_kernel(chain, lev, c, rb);
  }
  PairDraw d;
  d.cov = a * c;
  const double ang = 2.0 * kPi * alpha * (a - c);
  d.ccos = std::cos(ang);
  d.csin = std::sin(ang);
  return d;
}

EstimatorResult reduce(const std::vector<double>& xs, std::uint64_t seed) {
  // fixed-order compensated reduction: independent of thread count
  const long n = static_cast<long>(xs.size());
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  const double mean = sum / n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (n > 1 ? static_cast<double>(n - 1) : 1.0);
  EstimatorResult r;
  r.mean = mean;
  r.se = std::sqrt(var / n);
  r.n_samples = n;
  r.seed = seed;
  return r;
}

}  // namespace

PairEstimate sample_pair(const ChainLevels& chain, int k, double alpha,
                         long n_samples, std::uint64_t seed, int threads) {
  if (k < 0 || k > chain.config.n)
    throw std::invalid_argument("sample_pair: k must be in [0, n]");
  if (n_samples < 2)
    throw std::invalid_argument("sample_pair: need n_samples >= 2");
  std::vector<double> cov(n_samples), cc(n_samples), cs(n_samples);
  const int workers = std::max(1, threads);
  auto worker = [&](int t) {
    for (long i = t; i < n_samples; i += workers) {
      const PairDraw d = draw_pair(chain, k, alpha, seed,
                                   static_cast<std::uint64_t>(i));
      cov[i] = d.cov;
      cc[i] = d.ccos;
      cs[i] = d.csin;
    }
  };
  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  PairEstimate e;
  e.covariance = reduce(cov, seed);
  e.charge_cos = reduce(cc, seed);
  e.charge_sin = reduce(cs, seed);
  return e;
}

std::vector<double> sample_field(const ChainLevels& chain, std::uint64_t seed) {
  const ModelConfig& cfg = chain.config;
  const int n = cfg.n;
  const std::size_t leaves = cfg.sites();
  std::vector<double> cur{0.0};   // phi_{n+1} above the root
  for (int level = n; level >= 0; --level) {
    // the anchor-to-root step is one node to one node; branching is below
    const std::size_t arity = level < n ? static_cast<std::size_t>(cfg.b) : 1;
    std::vector<double> next(cur.size() * arity);
    for (std::size_t node = 0; node < next.size(); ++node) {
      KeyedRng rng(seed, static_cast<std::uint64_t>(node),
                   static_cast<std::uint64_t>(level));
      next[node] = sample_kernel(chain, level, cur[node / arity], rng);
    }
    cur = std::move(next);
  }
  if (cur.size() != leaves)
    throw std::logic_error("sample_field: leaf count mismatch");
  return cur;
}

}  // namespace hrg
