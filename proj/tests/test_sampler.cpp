#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "hrg/chain.hpp"
#include "hrg/model.hpp"
#include "hrg/sampler.hpp"

using namespace hrg;

TEST_SUITE("sampler") {

TEST_CASE("keyed rng: deterministic per key, distinct across lanes") {
  KeyedRng a(42, 7, 3);
  KeyedRng b(42, 7, 3);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());

  KeyedRng c(42, 7, 4);
  KeyedRng d(42, 8, 3);
  KeyedRng e(43, 7, 3);
  KeyedRng base(42, 7, 3);
  const std::uint64_t first = base.next_u64();
  CHECK(c.next_u64() != first);
  CHECK(d.next_u64() != first);
  CHECK(e.next_u64() != first);
}

TEST_CASE("keyed rng: uniform lands strictly inside (0,1)") {
  KeyedRng rng(11, 0, 0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("keyed rng: normal moments") {
  KeyedRng rng(5, 1, 2);
  const long n = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
    sum4 += x * x * x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  const double kurt = (sum4 / n) / (var * var);
  CHECK(std::abs(mean) < 0.01);          // se ~ 1/sqrt(n) ~ 0.0022
  CHECK(std::abs(var - 1.0) < 0.02);
  CHECK(std::abs(kurt - 3.0) < 0.1);
}

TEST_CASE("site-level kernel draws integers for the integer measure") {
  ModelConfig cfg = make_config(2, 20.0, 5);
  ChainLevels chain = build_chain(cfg);
  KeyedRng rng(9, 0, 0);
  for (int i = 0; i < 200; ++i) {
    const double x = sample_kernel(chain, 0, 0.3, rng);
    CHECK(x == std::round(x));
  }
  // same key reproduces the same draw
  KeyedRng r1(9, 4, 4), r2(9, 4, 4);
  CHECK(sample_kernel(chain, 0, 0.3, r1) == sample_kernel(chain, 0, 0.3, r2));
  CHECK_THROWS_AS(sample_kernel(chain, cfg.n + 2, 0.0, r1), std::invalid_argument);
}

TEST_CASE("pair estimators agree with the exact ladder") {
  ModelConfig cfg = make_config(2, 20.0, 5);
  ChainLevels chain = build_chain(cfg);
  const int k = 2;
  const double alpha = 0.3;
  PairEstimate est = sample_pair(chain, k, alpha, 40000, 7);

  const double cov = covariance_exact(chain, k);
  const double chg = charge_correlation_exact(chain, alpha, k);
  CHECK(std::abs(est.covariance.mean - cov) < 4.0 * est.covariance.se);
  CHECK(std::abs(est.charge_cos.mean - chg) < 4.0 * est.charge_cos.se);
  // the pair difference is symmetric, so the sine part is exactly centered
  CHECK(std::abs(est.charge_sin.mean) < 4.0 * est.charge_sin.se);
  CHECK(est.covariance.se > 0.0);
  CHECK(est.covariance.n_samples == 40000);
}

TEST_CASE("pair estimator is schedule-independent") {
  ModelConfig cfg = make_config(2, 20.0, 4);
  ChainLevels chain = build_chain(cfg);
  PairEstimate one = sample_pair(chain, 2, 0.2, 6000, 123, 1);
  PairEstimate three = sample_pair(chain, 2, 0.2, 6000, 123, 3);
  CHECK(one.covariance.mean == three.covariance.mean);
  CHECK(one.covariance.se == three.covariance.se);
  CHECK(one.charge_cos.mean == three.charge_cos.mean);
  CHECK(one.charge_sin.mean == three.charge_sin.mean);
}

TEST_CASE("field snapshot: shape, integrality, determinism") {
  ModelConfig cfg = make_config(2, 18.0, 4);
  ChainLevels chain = build_chain(cfg);
  std::vector<double> f1 = sample_field(chain, 31);
  std::vector<double> f2 = sample_field(chain, 31);
  std::vector<double> f3 = sample_field(chain, 32);
  REQUIRE(f1.size() == chain.config.sites());
  CHECK(f1 == f2);
  CHECK(f1 != f3);
  for (double v : f1) CHECK(v == std::round(v));
}

TEST_CASE("spine draws reproduce the level-1 mod-1 marginal") {
  // independent descents from the root to level 1; the mod-1 histogram must
  // match the deterministic marginal rho[1]
  ModelConfig cfg = make_config(2, 30.0, 6);
  ChainLevels chain = build_chain(cfg);
  const int bins = 32;
  const long n_paths = 20000;
  std::vector<double> hist(bins, 0.0);
  for (long i = 0; i < n_paths; ++i) {
    double phi = 0.0;
    for (int level = cfg.n; level >= 1; --level) {
      KeyedRng rng(204, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(level));
      phi = sample_kernel(chain, level, phi, rng);
    }
    double z = phi - std::floor(phi);
    int bin = static_cast<int>(z * bins);
    if (bin == bins) bin = 0;
    hist[bin] += 1.0;
  }
  const int G = static_cast<int>(chain.rho[1].rho.size());
  std::vector<double> expect(bins, 0.0);
  for (int j = 0; j < G; ++j) expect[j * bins / G] += chain.rho[1].rho[j] / G;
  double chi2 = 0.0;
  for (int bidx = 0; bidx < bins; ++bidx) {
    const double e = expect[bidx] * n_paths;
    REQUIRE(e > 1.0);
    chi2 += (hist[bidx] - e) * (hist[bidx] - e) / e;
  }
  // 31 dof: mean 31, sd ~ 7.9; 80 is a ~6-sigma ceiling
  CHECK(chi2 < 80.0);
}

}  // TEST_SUITE
