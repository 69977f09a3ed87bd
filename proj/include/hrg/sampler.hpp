#pragma once

#include <cstdint>
#include <vector>

#include "hrg/chain.hpp"
#include "hrg/model.hpp"

namespace hrg {

// Counter-based stream (splitmix64 core) keyed by (seed, item, lane): the
// draw sequence for one key is independent of scheduling, so parallel
// estimates are bit-reproducible for a fixed config.
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::uint64_t item, std::uint64_t lane);

  std::uint64_t next_u64();
  double uniform();   // (0, 1)
  double normal();    // Box-Muller, two uniforms per call

 private:
  std::uint64_t state_;
};

struct EstimatorResult {
  double mean = 0.0;
  double se = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
};

// One top-down kernel draw: given phi_{level+1} = prev, sample phi_{level}.
// Levels >= 1 use rejection against the Gaussian proposal with the grid
// minimum of b*v_{level-1} as envelope offset; level 0 uses the exact site
// kernel (discrete Gaussian for DG, rejection under the bounded density for
// the continuous measures).
double sample_kernel(const ChainLevels& chain, int level, double prev,
                     KeyedRng& rng);

// Monte Carlo estimate of the pair observables at branch depth k: the product
// phi_x phi_y, and cos / sin of 2 pi alpha (phi_x - phi_y). Two conditionally
// independent descents below level k share the spine above it.
struct PairEstimate {
  EstimatorResult covariance;
  EstimatorResult charge_cos;
  EstimatorResult charge_sin;
};
PairEstimate sample_pair(const ChainLevels& chain, int k, double alpha,
                         long n_samples, std::uint64_t seed, int threads = 1);

// One full field snapshot: values at all b^n leaves in index order.
std::vector<double> sample_field(const ChainLevels& chain, std::uint64_t seed);

}  // namespace hrg
