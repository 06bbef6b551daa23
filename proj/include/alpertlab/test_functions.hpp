#pragma once

// Deterministic random numbers and the standard set of test functions.
//
// The generator is splitmix64:
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
// and a uniform double in [0,1) is (z >> 11) * 2^-53.

#include "alpertlab/alpert.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace alpertlab {

class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
  std::uint64_t state_;
};

struct TestFunction {
  std::string name;
  Function f;
  /// Exactly representable on the level-L truncation.
  bool in_span = false;
};

/// Random truncated expansion with coefficients uniform in [-1, 1] scaled by
/// 2^{-level} (the scaling block counts as level 0).
TruncatedExpansion random_expansion(int dim, int kappa, int depth, std::uint64_t seed);

/// random_expansion, ball indicator (radius 0.3 at (0.37, ...)), Gaussian
/// bump, and one Alpert wavelet.
std::vector<TestFunction> standard_test_set(int dim, int kappa, int depth, std::uint64_t seed);

} // namespace alpertlab
