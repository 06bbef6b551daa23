#include "alpertlab/test_functions.hpp"

#include <cmath>
#include <memory>

namespace alpertlab {

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

TruncatedExpansion random_expansion(int dim, int kappa, int depth, std::uint64_t seed) {
  TruncatedExpansion c(dim, kappa, depth);
  SplitMix64 rng(seed);
  for (double &v : c.scaling())
    v = rng.uniform(-1.0, 1.0);
  for (int k = 0; k < depth; ++k)
    for (const DyadicCube &q : level_cubes(dim, k))
      for (double &v : c.block(q))
        v = std::ldexp(rng.uniform(-1.0, 1.0), -k);
  return c;
}

namespace {

bool in_root(const Point &x, int dim) {
  for (int i = 0; i < dim; ++i)
    if (x[i] < 0.0 || x[i] >= 1.0)
      return false;
  return true;
}

} // namespace

std::vector<TestFunction> standard_test_set(int dim, int kappa, int depth, std::uint64_t seed) {
  std::vector<TestFunction> out;
  out.push_back({"random_expansion", synthesize(random_expansion(dim, kappa, depth, seed)), true});

  out.push_back({"ball_indicator",
                 [dim](const Point &x) {
                   if (!in_root(x, dim))
                     return 0.0;
                   double r2 = 0.0;
                   for (int i = 0; i < dim; ++i)
                     r2 += (x[i] - 0.37) * (x[i] - 0.37);
                   return r2 < 0.09 ? 1.0 : 0.0;
                 },
                 false});

  out.push_back({"gaussian_bump",
                 [dim](const Point &x) {
                   if (!in_root(x, dim))
                     return 0.0;
                   double r2 = 0.0;
                   for (int i = 0; i < dim; ++i)
                     r2 += (x[i] - 0.5) * (x[i] - 0.5);
                   return std::exp(-r2 / (2.0 * 0.1 * 0.1));
                 },
                 false});

  const int level = depth > 1 ? 1 : 0;
  const DyadicCube q = level_cubes(dim, level).front();
  auto fam = wavelet_family(dim, kappa);
  out.push_back({"alpert_wavelet",
                 [fam, q](const Point &x) {
                   std::array<double, kMaxFunctions> v{};
                   fam->eval_wavelets(q, x, std::span<double>(v.data(), fam->wavelet_count()));
                   return v[0];
                 },
                 depth > 0});
  return out;
}

} // namespace alpertlab
