#include "alpertlab/mollifier.hpp"

#include "doctest.h"

#include <cmath>
#include <functional>

using namespace alpertlab;

namespace {

// Composite Gauss over [-d, d]^n; fine cells so the kink at |x| = d is harmless.
double cube_integral(int n, double d, const std::function<double(const Point &)> &f) {
  const int cells = 64;
  double s = 0.0;
  std::array<int, 3> k{};
  const int total = static_cast<int>(std::pow(cells, n));
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    Box b{n, {}, {}};
    for (int i = 0; i < n; ++i) {
      k[i] = rem % cells;
      rem /= cells;
      b.lo[i] = -d + 2.0 * d * k[i] / cells;
      b.hi[i] = b.lo[i] + 2.0 * d / cells;
    }
    s += integrate(f, b, 8);
  }
  return s;
}

} // namespace

TEST_CASE("base cases") {
  const MollifierSpec a = build_mollifier(1, 1, 1);
  CHECK(a({0.5, 0, 0}) == doctest::Approx(0.75 * 0.75).epsilon(1e-14));
  CHECK(a({0.0, 0, 0}) == doctest::Approx(0.75).epsilon(1e-14));
  const MollifierSpec b = build_mollifier(1, 2, 1);
  for (double x : {0.0, 0.3, -0.8})
    CHECK(b({x, 0, 0}) == doctest::Approx(a({x, 0, 0})).epsilon(1e-14));
}

TEST_CASE("two by two moment system") {
  // Closed forms: int (1-x^2)^2 = 16/15, with x^2: 16/105, with x^4: 16/315.
  // a 16/15 + b 16/105 = 1 and a 16/105 + b 16/315 = 0 give
  // a = 105/64, b = -315/64.
  const MollifierSpec s = build_mollifier(1, 3, 2);
  const double a = 105.0 / 64.0, b = -315.0 / 64.0;
  for (double x : {0.0, 0.25, -0.6, 0.99}) {
    const double base = (1 - x * x) * (1 - x * x);
    CHECK(s({x, 0, 0}) == doctest::Approx(base * (a + b * x * x)).epsilon(1e-13));
  }
  CHECK(a == 1.640625);
  CHECK(b == -4.921875);
}

TEST_CASE("closed-form bump moments") {
  CHECK(bump_moment(1, 1, MultiIndex{{2, 0, 0}}) == doctest::Approx(4.0 / 15.0).epsilon(1e-15));
  CHECK(bump_moment(1, 1, MultiIndex{}) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(bump_moment(2, 0, MultiIndex{}) == doctest::Approx(M_PI).epsilon(1e-15));
  CHECK(bump_moment(3, 0, MultiIndex{}) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-15));
  CHECK(bump_moment(2, 3, MultiIndex{{1, 2, 0}}) == 0.0);
}

TEST_CASE("moments of the corrected bump") {
  for (int n = 1; n <= 3; ++n)
    for (int k = 1; k <= 6; ++k) {
      const MollifierSpec s = build_mollifier(n, k, default_smoothness(k));
      CAPTURE(n);
      CAPTURE(k);
      CHECK(s.moment_residual <= 1e-12);
      CHECK(s.normalization_verified);
      CHECK(moment(s, MultiIndex{}) == doctest::Approx(1.0).epsilon(1e-12));
      for (const MultiIndex &g : multi_indices(n, k))
        if (g.order() > 0)
          CHECK(std::abs(moment(s, g)) <= 1e-12);
      CHECK(moment(s, MultiIndex{{1, 0, 0}}) == 0.0);
    }
}

TEST_CASE("scaled mollifier by quadrature") {
  for (int n = 1; n <= 2; ++n) {
    const int k = 3;
    const MollifierSpec s = build_mollifier(n, k, default_smoothness(k));
    for (double d : {1.0, 0.5, 0.125}) {
      CHECK(cube_integral(n, d, [&](const Point &x) { return eval(s, d, x); }) ==
            doctest::Approx(1.0).epsilon(1e-10));
      for (const MultiIndex &g : multi_indices(n, k)) {
        if (g.order() == 0)
          continue;
        const double v = cube_integral(n, d, [&](const Point &x) {
          double m = eval(s, d, x);
          for (int i = 0; i < n; ++i)
            m *= std::pow(x[i], g.alpha[i]);
          return m;
        });
        CHECK(std::abs(v) <= 1e-10);
      }
      CHECK(eval(s, d, {d, 0, 0}) == 0.0);
      CHECK(eval(s, d, {0.8 * d, 0.8 * d, 0}) == (n == 1 ? eval(s, d, {0.8 * d, 0, 0}) : 0.0));
    }
  }
}

TEST_CASE("smoothness across the unit sphere") {
  // phi is C^{m-1}: the (m-1)-th differences just inside and just outside
  // x = 1 differ by O(h), so the gap shrinks tenfold with h.
  const int m = 4;
  const MollifierSpec s = build_mollifier(1, 2, m);
  auto diff = [&](double x, double h, int order) {
    double v = 0.0, binom = 1.0;
    for (int j = 0; j <= order; ++j) {
      v += ((order - j) % 2 ? -1.0 : 1.0) * binom * s({x + j * h, 0, 0});
      binom = binom * (order - j) / (j + 1);
    }
    return v / std::pow(h, order);
  };
  auto gap = [&](double h, int order) { return std::abs(diff(1.0 - order * h, h, order) - diff(1.0, h, order)); };
  CHECK(gap(1e-3, m - 1) <= 0.15 * gap(1e-2, m - 1));
  CHECK(gap(1e-4, m - 1) <= 0.15 * gap(1e-3, m - 1));
  // The m-th derivative does jump.
  CHECK(gap(1e-4, m) >= 0.5 * gap(1e-3, m));
  CHECK(gap(1e-4, m) > 1.0);
}
