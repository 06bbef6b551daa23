#include "alpertlab/error.hpp"
#include "alpertlab/polybasis.hpp"

#include "doctest.h"

#include <cmath>

using namespace alpertlab;

TEST_CASE("multi-index enumeration") {
  const auto a1 = multi_indices(1, 3);
  REQUIRE(a1.size() == 3);
  for (int k = 0; k < 3; ++k)
    CHECK(a1[k].alpha[0] == k);

  const auto a2 = multi_indices(2, 2);
  REQUIRE(a2.size() == 3);
  CHECK(a2[0] == MultiIndex{{0, 0, 0}});
  CHECK(a2[1] == MultiIndex{{1, 0, 0}});
  CHECK(a2[2] == MultiIndex{{0, 1, 0}});

  CHECK(poly_space_dim(3, 2) == 4);
  CHECK(poly_space_dim(2, 3) == 6);
  CHECK(poly_space_dim(3, 6) == 56);
  for (int n = 1; n <= 3; ++n)
    for (int k = 1; k <= 6; ++k)
      CHECK(static_cast<int>(multi_indices(n, k).size()) == poly_space_dim(n, k));
}

TEST_CASE("exact box moments") {
  const Box unit1{1, {0, 0, 0}, {1, 0, 0}};
  const Box unit3{3, {0, 0, 0}, {1, 1, 1}};
  CHECK(box_monomial_moment(MultiIndex{}, unit3, Point{}) == doctest::Approx(1.0));
  CHECK(box_monomial_moment(MultiIndex{{1, 0, 0}}, unit1) == doctest::Approx(0.0));
  // Symbolic: int_0^1 (x - 1/2)^2 dx = 1/12.
  CHECK(box_monomial_moment(MultiIndex{{2, 0, 0}}, unit1) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  // int_0^2 int_1^3 x^2 y dy dx about the origin = (8/3) * 4.
  const Box b{2, {0, 1, 0}, {2, 3, 0}};
  CHECK(box_monomial_moment(MultiIndex{{2, 1, 0}}, b, Point{}) == doctest::Approx(32.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("orthonormal polynomial bases") {
  const Box unit{1, {0, 0, 0}, {1, 0, 0}};
  const auto b1 = orthonormal_poly_basis(unit, 1);
  REQUIRE(b1.size() == 1);
  CHECK(std::abs(b1[0]({0.3, 0, 0})) == doctest::Approx(1.0));

  // Gram-Schmidt on {1, x}: {1, sqrt(12)(x - 1/2)}.
  const auto b2 = orthonormal_poly_basis(unit, 2);
  REQUIRE(b2.size() == 2);
  for (double x : {0.0, 0.2, 0.9})
    CHECK(std::abs(b2[1]({x, 0, 0})) == doctest::Approx(std::abs(std::sqrt(12.0) * (x - 0.5))).epsilon(1e-12));

  for (int n = 1; n <= 3; ++n)
    for (int k = 1; k <= 6; ++k) {
      Box box{n, {}, {}};
      for (int i = 0; i < n; ++i) {
        box.lo[i] = 0.25 * i;
        box.hi[i] = box.lo[i] + 0.5;
      }
      const auto basis = orthonormal_poly_basis(box, k);
      REQUIRE(static_cast<int>(basis.size()) == poly_space_dim(n, k));
      double worst = 0.0;
      for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j) {
          const double g = exact_inner(basis[i], basis[j], box);
          worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
      CAPTURE(n);
      CAPTURE(k);
      CHECK(worst <= 1e-10);
    }
}

TEST_CASE("recentring keeps the polynomial") {
  const Box box{2, {0, 0, 0}, {1, 1, 0}};
  const auto basis = orthonormal_poly_basis(box, 4);
  const PolynomialRep moved = basis.back().recentred({0.9, -0.3, 0});
  for (const Point x : {Point{0.1, 0.2, 0}, Point{0.7, 0.95, 0}})
    CHECK(moved(x) == doctest::Approx(basis.back()(x)).epsilon(1e-12));
}

TEST_CASE("Gauss-Legendre rules") {
  const Box unit{1, {0, 0, 0}, {1, 0, 0}};
  const QuadratureRule r1 = gauss_rule(1, unit);
  REQUIRE(r1.nodes.size() == 1);
  CHECK(r1.nodes[0][0] == doctest::Approx(0.5));
  CHECK(r1.weights[0] == doctest::Approx(1.0));

  const Box box{2, {0, -1, 0}, {2, 1, 0}};
  CHECK(integrate([](const Point &) { return 1.0; }, box, 3) == doctest::Approx(4.0));

  // A g-point rule is exact through degree 2g - 1.
  for (int g = 1; g <= 10; ++g) {
    const int deg = 2 * g - 1;
    const double got = integrate([&](const Point &x) { return std::pow(x[0], deg); }, unit, g);
    CHECK(got == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-13));
  }

  const double e = integrate([](const Point &x) { return std::exp(x[0]); }, unit, 8);
  CHECK(std::abs(e - (std::exp(1.0) - 1.0)) <= 1e-12);

  const auto &gl = gauss_legendre(5);
  double sum = 0.0;
  for (double w : gl.weights)
    sum += w;
  CHECK(sum == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("non-finite integrands are reported") {
  const Box unit{1, {0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(integrate([](const Point &) { return std::nan(""); }, unit, 2), EvaluationError);
}
