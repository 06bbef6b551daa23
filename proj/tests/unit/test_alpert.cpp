#include "alpertlab/alpert.hpp"
#include "alpertlab/error.hpp"

#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>

using namespace alpertlab;

namespace {

std::vector<double> all_wavelets(const WaveletFamily &fam, const DyadicCube &q, const Point &x) {
  std::vector<double> v(fam.wavelet_count());
  fam.eval_wavelets(q, x, v);
  return v;
}

double inner_on(const PiecewisePolynomial &a, const PiecewisePolynomial &b, int g) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.pieces.size(); ++c)
    s += integrate([&](const Point &x) { return a.pieces[c](x) * b.pieces[c](x); }, a.pieces[c].reference, g);
  return s;
}

} // namespace

TEST_CASE("Haar wavelet and its sign convention") {
  const WaveletFamily fam(1, 1);
  REQUIRE(fam.wavelet_count() == 1);
  const DyadicCube r = DyadicCube::root(1);
  const double left = all_wavelets(fam, r, {0.25, 0, 0})[0];
  const double right = all_wavelets(fam, r, {0.75, 0, 0})[0];
  CHECK(left == doctest::Approx(1.0));
  CHECK(right == doctest::Approx(-1.0));
  CHECK(all_wavelets(fam, r, {1.0, 0, 0})[0] == 0.0);
  CHECK(all_wavelets(fam, r, {-0.1, 0, 0})[0] == 0.0);

  // <x, h> = int_0^1/2 x - int_1/2^1 x = -1/4 with h = +1 on the left half.
  const auto c = analysis([](const Point &x) { return x[0]; }, r, 1);
  CHECK(c[0] == doctest::Approx(-0.25).epsilon(1e-14));

  // Transport: h_Q = |Q|^{-1/2} h(local).
  const DyadicCube q = DyadicCube::make(1, 3, {5, 0, 0});
  CHECK(all_wavelets(fam, q, {q.lower(0) + 0.1 * q.side(), 0, 0})[0] ==
        doctest::Approx(1.0 / std::sqrt(q.volume())));
}

TEST_CASE("counts") {
  CHECK(WaveletFamily(1, 2).wavelet_count() == 2);
  CHECK(WaveletFamily(2, 1).wavelet_count() == 3);
  CHECK(WaveletFamily(2, 3).wavelet_count() == 18);
  CHECK(WaveletFamily(3, 2).wavelet_count() == 28);
  CHECK_THROWS_AS(build_alpert(DyadicCube::root(1), 7), ConditioningError);
}

TEST_CASE("piecewise linear wavelets span the dense Gram-Schmidt complement") {
  // Independent oracle: midpoint samples at 2^-14 of {1_L, x 1_L, 1_R, x 1_R},
  // with {1, x} projected out by Gram-Schmidt, leave a 2-dimensional space.
  const int N = 1 << 14;
  const double h = 1.0 / N;
  std::vector<Eigen::VectorXd> cols;
  auto push = [&](auto f) {
    Eigen::VectorXd v(N);
    for (int i = 0; i < N; ++i)
      v[i] = f((i + 0.5) * h);
    cols.push_back(v);
  };
  push([](double) { return 1.0; });
  push([](double x) { return x; });
  push([](double x) { return x < 0.5 ? 1.0 : 0.0; });
  push([](double x) { return x < 0.5 ? x : 0.0; });
  std::vector<Eigen::VectorXd> q;
  for (auto v : cols) {
    for (const auto &u : q)
      v -= (u.dot(v) * h) * u;
    v /= std::sqrt(v.squaredNorm() * h);
    q.push_back(v);
  }
  const WaveletFamily fam(1, 2);
  REQUIRE(fam.wavelet_count() == 2);
  for (int a = 0; a < 2; ++a) {
    Eigen::VectorXd w(N);
    for (int i = 0; i < N; ++i)
      w[i] = all_wavelets(fam, DyadicCube::root(1), {(i + 0.5) * h, 0, 0})[a];
    // Orthogonal to {1, x}, and fully inside span(q[2], q[3]).
    CHECK(std::abs(q[0].dot(w) * h) <= 1e-8);
    CHECK(std::abs(q[1].dot(w) * h) <= 1e-8);
    const double c2 = q[2].dot(w) * h, c3 = q[3].dot(w) * h;
    CHECK(c2 * c2 + c3 * c3 == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("orthonormality and vanishing moments") {
  for (int n = 1; n <= 3; ++n)
    for (int k = 1; k <= (n == 3 ? 3 : 5); ++k) {
      const DyadicCube q = n == 1 ? DyadicCube::make(1, 2, {3, 0, 0}) : DyadicCube::make(n, 1, {1, 0, 1});
      const AlpertWaveletSet set = build_alpert(q, k);
      const ScalingBasis sc = build_scaling(q, k);
      double gram = 0.0, moments = 0.0, cross = 0.0;
      for (std::size_t a = 0; a < set.wavelets.size(); ++a) {
        for (std::size_t b = 0; b < set.wavelets.size(); ++b)
          gram = std::max(gram, std::abs(inner_on(set.wavelets[a], set.wavelets[b], k + 1) - (a == b ? 1.0 : 0.0)));
        for (const MultiIndex &alpha : multi_indices(n, k)) {
          double s = 0.0;
          for (const auto &p : set.wavelets[a].pieces)
            s += integrate(
                [&](const Point &x) {
                  double m = p(x);
                  for (int i = 0; i < n; ++i)
                    m *= std::pow(x[i], alpha.alpha[i]);
                  return m;
                },
                p.reference, k + 2);
          moments = std::max(moments, std::abs(s));
        }
        for (const auto &s : sc.polys) {
          double v = 0.0;
          for (const auto &p : set.wavelets[a].pieces)
            v += integrate([&](const Point &x) { return p(x) * s(x); }, p.reference, k + 1);
          cross = std::max(cross, std::abs(v));
        }
      }
      CAPTURE(n);
      CAPTURE(k);
      CHECK(gram <= 1e-10);
      CHECK(moments <= 1e-10);
      CHECK(cross <= 1e-10);
    }
}

TEST_CASE("two-scale matrix is orthogonal") {
  for (int n = 1; n <= 3; ++n) {
    const WaveletFamily fam(n, 3);
    const Eigen::MatrixXd &t = fam.two_scale();
    CHECK(t.rows() == t.cols());
    CHECK((t.transpose() * t - Eigen::MatrixXd::Identity(t.rows(), t.cols())).norm() <= 1e-12);
  }
}

TEST_CASE("analysis") {
  const DyadicCube q = DyadicCube::make(2, 1, {0, 1, 0});
  const auto ones = analysis([](const Point &) { return 1.0; }, q, 2);
  for (double c : ones)
    CHECK(std::abs(c) <= 1e-13);

  const auto fam = wavelet_family(2, 2);
  for (int a = 0; a < fam->wavelet_count(); ++a) {
    const auto c = analysis(
        [&](const Point &x) {
          std::vector<double> v(fam->wavelet_count());
          fam->eval_wavelets(q, x, v);
          return v[a];
        },
        q, 2);
    for (int b = 0; b < fam->wavelet_count(); ++b)
      CHECK(c[b] == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
  }

  // Global polynomials of degree < kappa have no detail.
  const PiecewisePolynomial d =
      project_delta([](const Point &x) { return 3.0 - x[0] + 2.0 * x[0] * x[1]; }, q, 3);
  for (const Point x : {Point{0.1, 0.6, 0}, Point{0.4, 0.9, 0}})
    CHECK(std::abs(d(x)) <= 1e-12);
}

TEST_CASE("expand and synthesize") {
  // A piecewise quadratic on level-3 cells is reproduced exactly.
  auto f = [](const Point &x) {
    const int cell = static_cast<int>(std::floor(x[0] * 8.0));
    if (x[0] < 0.0 || x[0] >= 1.0)
      return 0.0;
    return (cell % 3) - 0.5 * cell * x[0] + x[0] * x[0];
  };
  const TruncatedExpansion c = expand(f, {1, 3}, 3);
  const Function g = synthesize(c);
  double err = 0.0, norm = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Point x{(i + 0.5) / 1000.0, 0, 0};
    err += std::pow(g(x) - f(x), 2);
    norm += f(x) * f(x);
    CHECK(evaluate_expansion(c, x) == doctest::Approx(g(x)).epsilon(1e-12));
  }
  CHECK(std::sqrt(err / norm) <= 1e-10);

  // The root scaling function lands in the scaling block only.
  const auto fam = wavelet_family(2, 2);
  const DyadicCube r = DyadicCube::root(2);
  const TruncatedExpansion s = expand([&](const Point &x) { return fam->scaling_polynomial(r, 1)(x) * (r.contains(x) ? 1.0 : 0.0); },
                                      {2, 2}, 2);
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(s.values()[i] == doctest::Approx(i == 1 ? 1.0 : 0.0).epsilon(1e-12));

  // Zero coefficients give zero; one unit coefficient gives that wavelet.
  TruncatedExpansion z(2, 2, 2);
  CHECK(evaluate_expansion(z, {0.3, 0.4, 0}) == 0.0);
  const DyadicCube q = DyadicCube::make(2, 1, {1, 1, 0});
  z.block(q)[4] = 1.0;
  std::vector<double> v(fam->wavelet_count());
  for (const Point x : {Point{0.6, 0.7, 0}, Point{0.9, 0.55, 0}, Point{0.2, 0.2, 0}}) {
    fam->eval_wavelets(q, x, v);
    CHECK(evaluate_expansion(z, x) == doctest::Approx(v[4]).epsilon(1e-12));
  }
}

TEST_CASE("cell transforms invert each other") {
  const CellField cells = project_cells([](const Point &x) { return std::sin(7.0 * x[0]) * std::cos(3.0 * x[1]); }, 2, 3, 3);
  const TruncatedExpansion c = analyse_cells(cells);
  const CellField back = synthesize_cells(c);
  double worst = 0.0;
  for (std::size_t i = 0; i < cells.values().size(); ++i)
    worst = std::max(worst, std::abs(cells.values()[i] - back.values()[i]));
  CHECK(worst <= 1e-12);
  // Parseval for the orthonormal transform.
  double a = 0.0, b = 0.0;
  for (double v : cells.values())
    a += v * v;
  for (double v : c.values())
    b += v * v;
  CHECK(std::sqrt(b) == doctest::Approx(std::sqrt(a)).epsilon(1e-12));
  CHECK(c.norm() == doctest::Approx(std::sqrt(a)).epsilon(1e-12));
}

TEST_CASE("coefficient layout") {
  TruncatedExpansion c(2, 2, 3);
  CHECK(c.poly_dim() == 3);
  CHECK(c.block_size() == 9);
  CHECK(c.block_count() == 21);
  CHECK(c.size() == 3 + 21 * 9);
  CHECK(c.offset(DyadicCube::root(2)) == 3);
  CHECK_THROWS_AS(c.block(DyadicCube::make(2, 3, {0, 0, 0})), StructureError);
}
