#include "alpertlab/ball_quadrature.hpp"

#include "doctest.h"

#include <cmath>
#include <functional>

using namespace alpertlab;

namespace {

double integrate_ball(int n, const Point &c, double r, const Box &b, const std::function<double(const Point &)> &f,
                      BallRuleOrders orders = {}) {
  std::vector<BallNode> nodes;
  ball_box_rule(n, c, r, b, orders, nodes);
  double s = 0.0;
  for (const auto &node : nodes)
    s += node.w * f(node.y);
  return s;
}

const auto one = [](const Point &) { return 1.0; };

} // namespace

TEST_CASE("ball inside the box") {
  const Box big1{1, {-5, 0, 0}, {5, 0, 0}};
  CHECK(integrate_ball(1, {0.2, 0, 0}, 0.3, big1, one) == doctest::Approx(0.6).epsilon(1e-14));
  const Box big2{2, {-5, -5, 0}, {5, 5, 0}};
  CHECK(integrate_ball(2, {0.1, 0.2, 0}, 0.5, big2, one) == doctest::Approx(M_PI * 0.25).epsilon(1e-13));
  // int over the disc of x^2 = pi r^4 / 4
  CHECK(integrate_ball(2, {0, 0, 0}, 0.5, big2, [](const Point &y) { return y[0] * y[0]; }) ==
        doctest::Approx(M_PI * std::pow(0.5, 4) / 4.0).epsilon(1e-13));
  const Box big3{3, {-5, -5, -5}, {5, 5, 5}};
  CHECK(integrate_ball(3, {0, 0, 0}, 0.5, big3, one) == doctest::Approx(4.0 / 3.0 * M_PI * 0.125).epsilon(1e-12));
}

TEST_CASE("clipped balls") {
  // Quarter disc at a corner.
  const Box q{2, {0, 0, 0}, {1, 1, 0}};
  CHECK(integrate_ball(2, {0, 0, 0}, 0.5, q, one) == doctest::Approx(M_PI * 0.25 / 4.0).epsilon(1e-13));
  // Disc cut by a line at distance t: r^2 acos(t/r) - t sqrt(r^2 - t^2) removed.
  const double r = 0.4, t = 0.15;
  const Box half{2, {0, -5, 0}, {5, 5, 0}};
  const double seg = r * r * std::acos(t / r) - t * std::sqrt(r * r - t * t);
  CHECK(integrate_ball(2, {t, 0.3, 0}, r, half, one) == doctest::Approx(M_PI * r * r - seg).epsilon(1e-12));
  // Octant of a ball.
  const Box oct{3, {0, 0, 0}, {1, 1, 1}};
  CHECK(integrate_ball(3, {0, 0, 0}, 0.3, oct, one) == doctest::Approx(4.0 / 3.0 * M_PI * 0.027 / 8.0).epsilon(1e-11));
  // Box strictly inside the ball: the box volume.
  const Box small{2, {0.1, 0.1, 0}, {0.2, 0.3, 0}};
  CHECK(integrate_ball(2, {0.15, 0.2, 0}, 1.0, small, one) == doctest::Approx(0.02).epsilon(1e-13));
  // Disjoint.
  CHECK(integrate_ball(2, {3, 3, 0}, 0.5, q, one) == 0.0);
}

TEST_CASE("smooth weight over a clipped ball against a fine oracle") {
  // (1 - |y - c|^2 / r^2)^3 y_0 over ball cap box, against a dense midpoint sum.
  const Point c{0.45, 0.52, 0};
  const double r = 0.2;
  const Box b{2, {0.5, 0.5, 0}, {1, 1, 0}};
  auto f = [&](const Point &y) {
    const double s = 1.0 - (std::pow(y[0] - c[0], 2) + std::pow(y[1] - c[1], 2)) / (r * r);
    return s > 0 ? s * s * s * y[0] : 0.0;
  };
  const int N = 2000;
  double oracle = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const Point y{0.5 + 0.25 * (i + 0.5) / N, 0.5 + 0.25 * (j + 0.5) / N, 0};
      oracle += f(y);
    }
  oracle *= 0.0625 / (static_cast<double>(N) * N);
  CHECK(integrate_ball(2, c, r, b, f, {10, 28}) == doctest::Approx(oracle).epsilon(1e-6));
}
