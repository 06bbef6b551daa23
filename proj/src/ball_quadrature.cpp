#include "alpertlab/ball_quadrature.hpp"

#include "alpertlab/polybasis.hpp"

#include <algorithm>
#include <cmath>

namespace alpertlab {

namespace {

struct Recursion {
  int dim;
  const Point &centre;
  const Box &box;
  const BallRuleOrders &orders;
  std::vector<BallNode> &out;

  void run(int axis, double radius, Point &y, double weight) const {
    const double c = centre[axis];
    const double lo = std::max(box.lo[axis], c - radius);
    const double hi = std::min(box.hi[axis], c + radius);
    if (!(lo < hi))
      return;
    if (axis == dim - 1) {
      const GaussLegendre &gl = gauss_legendre(orders.chord);
      const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        y[axis] = mid + half * gl.nodes[k];
        out.push_back({y, weight * half * gl.weights[k]});
      }
      return;
    }

    auto angle = [&](double t) { return std::asin(std::clamp((t - c) / radius, -1.0, 1.0)); };
    const double theta_lo = angle(lo), theta_hi = angle(hi);

    // Critical angles: the slice radius R cos(theta) equals the distance from
    // the projected centre to a face, edge or corner of the remaining box.
    std::vector<double> breaks{theta_lo, theta_hi};
    const int rest = dim - 1 - axis;
    int choices = 1;
    for (int r = 0; r < rest; ++r)
      choices *= 3;
    for (int code = 1; code < choices; ++code) {
      double d2 = 0.0;
      int rem = code;
      for (int r = 0; r < rest; ++r) {
        const int pick = rem % 3;
        rem /= 3;
        const int j = axis + 1 + r;
        if (pick == 1)
          d2 += (centre[j] - box.lo[j]) * (centre[j] - box.lo[j]);
        else if (pick == 2)
          d2 += (centre[j] - box.hi[j]) * (centre[j] - box.hi[j]);
      }
      const double d = std::sqrt(d2);
      if (d < radius) {
        const double t = std::acos(d / radius);
        for (double b : {t, -t})
          if (b > theta_lo && b < theta_hi)
            breaks.push_back(b);
      }
    }
    std::sort(breaks.begin(), breaks.end());

    const GaussLegendre &gl = gauss_legendre(orders.angular);
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
      const double a = breaks[s], b = breaks[s + 1];
      if (!(b - a > 1e-15))
        continue;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double theta = mid + half * gl.nodes[k];
        const double rho = radius * std::cos(theta);
        y[axis] = c + radius * std::sin(theta);
        run(axis + 1, rho, y, weight * half * gl.weights[k] * rho);
      }
    }
  }
};

} // namespace

void ball_box_rule(int dim, const Point &centre, double radius, const Box &box, const BallRuleOrders &orders,
                   std::vector<BallNode> &out) {
  if (!(radius > 0.0))
    return;
  Point y{};
  Recursion rec{dim, centre, box, orders, out};
  rec.run(0, radius, y, 1.0);
}

} // namespace alpertlab
