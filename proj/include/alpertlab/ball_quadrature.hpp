#pragma once

// Cubature over the intersection of a Euclidean ball with an axis-aligned box.
//
// The last axis is integrated with Gauss-Legendre on the exact clipped chord.
// Every other axis is integrated in the angle theta with t = c + R sin(theta),
// which turns the square-root endpoint singularity of the chord length into a
// smooth trigonometric integrand. The theta range is split wherever a chord of
// the lower-dimensional slice starts or stops touching a face, edge or corner
// of the box, so each segment is smooth.

#include "alpertlab/dyadic.hpp"

#include <vector>

namespace alpertlab {

struct BallNode {
  Point y;
  double w;
};

struct BallRuleOrders {
  int chord = 8;   // Gauss points on the innermost clipped chord
  int angular = 12; // Gauss points per theta segment on outer axes
};

/// Appends nodes for integrating over B(centre, radius) cap box to `out`.
void ball_box_rule(int dim, const Point &centre, double radius, const Box &box, const BallRuleOrders &orders,
                   std::vector<BallNode> &out);

} // namespace alpertlab
