#pragma once

// Moment-corrected polynomial bump
//   phi(x) = (1 - |x|^2)_+^m p(x),
// with p a polynomial of degree < kappa built from even-total-degree
// monomials, chosen so that int phi = 1 and int phi(y) y^gamma dy = 0 for
// 0 < |gamma| < kappa.

#include "alpertlab/dyadic.hpp"
#include "alpertlab/polybasis.hpp"

#include <vector>

namespace alpertlab {

struct MollifierSpec {
  int dim = 1;
  int kappa = 1;
  int smoothness = 1; // the exponent m; phi is C^{m-1}
  std::vector<MultiIndex> terms;
  std::vector<double> coeffs;
  /// max |moment residual| over 0 <= |gamma| < kappa, from exact closed forms
  double moment_residual = 0.0;
  bool normalization_verified = false;

  /// phi(y), supported in the closed unit ball.
  double operator()(const Point &y) const;
};

/// Closed-form integral over the unit ball of (1 - |y|^2)^m y^alpha.
double bump_moment(int dim, int m, const MultiIndex &alpha);

/// Default smoothness exponent m = kappa + 4.
int default_smoothness(int kappa);

/// Solves the even-monomial moment system. Requires kappa >= 1, m >= 1.
MollifierSpec build_mollifier(int dim, int kappa, int m);

/// phi_delta(x) = delta^{-n} phi(x / delta).
double eval(const MollifierSpec &spec, double delta, const Point &x);

/// Exact int phi(y) y^gamma dy.
double moment(const MollifierSpec &spec, const MultiIndex &gamma);

} // namespace alpertlab
