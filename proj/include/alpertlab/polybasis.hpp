#pragma once

// Polynomials of total degree < kappa on boxes: exact moments, Gram-based
// orthonormal bases and tensor Gauss-Legendre quadrature.

#include "alpertlab/dyadic.hpp"

#include <functional>
#include <span>
#include <vector>

namespace alpertlab {

struct MultiIndex {
  std::array<int, kMaxDim> alpha{};

  int order() const { return alpha[0] + alpha[1] + alpha[2]; }
  friend bool operator==(const MultiIndex &, const MultiIndex &) = default;
};

/// All alpha with |alpha| < kappa: degree ascending, then lexicographically
/// descending, so (1,0) precedes (0,1).
std::vector<MultiIndex> multi_indices(int dim, int kappa);

/// d = C(n + kappa - 1, n).
int poly_space_dim(int dim, int kappa);

/// Monomials (x - c)^alpha, |alpha| < kappa, in multi_indices order.
class MonomialBasis {
public:
  MonomialBasis() : MonomialBasis(1, 1) {}
  MonomialBasis(int dim, int kappa);

  int dim() const { return dim_; }
  int kappa() const { return kappa_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const std::vector<MultiIndex> &indices() const { return indices_; }
  /// Position of alpha, or -1 when |alpha| >= kappa.
  int find(const MultiIndex &alpha) const;
  /// out[k] = (x - centre)^{alpha_k}.
  void evaluate(const Point &x, const Point &centre, std::span<double> out) const;

private:
  int dim_;
  int kappa_;
  std::vector<MultiIndex> indices_;
};

/// Exact integral over `box` of prod_i (x_i - c_i)^{alpha_i}.
double box_monomial_moment(const MultiIndex &alpha, const Box &box, const Point &centre);
/// Moment centred at the box centre.
double box_monomial_moment(const MultiIndex &alpha, const Box &box);

/// A polynomial of total degree < kappa over centred monomials.
struct PolynomialRep {
  int dim = 1;
  int kappa = 1;
  Point centre{};
  Box reference{};
  std::vector<double> coeffs;

  double operator()(const Point &x) const;
  /// Same polynomial expanded about another centre.
  PolynomialRep recentred(const Point &new_centre) const;
};

/// Exact L^2(box) inner product of two polynomials.
double exact_inner(const PolynomialRep &p, const PolynomialRep &q, const Box &box);

/// L^2(box)-orthonormal basis of polynomials of degree < kappa, obtained from
/// the Cholesky factor of the exact monomial Gram matrix.
std::vector<PolynomialRep> orthonormal_poly_basis(const Box &box, int kappa);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached g-point rule.
const GaussLegendre &gauss_legendre(int g);

struct QuadratureRule {
  int per_axis = 1;
  std::vector<Point> nodes;
  std::vector<double> weights;
};

/// Tensor rule with g^n nodes mapped onto `box`.
QuadratureRule gauss_rule(int g, const Box &box);

/// Sum_i w_i f(x_i); throws EvaluationError on a non-finite sample.
double integrate(const std::function<double(const Point &)> &f, const QuadratureRule &rule);
double integrate(const std::function<double(const Point &)> &f, const Box &box, int g);

} // namespace alpertlab
