#pragma once

// Order-kappa Alpert multiwavelets on dyadic cubes.
//
// Wavelets are built once on the root cube [0,1)^n and transported to any
// other cube Q by the affine map x -> (x - corner(Q)) / l(Q), scaled by
// |Q|^{-1/2}. A cube carries (2^n - 1) * d wavelets with d = C(n+kappa-1, n).

#include "alpertlab/dyadic.hpp"
#include "alpertlab/polybasis.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace alpertlab {

inline constexpr int kMaxKappa = 6;
/// Most wavelets a cube can carry: (2^3 - 1) * C(3 + 6 - 1, 3).
inline constexpr int kMaxFunctions = 7 * 84;

/// A family of functions that are polynomial on each piece of a partition of
/// the root cube. Pieces are the 2^n children (split) or the root itself.
struct PieceFamily {
  int dim = 1;
  int kappa = 1;
  int functions = 0;
  bool split = true;
  MonomialBasis basis;
  std::vector<Box> boxes;
  std::vector<Point> centres;
  /// coeffs[(piece * functions + f) * d + k]
  std::vector<double> coeffs;

  int piece_count() const { return static_cast<int>(boxes.size()); }
  int mono_count() const;
  /// Piece containing root-local u, or -1 outside [0,1)^n.
  int piece_of(const Point &u) const;
  /// All function values at root-local u (zero outside the root).
  void eval(const Point &u, std::span<double> out) const;
  /// Values of all functions on piece `p` at u (u need not lie in the piece).
  void eval_piece(int p, const Point &u, std::span<double> out) const;
};

/// A function given by one polynomial per child of a cube.
struct PiecewisePolynomial {
  DyadicCube cube;
  std::vector<PolynomialRep> pieces;

  double operator()(const Point &x) const;
};

/// Alpert wavelets and scaling basis of order kappa in dimension n.
class WaveletFamily {
public:
  WaveletFamily(int dim, int kappa);

  int dim() const { return dim_; }
  int kappa() const { return kappa_; }
  /// d = C(n + kappa - 1, n)
  int poly_dim() const { return d_; }
  /// (2^n - 1) * d
  int wavelet_count() const { return ((1 << dim_) - 1) * d_; }

  const PieceFamily &wavelets() const { return wavelets_; }
  const PieceFamily &scaling() const { return scaling_; }
  /// Orthogonal two-scale matrix: columns are the parent scaling functions and
  /// then the wavelets, in coordinates of the rescaled scaling bases of the
  /// children.
  const Eigen::MatrixXd &two_scale() const { return two_scale_; }

  /// h_Q^a(x) for all a; zero outside Q.
  void eval_wavelets(const DyadicCube &q, const Point &x, std::span<double> out) const;
  /// Orthonormal scaling polynomials of Q at x; zero outside Q.
  void eval_scaling(const DyadicCube &q, const Point &x, std::span<double> out) const;

  /// Explicit per-child polynomials of wavelet a on Q.
  PiecewisePolynomial wavelet(const DyadicCube &q, int a) const;
  /// Explicit scaling polynomial j on Q.
  PolynomialRep scaling_polynomial(const DyadicCube &q, int j) const;

private:
  int dim_;
  int kappa_;
  int d_;
  PieceFamily wavelets_;
  PieceFamily scaling_;
  Eigen::MatrixXd two_scale_;
};

/// Shared, lazily built families keyed by (n, kappa).
std::shared_ptr<const WaveletFamily> wavelet_family(int dim, int kappa);

struct AlpertWaveletSet {
  DyadicCube cube;
  int kappa = 1;
  std::vector<PiecewisePolynomial> wavelets;
};

struct ScalingBasis {
  DyadicCube cube;
  std::vector<PolynomialRep> polys;
};

/// Throws ConditioningError for kappa > 6.
AlpertWaveletSet build_alpert(const DyadicCube &q, int kappa);
ScalingBasis build_scaling(const DyadicCube &q, int kappa);

/// Single wavelet value (half-open membership on children, zero outside Q).
double wavelet_eval(const PiecewisePolynomial &w, const Point &x);

using Function = std::function<double(const Point &)>;

/// Default per-axis Gauss order kappa + 6.
int default_gauss_order(int kappa);

/// <f, h_Q^a> for every a, integrating child by child.
std::vector<double> analysis(const Function &f, const DyadicCube &q, int kappa, int g = 0);

/// Delta_{Q;kappa} f = sum_a <f, h^a> h^a.
PiecewisePolynomial project_delta(const Function &f, const DyadicCube &q, int kappa, int g = 0);

/// Coefficients of a function on a truncation of depth L: the root scaling
/// block plus one wavelet block per cube of levels 0..L-1.
class TruncatedExpansion {
public:
  TruncatedExpansion(int dim, int kappa, int depth);

  int dim() const { return dim_; }
  int kappa() const { return kappa_; }
  int depth() const { return depth_; }
  int poly_dim() const { return d_; }
  int block_size() const { return block_; }
  std::size_t block_count() const { return blocks_; }
  /// d + block_count * block_size
  std::size_t size() const { return values_.size(); }

  std::span<double> scaling() { return {values_.data(), static_cast<std::size_t>(d_)}; }
  std::span<const double> scaling() const { return {values_.data(), static_cast<std::size_t>(d_)}; }
  std::span<double> block(const DyadicCube &q);
  std::span<const double> block(const DyadicCube &q) const;
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Flat position of the first coefficient of Q's block.
  std::size_t offset(const DyadicCube &q) const;
  double norm() const;

private:
  int dim_, kappa_, depth_, d_, block_;
  std::size_t blocks_;
  std::vector<double> values_;
};

/// Piecewise polynomial of degree < kappa on the level-L cells, stored as
/// coefficients against the orthonormal scaling basis of each cell.
class CellField {
public:
  CellField(int dim, int kappa, int level);

  int dim() const { return dim_; }
  int kappa() const { return kappa_; }
  int level() const { return level_; }
  int poly_dim() const { return d_; }
  std::size_t cell_count() const { return cells_; }
  std::span<double> cell(std::size_t flat) { return {values_.data() + flat * d_, static_cast<std::size_t>(d_)}; }
  std::span<const double> cell(std::size_t flat) const {
    return {values_.data() + flat * d_, static_cast<std::size_t>(d_)};
  }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Pointwise value; zero outside the root.
  double operator()(const Point &x) const;

private:
  int dim_, kappa_, level_, d_;
  std::size_t cells_;
  std::vector<double> values_;
  std::shared_ptr<const WaveletFamily> family_;
};

/// L^2 projection of f onto the level-L cells (per-cell Gauss of order g).
CellField project_cells(const Function &f, int dim, int kappa, int level, int g = 0);

/// Fine-to-coarse two-scale transform.
TruncatedExpansion analyse_cells(const CellField &cells);
/// Coarse-to-fine inverse transform.
CellField synthesize_cells(const TruncatedExpansion &coeffs);

/// Coefficients whose synthesis is the L^2-best level-L piecewise polynomial
/// approximation of f.
TruncatedExpansion expand(const Function &f, const GridTruncation &trunc, int kappa, int g = 0);

/// Pointwise evaluator of a truncated expansion.
Function synthesize(const TruncatedExpansion &coeffs);

/// Direct evaluation sum_j c_j s_j(x) + sum_{Q,a} c_{Q,a} h_Q^a(x).
double evaluate_expansion(const TruncatedExpansion &coeffs, const Point &x);

} // namespace alpertlab
