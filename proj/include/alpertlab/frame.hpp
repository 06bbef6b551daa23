#pragma once

// The frame operator S_eta on a truncated grid, in the coordinates of the plain
// truncated basis: M[(Q,b),(I,a)] = <h_I^{eta,a}, h_Q^b>, plus the root scaling
// block treated as one more (unsplit) family.

#include "alpertlab/alpert.hpp"
#include "alpertlab/smooth_wavelet.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace alpertlab {

struct SparsityStats {
  std::size_t block_pairs = 0;    // (row group, column group) pairs considered
  std::size_t pruned_pairs = 0;   // pairs known to vanish exactly
  std::size_t stored_entries = 0; // nonzeros kept in the sparse matrix
  double density = 0.0;           // stored / size^2
};

/// One coordinate group: the root scaling block or the wavelet block of a cube.
struct CoordGroup {
  bool scaling = false;
  DyadicCube cube;
  std::size_t offset = 0;
  int size = 0;
};

class FrameMatrix {
public:
  FrameMatrix() = default;

  int dim() const { return dim_; }
  int kappa() const { return kappa_; }
  int depth() const { return depth_; }
  double eta() const { return eta_; }
  bool renormalized() const { return renormalized_; }
  const SmoothOptions &options() const { return options_; }
  std::size_t size() const { return size_; }
  const SparsityStats &stats() const { return stats_; }
  const std::vector<CoordGroup> &groups() const { return groups_; }
  /// Surviving (row group, column group) pairs, sorted.
  const std::vector<std::pair<std::size_t, std::size_t>> &pattern() const { return pattern_; }

  /// y = M x
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y = M^tr x
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;
  double entry(std::size_t row, std::size_t col) const;
  Eigen::MatrixXd dense() const;
  /// Identity of the given coordinate layout.
  static FrameMatrix identity(int dim, int kappa, int depth);

  friend FrameMatrix assemble(const GridTruncation &, double, int, const SmoothOptions &);

private:
  int dim_ = 1, kappa_ = 1, depth_ = 0;
  double eta_ = 0.0;
  bool renormalized_ = false;
  SmoothOptions options_;
  std::size_t size_ = 0;
  std::vector<CoordGroup> groups_;
  std::vector<std::pair<std::size_t, std::size_t>> pattern_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
  SparsityStats stats_;

  static std::vector<CoordGroup> layout(int dim, int kappa, int depth);
  void build_csr(const std::vector<std::map<std::size_t, double>> &rows);
};

/// Coordinate groups for a truncation: scaling block first, then cubes of
/// levels 0..L-1 in enumeration order.
std::vector<CoordGroup> coordinate_groups(int dim, int kappa, int depth);

/// Assembles M. Column groups are integrated over their halo once, and every
/// row function that is nonzero at a halo node receives its contribution.
FrameMatrix assemble(const GridTruncation &trunc, double eta, int kappa, const SmoothOptions &options = {});

struct DeviationReport {
  double value = 0.0; // estimate of ||I - M||_2
  int iterations = 0;
  bool converged = false;
};

/// Power iteration on (I - M)(I - M)^tr, or on (I - M)^tr (I - M) when
/// `transpose` is set (the deviation of M^tr). Runs at least `min_iter`
/// iterations and continues until the estimate settles to `rel_tol`.
DeviationReport deviation(const FrameMatrix &m, bool transpose = false, int min_iter = 50, int max_iter = 5000,
                          double rel_tol = 1e-13);

struct NeumannResult {
  std::vector<double> coeffs;
  int iterations = 0;
  std::vector<double> residual_history; // ||g - M c_k||_2 / ||g||_2
};

/// c_{k+1} = c_k + (g - M c_k) until ||g - M c|| <= tol ||g||.
/// Throws DivergenceError (with the residual history) after max_iter steps or
/// if the residual blows up.
NeumannResult neumann_solve(const FrameMatrix &m, std::span<const double> g, double tol = 1e-10,
                            int max_iter = 10000);

/// Dense LU solve, for cross-checking.
std::vector<double> dense_solve(const FrameMatrix &m, std::span<const double> g);

/// Pointwise evaluator of sum_j c_j s_j^eta + sum_{I,a} c_{I,a} h_I^{eta,a}.
class SmoothSynthesis {
public:
  SmoothSynthesis(const TruncatedExpansion &coeffs, double eta, const SmoothOptions &options = {});
  double operator()(const Point &x) const;
  /// Per-term squares summed: sum |c h^eta(x)|^2 over every coordinate.
  double square_sum(const Point &x) const;

private:
  template <class Visit> void visit_terms(const Point &x, Visit &&visit) const;
  TruncatedExpansion coeffs_;
  double eta_;
  std::shared_ptr<const SmoothFamily> scaling_, wavelets_;
};

/// A function together with the aligned composite rule used for its norms.
struct FunctionSample {
  Function f;
  int dim = 1;
  int level = 4;     // cells of side 2^{-level}
  int order = 7;     // Gauss points per axis per cell
  double margin = 0; // extra width outside the root to include
};

/// (int |f|^p)^{1/p} by composite Gauss on the aligned grid.
double lp_norm(const FunctionSample &sample, double p);

enum class SquareVariant { plain, halo, smooth };

/// Pointwise square functions of an expansion:
///  plain:  (sum over every coordinate of |c h(x)|^2)^{1/2}
///  halo:   (sum_I (|c_I| / |I|^{1/2} 1_{I cap H(I)}(x))^2)^{1/2}, halo width eta l(I)
///  smooth: (sum over every coordinate of |c h^eta(x)|^2)^{1/2}
double square_function(const TruncatedExpansion &coeffs, const Point &x, SquareVariant variant, double eta = 0.0,
                       const SmoothOptions &options = {});

/// |I cap H(I)| / |I| for halo width eta l(I): each axis loses the points
/// within eta of {0, 1/2, 1}, so the fraction is 1 - (1 - min(1, 4 eta))^n.
double halo_fraction(int dim, double eta);

/// ||R_eta f||_2 for the halo square function, in closed form:
/// (sum_I ||c_I||^2 |I cap H(I)| / |I|)^{1/2}.
double halo_square_l2(const TruncatedExpansion &coeffs, double eta);

struct ReproduceReport {
  double residual_l2 = 0.0;                 // ||synth(M c) - f||_2 / ||f||_2
  std::map<double, double> residual_lp;     // same in L^p, per p
  double unprojected_l2 = 0.0;              // ||sum c h^eta - f||_2 / ||f||_2
  int iterations = 0;
  double deviation = 0.0;
};

/// Solves M c = expand(f) and measures how well sum c_I h_I^eta reproduces f.
/// Residuals are taken in the truncated span (what the solver controls); the
/// unprojected residual is reported for information.
ReproduceReport reproduce(const Function &f, const FrameMatrix &m, double tol, std::span<const double> p_list,
                          int max_iter = 10000);

struct RatioRow {
  std::string function;
  double p = 2.0;
  double ratio = 0.0;
};

struct RatioTable {
  std::vector<RatioRow> rows;
  double r_min = 0.0;
  double r_max = 0.0;
};

struct TestFunction;

/// r(f) = ||(sum |Delta^eta f|^2)^{1/2}||_p / ||f||_p with Delta^eta_{I,a} f =
/// <S^{-1} f, h_I^a> h_I^{eta,a}, for each test function and p.
RatioTable frame_ratio_experiment(const std::vector<TestFunction> &tests, std::span<const double> p_list,
                                  const FrameMatrix &m, double tol = 1e-10);

struct EtaSweepConfig {
  std::vector<int> betas; // eta = 2^{-beta}
  std::vector<double> p_list;

  std::vector<double> etas() const;
};

} // namespace alpertlab
