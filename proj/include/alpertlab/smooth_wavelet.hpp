#pragma once

// Smoothed Alpert wavelets h^eta = h * phi_delta with delta = eta * l(Q).
//
// Everything is computed on the root cube and transported, since
// (h_Q * phi_{eta l(Q)})(x) = |Q|^{-1/2} (h_root * phi_eta)(u) with u the
// root-local image of x. Off the halo (distance >= eta from the break set) the
// smoothed function equals the plain one exactly, and that branch is taken
// without any quadrature.

#include "alpertlab/alpert.hpp"
#include "alpertlab/ball_quadrature.hpp"
#include "alpertlab/mollifier.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace alpertlab {

struct SmoothOptions {
  int smoothness = 0;       // mollifier exponent m; 0 selects kappa + 4
  bool renormalize = false; // scale every h^eta to unit L^2 norm
  int chord_order = 0;      // 0 selects m + kappa
  int angular_order = 0;    // 0 selects 2 * chord order + 8
  int halo_order = 0;       // per-axis Gauss order on halo tiles; 0 selects m + (3 kappa + 2) / 2

  friend bool operator==(const SmoothOptions &, const SmoothOptions &) = default;
};

/// Smoothed wavelets (or the root scaling functions) of one (n, kappa, eta),
/// evaluated in root-local coordinates.
class SmoothFamily {
public:
  /// `scaling` selects the unsplit scaling family, whose only break set is
  /// the boundary of the cube.
  SmoothFamily(int dim, int kappa, double eta, bool scaling, const SmoothOptions &options = {});

  int dim() const { return dim_; }
  int kappa() const { return kappa_; }
  double eta() const { return eta_; }
  bool is_scaling() const { return scaling_; }
  int functions() const { return pieces_->functions; }
  const MollifierSpec &mollifier() const { return mollifier_; }
  const PieceFamily &pieces() const { return *pieces_; }
  const SmoothOptions &options() const { return options_; }
  int halo_order() const { return halo_order_; }

  /// Distance from u to the break set (skeleton, or boundary for scaling).
  double break_distance(const Point &u) const;
  /// Plain values at root-local u.
  void plain(const Point &u, std::span<double> out) const;
  /// Raw smoothed values, using the exact branch off the halo.
  void smooth(const Point &u, std::span<double> out) const;
  /// Raw smoothed values by quadrature regardless of position.
  void smooth_quadrature(const Point &u, std::span<double> out) const;

  /// Raw L^2 norms of the smoothed functions (scale invariant). Computed once.
  std::span<const double> raw_norms() const;
  /// Factor applied on output: 1/raw_norm when renormalising, else 1.
  double output_scale(int a) const;

  /// Smallest tile level whose side is at most eta/2.
  int min_tile_level() const;

  /// Gauss nodes on the halo tiles of one tile level, with the raw smoothed
  /// minus plain values and the plain values (functions() entries per node).
  struct HaloNodes {
    std::vector<Point> u;
    std::vector<double> w;
    std::vector<double> diff;
    std::vector<double> plain;
  };
  /// Cached per tile level; tiles have side 2^{-tile_level} <= eta/2.
  std::shared_ptr<const HaloNodes> halo_nodes(int tile_level) const;

  using HaloVisitor =
      std::function<void(const Point &u, double w, std::span<const double> diff, std::span<const double> plain)>;
  /// Visits the halo nodes (root-local) lying in `window` when given. The
  /// window must be a union of tiles, which holds for any dyadic box no
  /// smaller than a tile. Nodes at distance >= eta from the break set carry
  /// no difference and are not stored.
  void for_each_halo_node(int tile_level, const Box *window, const HaloVisitor &visit) const;

private:
  std::shared_ptr<HaloNodes> build_halo_nodes(int tile_level, const Box *window) const;

  int dim_, kappa_;
  double eta_;
  bool scaling_;
  SmoothOptions options_;
  std::shared_ptr<const WaveletFamily> family_;
  const PieceFamily *pieces_;
  MollifierSpec mollifier_;
  BallRuleOrders ball_;
  int halo_order_;
  mutable std::once_flag norms_once_;
  mutable std::vector<double> norms_;
  mutable std::vector<double> scale_;
  mutable std::mutex halo_mutex_;
  mutable std::map<int, std::shared_ptr<const HaloNodes>> halo_cache_;
};

/// Shared families keyed by all parameters.
std::shared_ptr<const SmoothFamily> smooth_family(int dim, int kappa, double eta, bool scaling,
                                                  const SmoothOptions &options = {});

struct SmoothWavelet {
  DyadicCube cube;
  int index = 0;
  int kappa = 1;
  double eta = 0.0;
  /// delta = eta * l(Q)
  double radius = 0.0;
  std::shared_ptr<const SmoothFamily> family;

  const MollifierSpec &mollifier() const { return family->mollifier(); }
};

SmoothWavelet make_smooth_wavelet(const DyadicCube &q, int a, int kappa, double eta, const SmoothOptions &options = {});

/// h^eta(x).
double smooth_eval(const SmoothWavelet &sw, const Point &x);
/// h^eta(x) by quadrature even off the halo.
double smooth_eval_quadrature(const SmoothWavelet &sw, const Point &x);
/// Plain wavelet h(x).
double plain_eval(const SmoothWavelet &sw, const Point &x);

/// Distance from the closed box b to the break set of q (its skeleton when
/// split, its boundary otherwise).
double break_set_distance(const Box &b, const DyadicCube &q, bool split);

/// Exact-zero test for <h_col^eta, f_row>: either the row cube misses the
/// support of h_col^eta - h_col, or the delta-neighbourhood of the column cube
/// avoids the break set of the row function, so the row function is a single
/// polynomial (or zero) there and the vanishing moments kill the integral.
bool pair_vanishes(const DyadicCube &col, bool col_split, double delta, const DyadicCube &row, bool row_split);

/// Block of <h_{I}^{eta,a}, h_{Q}^{b}> with rows b and columns a. The plain
/// part contributes the identity when I = Q; the rest is integrated over the
/// halo of I. Pruned pairs return an exact zero block.
Eigen::MatrixXd smooth_inner_block(const SmoothFamily &family, const DyadicCube &i, const DyadicCube &q);

/// <h_{I;kappa}^{eta,a}, h_{Q;kappa}^b>.
double smooth_inner(const DyadicCube &i, int a, const DyadicCube &q, int b, double eta, int kappa,
                    const SmoothOptions &options = {});

/// int h^eta(x) x^beta dx.
double smooth_moment(const SmoothWavelet &sw, const MultiIndex &beta);

/// ||h^eta||_2 (before any renormalisation).
double smooth_norm(const SmoothWavelet &sw);

/// Estimate of sup |grad^m h^eta| for m in {0, 1}: the m = 0 case samples the
/// values, m = 1 uses central differences with step delta/64 along lines
/// crossing the break set plus exact polynomial gradients off the halo.
/// Requires m <= smoothness - 2.
double grad_sup_estimate(const SmoothWavelet &sw, int m, int samples = 64);

/// The same estimate for every function of a family at once, in root-local
/// units (multiply by l(Q)^{-m} |Q|^{-1/2} to transport).
std::vector<double> grad_sup_family(const SmoothFamily &family, int m, int samples = 64);

/// Central-difference gradient sup of the plain wavelet with step h, sampled
/// across the skeleton. Grows like 1/h at a jump.
double plain_grad_sup_estimate(const DyadicCube &q, int a, int kappa, double h);

} // namespace alpertlab
