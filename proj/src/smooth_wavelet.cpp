#include "alpertlab/smooth_wavelet.hpp"

#include "alpertlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace alpertlab {

namespace {

Point to_local(const DyadicCube &q, const Point &x) {
  Point u{};
  for (int i = 0; i < q.dim; ++i)
    u[i] = std::ldexp(x[i], q.level) - static_cast<double>(q.index[i]);
  return u;
}

Point from_local(const DyadicCube &q, const Point &u) {
  Point x{};
  for (int i = 0; i < q.dim; ++i)
    x[i] = std::ldexp(u[i] + static_cast<double>(q.index[i]), -q.level);
  return x;
}

Box local_box(const DyadicCube &frame, const Box &b) {
  Box out;
  out.dim = b.dim;
  for (int i = 0; i < b.dim; ++i) {
    out.lo[i] = std::ldexp(b.lo[i], frame.level) - static_cast<double>(frame.index[i]);
    out.hi[i] = std::ldexp(b.hi[i], frame.level) - static_cast<double>(frame.index[i]);
  }
  return out;
}

double gap(double alo, double ahi, double blo, double bhi) { return std::max({0.0, alo - bhi, blo - ahi}); }


} // namespace

SmoothFamily::SmoothFamily(int dim, int kappa, double eta, bool scaling, const SmoothOptions &options)
    : dim_(dim), kappa_(kappa), eta_(eta), scaling_(scaling), options_(options),
      family_(wavelet_family(dim, kappa)) {
  if (!(eta > 0.0 && eta < 1.0))
    throw Error("smoothing parameter eta must lie in (0, 1)");
  pieces_ = scaling ? &family_->scaling() : &family_->wavelets();
  const int m = options.smoothness > 0 ? options.smoothness : default_smoothness(kappa);
  mollifier_ = build_mollifier(dim, kappa, m);
  ball_.chord = options.chord_order > 0 ? options.chord_order : m + kappa;
  // The outer integrands are trigonometric of degree about 2(m + kappa); Gauss in
  // theta needs roughly that many points for moments at the 1e-13 level.
  ball_.angular = options.angular_order > 0 ? options.angular_order : 2 * ball_.chord + 8;
  halo_order_ = options.halo_order > 0 ? options.halo_order : m + (3 * kappa + 2) / 2;
}

double SmoothFamily::break_distance(const Point &u) const {
  const DyadicCube root = DyadicCube::root(dim_);
  return scaling_ ? boundary_distance(u, root) : skeleton_distance(u, root);
}

void SmoothFamily::plain(const Point &u, std::span<double> out) const { pieces_->eval(u, out); }

void SmoothFamily::smooth(const Point &u, std::span<double> out) const {
  if (break_distance(u) >= eta_)
    pieces_->eval(u, out);
  else
    smooth_quadrature(u, out);
}

void SmoothFamily::smooth_quadrature(const Point &u, std::span<double> out) const {
  const int nf = pieces_->functions;
  const int d = pieces_->mono_count();
  std::fill(out.begin(), out.begin() + nf, 0.0);
  thread_local std::vector<BallNode> nodes;
  std::array<double, 128> mono{}, mom{};
  const double norm = std::pow(eta_, -dim_);
  const double inv = 1.0 / eta_;
  for (int p = 0; p < pieces_->piece_count(); ++p) {
    const Box &box = pieces_->boxes[p];
    if (box.distance(u) >= eta_)
      continue;
    nodes.clear();
    ball_box_rule(dim_, u, eta_, box, ball_, nodes);
    std::fill(mom.begin(), mom.begin() + d, 0.0);
    for (const BallNode &node : nodes) {
      Point z{};
      for (int i = 0; i < dim_; ++i)
        z[i] = (u[i] - node.y[i]) * inv;
      const double k = node.w * norm * mollifier_(z);
      if (k == 0.0)
        continue;
      pieces_->basis.evaluate(node.y, pieces_->centres[p], std::span<double>(mono.data(), d));
      for (int j = 0; j < d; ++j)
        mom[j] += k * mono[j];
    }
    const double *c = pieces_->coeffs.data() + static_cast<std::size_t>(p) * nf * d;
    for (int f = 0; f < nf; ++f) {
      double v = 0.0;
      for (int j = 0; j < d; ++j)
        v += c[f * d + j] * mom[j];
      out[f] += v;
    }
  }
}

int SmoothFamily::min_tile_level() const {
  int t = 1;
  while (std::ldexp(1.0, -t) > 0.5 * eta_ * (1.0 + 1e-12))
    ++t;
  return t;
}

std::shared_ptr<const SmoothFamily::HaloNodes> SmoothFamily::halo_nodes(int tile_level) const {
  tile_level = std::max(tile_level, min_tile_level());
  {
    std::lock_guard lock(halo_mutex_);
    auto it = halo_cache_.find(tile_level);
    if (it != halo_cache_.end())
      return it->second;
  }
  auto nodes = build_halo_nodes(tile_level, nullptr);
  std::lock_guard lock(halo_mutex_);
  auto &slot = halo_cache_[tile_level];
  if (!slot)
    slot = std::move(nodes);
  return slot;
}

std::shared_ptr<SmoothFamily::HaloNodes> SmoothFamily::build_halo_nodes(int tile_level, const Box *window) const {
  const double tau = std::ldexp(1.0, -tile_level);
  const std::vector<double> planes = scaling_ ? std::vector<double>{0.0, 1.0} : std::vector<double>{0.0, 0.5, 1.0};
  const auto lo_k = static_cast<std::int64_t>(std::floor(-eta_ / tau));
  const auto hi_k = static_cast<std::int64_t>(std::ceil((1.0 + eta_) / tau)) - 1;

  std::vector<std::array<std::int64_t, kMaxDim>> tiles;
  for (int axis = 0; axis < dim_; ++axis) {
    for (double s : planes) {
      std::array<std::int64_t, kMaxDim> lo{}, hi{};
      bool empty = false;
      for (int j = 0; j < dim_; ++j) {
        lo[j] = j == axis ? static_cast<std::int64_t>(std::floor((s - eta_) / tau)) : lo_k;
        hi[j] = j == axis ? static_cast<std::int64_t>(std::ceil((s + eta_) / tau)) - 1 : hi_k;
        if (window) {
          lo[j] = std::max(lo[j], static_cast<std::int64_t>(std::floor(window->lo[j] / tau)));
          hi[j] = std::min(hi[j], static_cast<std::int64_t>(std::ceil(window->hi[j] / tau)) - 1);
        }
        empty = empty || lo[j] > hi[j];
      }
      if (empty)
        continue;
      std::array<std::int64_t, kMaxDim> k = lo;
      while (true) {
        tiles.push_back(k);
        int j = dim_ - 1;
        while (j >= 0 && k[j] == hi[j]) {
          k[j] = lo[j];
          --j;
        }
        if (j < 0)
          break;
        ++k[j];
      }
    }
  }
  std::sort(tiles.begin(), tiles.end());
  tiles.erase(std::unique(tiles.begin(), tiles.end()), tiles.end());

  auto nodes = std::make_shared<HaloNodes>();
  const DyadicCube root = DyadicCube::root(dim_);
  const int nf = pieces_->functions;
  std::array<double, kMaxFunctions> sm{}, pl{};
  for (const auto &k : tiles) {
    Box tile;
    tile.dim = dim_;
    for (int j = 0; j < dim_; ++j) {
      tile.lo[j] = static_cast<double>(k[j]) * tau;
      tile.hi[j] = static_cast<double>(k[j] + 1) * tau;
    }
    if (break_set_distance(tile, root, !scaling_) >= eta_)
      continue;
    const QuadratureRule rule = gauss_rule(halo_order_, tile);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const Point &u = rule.nodes[i];
      if (break_distance(u) >= eta_)
        continue;
      smooth_quadrature(u, std::span<double>(sm.data(), nf));
      pieces_->eval(u, std::span<double>(pl.data(), nf));
      nodes->u.push_back(u);
      nodes->w.push_back(rule.weights[i]);
      for (int a = 0; a < nf; ++a) {
        if (!std::isfinite(sm[a]))
          throw EvaluationError("smoothed value is not finite at a halo node");
        nodes->diff.push_back(sm[a] - pl[a]);
        nodes->plain.push_back(pl[a]);
      }
    }
  }
  return nodes;
}

void SmoothFamily::for_each_halo_node(int tile_level, const Box *window, const HaloVisitor &visit) const {
  tile_level = std::max(tile_level, min_tile_level());
  std::shared_ptr<const HaloNodes> nodes;
  {
    std::lock_guard lock(halo_mutex_);
    auto it = halo_cache_.find(tile_level);
    if (it != halo_cache_.end())
      nodes = it->second;
  }
  // A small window at an uncached level is cheaper to integrate directly.
  if (!nodes && window && window->volume() <= 0.25)
    nodes = build_halo_nodes(tile_level, window);
  if (!nodes)
    nodes = halo_nodes(tile_level);
  const std::size_t nf = static_cast<std::size_t>(pieces_->functions);
  for (std::size_t i = 0; i < nodes->u.size(); ++i) {
    const Point &u = nodes->u[i];
    if (window && !window->contains(u))
      continue;
    visit(u, nodes->w[i], std::span<const double>(nodes->diff.data() + i * nf, nf),
          std::span<const double>(nodes->plain.data() + i * nf, nf));
  }
}

std::span<const double> SmoothFamily::raw_norms() const {
  std::call_once(norms_once_, [this] {
    const int nf = pieces_->functions;
    // ||h^eta||^2 = ||h||^2 + int_halo (h^eta)^2 - h^2 = 1 + int diff (diff + 2h)
    std::vector<double> sq(nf, 1.0);
    for_each_halo_node(min_tile_level(), nullptr, [&](const Point &, double w, std::span<const double> diff,
                                                      std::span<const double> pl) {
      for (int a = 0; a < nf; ++a)
        sq[a] += w * diff[a] * (diff[a] + 2.0 * pl[a]);
    });
    norms_.resize(nf);
    scale_.resize(nf);
    for (int a = 0; a < nf; ++a) {
      norms_[a] = std::sqrt(sq[a]);
      scale_[a] = 1.0 / norms_[a];
    }
  });
  return norms_;
}

double SmoothFamily::output_scale(int a) const {
  if (!options_.renormalize)
    return 1.0;
  raw_norms();
  return scale_[a];
}

std::shared_ptr<const SmoothFamily> smooth_family(int dim, int kappa, double eta, bool scaling,
                                                  const SmoothOptions &options) {
  using Key = std::tuple<int, int, double, bool, int, bool, int, int, int>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const SmoothFamily>> cache;
  const Key key{dim,
                kappa,
                eta,
                scaling,
                options.smoothness,
                options.renormalize,
                options.chord_order,
                options.angular_order,
                options.halo_order};
  std::lock_guard lock(mutex);
  auto &slot = cache[key];
  if (!slot)
    slot = std::make_shared<const SmoothFamily>(dim, kappa, eta, scaling, options);
  return slot;
}

SmoothWavelet make_smooth_wavelet(const DyadicCube &q, int a, int kappa, double eta, const SmoothOptions &options) {
  SmoothWavelet sw;
  sw.cube = q;
  sw.index = a;
  sw.kappa = kappa;
  sw.eta = eta;
  sw.radius = eta * q.side();
  sw.family = smooth_family(q.dim, kappa, eta, false, options);
  if (a < 0 || a >= sw.family->functions())
    throw Error("wavelet index out of range");
  return sw;
}

namespace {

double eval_one(const SmoothWavelet &sw, const Point &x, bool force) {
  const Point u = to_local(sw.cube, x);
  const SmoothFamily &fam = *sw.family;
  // Outside the eta-expanded root cube there is nothing to integrate.
  for (int i = 0; i < sw.cube.dim; ++i)
    if (u[i] <= -fam.eta() || u[i] >= 1.0 + fam.eta())
      return 0.0;
  std::array<double, kMaxFunctions> v{};
  const std::span<double> out(v.data(), fam.functions());
  if (force)
    fam.smooth_quadrature(u, out);
  else
    fam.smooth(u, out);
  return v[sw.index] * fam.output_scale(sw.index) / std::sqrt(sw.cube.volume());
}

} // namespace

double smooth_eval(const SmoothWavelet &sw, const Point &x) { return eval_one(sw, x, false); }

double smooth_eval_quadrature(const SmoothWavelet &sw, const Point &x) { return eval_one(sw, x, true); }

double plain_eval(const SmoothWavelet &sw, const Point &x) {
  std::array<double, kMaxFunctions> v{};
  wavelet_family(sw.cube.dim, sw.kappa)->eval_wavelets(sw.cube, x, std::span<double>(v.data(), sw.family->functions()));
  return v[sw.index];
}

double break_set_distance(const Box &b, const DyadicCube &q, bool split) {
  const int n = q.dim;
  double best = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < n; ++axis) {
    double other = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != axis) {
        const double g = gap(b.lo[j], b.hi[j], q.lower(j), q.upper(j));
        other += g * g;
      }
    const double lo = q.lower(axis), hi = q.upper(axis);
    const double planes[3] = {lo, hi, 0.5 * (lo + hi)};
    for (int s = 0; s < (split ? 3 : 2); ++s) {
      const double g = gap(b.lo[axis], b.hi[axis], planes[s], planes[s]);
      best = std::min(best, std::sqrt(g * g + other));
    }
  }
  return best;
}

bool pair_vanishes(const DyadicCube &col, bool col_split, double delta, const DyadicCube &row, bool row_split) {
  if (break_set_distance(row.box(), col, col_split) >= delta)
    return true;
  return break_set_distance(col.box(), row, row_split) >= delta;
}

Eigen::MatrixXd smooth_inner_block(const SmoothFamily &family, const DyadicCube &i, const DyadicCube &q) {
  if (family.is_scaling())
    throw Error("smooth_inner_block expects a wavelet family");
  const int dim = family.dim();
  const int nf = family.functions();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nf, nf);
  if (i == q)
    out.setIdentity();
  const double delta = family.eta() * i.side();
  if (pair_vanishes(i, true, delta, q, true)) {
    // Off-diagonal pruned pairs are exact zeros; the diagonal never is.
    if (!(i == q))
      return out;
  }
  auto fam = wavelet_family(dim, family.kappa());
  const Box window = local_box(i, q.box());
  const int tile_level = std::max(family.min_tile_level(), q.level + 1 - i.level);
  // h_I^eta(x) = |I|^{-1/2} h^eta(u), dx = |I| du.
  const double jac = std::sqrt(i.volume());
  std::array<double, kMaxFunctions> hq{};
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nf, nf);
  family.for_each_halo_node(tile_level, &window, [&](const Point &u, double w, std::span<const double> diff,
                                                     std::span<const double>) {
    const Point x = from_local(i, u);
    fam->eval_wavelets(q, x, std::span<double>(hq.data(), nf));
    for (int b = 0; b < nf; ++b) {
      if (hq[b] == 0.0)
        continue;
      const double s = w * jac * hq[b];
      for (int a = 0; a < nf; ++a)
        acc(b, a) += s * diff[a];
    }
  });
  out += acc;
  if (family.options().renormalize)
    for (int a = 0; a < nf; ++a)
      out.col(a) *= family.output_scale(a);
  return out;
}

double smooth_inner(const DyadicCube &i, int a, const DyadicCube &q, int b, double eta, int kappa,
                    const SmoothOptions &options) {
  const auto fam = smooth_family(i.dim, kappa, eta, false, options);
  return smooth_inner_block(*fam, i, q)(b, a);
}

double smooth_moment(const SmoothWavelet &sw, const MultiIndex &beta) {
  const DyadicCube &q = sw.cube;
  const SmoothFamily &fam = *sw.family;
  auto monomial = [&](const Point &x) {
    double v = 1.0;
    for (int i = 0; i < q.dim; ++i)
      v *= std::pow(x[i], beta.alpha[i]);
    return v;
  };
  // Plain part, exact per child for this polynomial degree.
  const int g = (sw.kappa + beta.order()) / 2 + 2;
  const PiecewisePolynomial h = wavelet_family(q.dim, sw.kappa)->wavelet(q, sw.index);
  double plain = 0.0;
  for (const auto &piece : h.pieces)
    plain += integrate([&](const Point &x) { return piece(x) * monomial(x); }, piece.reference, g);
  double halo = 0.0;
  const double jac = std::sqrt(q.volume());
  fam.for_each_halo_node(fam.min_tile_level(), nullptr,
                         [&](const Point &u, double w, std::span<const double> diff, std::span<const double>) {
                           halo += w * jac * diff[sw.index] * monomial(from_local(q, u));
                         });
  return (plain + halo) * fam.output_scale(sw.index);
}

double smooth_norm(const SmoothWavelet &sw) { return sw.family->raw_norms()[sw.index]; }

std::vector<double> grad_sup_family(const SmoothFamily &fam, int m, int samples) {
  const int smoothness = fam.mollifier().smoothness;
  if (m < 0 || m > smoothness - 2)
    throw Error("derivative order exceeds the mollifier smoothness margin");
  if (m > 1)
    throw Error("grad_sup_estimate supports m in {0, 1}");
  const int n = fam.dim();
  const int nf = fam.functions();
  const double eta = fam.eta();
  const double step = eta / 64.0; // delta/64 in root-local units
  std::array<double, kMaxFunctions> va{}, vb{};
  std::vector<double> sup(nf, 0.0), g2(nf);
  auto visit = [&](const Point &u) {
    if (m == 0) {
      fam.smooth(u, std::span<double>(va.data(), nf));
      for (int f = 0; f < nf; ++f)
        sup[f] = std::max(sup[f], std::abs(va[f]));
      return;
    }
    std::fill(g2.begin(), g2.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      Point a = u, b = u;
      a[j] += step;
      b[j] -= step;
      fam.smooth(a, std::span<double>(va.data(), nf));
      fam.smooth(b, std::span<double>(vb.data(), nf));
      for (int f = 0; f < nf; ++f) {
        const double d = (va[f] - vb[f]) / (2.0 * step);
        g2[f] += d * d;
      }
    }
    for (int f = 0; f < nf; ++f)
      sup[f] = std::max(sup[f], std::sqrt(g2[f]));
  };

  // Lines normal to every break plane. The jump across a plane is a
  // polynomial of degree < kappa on each child face, which cannot vanish on a
  // tensor grid of kappa points per axis unless it is zero.
  const std::vector<double> planes = fam.is_scaling() ? std::vector<double>{0.0, 1.0} : std::vector<double>{0.0, 0.5, 1.0};
  const int per_child = fam.kappa();
  std::vector<double> transverse;
  for (double half : {0.0, 0.5})
    for (int j = 0; j < per_child; ++j)
      transverse.push_back(half + 0.5 * (j + 0.5) / per_child);
  const int t = static_cast<int>(transverse.size());
  int combos = 1;
  for (int j = 1; j < n; ++j)
    combos *= t;
  for (int axis = 0; axis < n; ++axis)
    for (double s : planes)
      for (int c = 0; c < combos; ++c) {
        Point u{};
        int rem = c;
        for (int j = 0; j < n; ++j)
          if (j != axis) {
            u[j] = transverse[rem % t];
            rem /= t;
          }
        for (int k = 0; k <= samples; ++k) {
          u[axis] = s - eta + 2.0 * eta * k / samples;
          visit(u);
        }
      }
  // Off the halo: a coarse tensor grid of child-interior points.
  const int grid = 8;
  int total = 1;
  for (int j = 0; j < n; ++j)
    total *= grid;
  for (int flat = 0; flat < total; ++flat) {
    Point u{};
    int rem = flat;
    for (int j = n - 1; j >= 0; --j) {
      u[j] = (rem % grid + 0.5) / grid;
      rem /= grid;
    }
    visit(u);
  }
  for (int f = 0; f < nf; ++f)
    sup[f] *= fam.output_scale(f);
  return sup;
}

double grad_sup_estimate(const SmoothWavelet &sw, int m, int samples) {
  const std::vector<double> sup = grad_sup_family(*sw.family, m, samples);
  return sup[sw.index] / std::sqrt(sw.cube.volume()) * std::pow(sw.cube.side(), -m);
}

double plain_grad_sup_estimate(const DyadicCube &q, int a, int kappa, double h) {
  auto fam = wavelet_family(q.dim, kappa);
  const int nf = fam->wavelet_count();
  const int n = q.dim;
  std::array<double, kMaxFunctions> v{};
  auto value = [&](const Point &u) {
    fam->wavelets().eval(u, std::span<double>(v.data(), nf));
    return v[a];
  };
  double sup = 0.0;
  for (int axis = 0; axis < n; ++axis)
    for (double offset : {-0.5 * h, 0.5 * h, 0.25, 0.75}) {
      Point u{};
      for (int j = 0; j < n; ++j)
        u[j] = 0.25;
      u[axis] = 0.5 + offset;
      double g2 = 0.0;
      for (int j = 0; j < n; ++j) {
        Point p = u, m = u;
        p[j] += h;
        m[j] -= h;
        const double dj = (value(p) - value(m)) / (2.0 * h);
        g2 += dj * dj;
      }
      sup = std::max(sup, std::sqrt(g2));
    }
  return sup / std::sqrt(q.volume()) / q.side();
}

} // namespace alpertlab
