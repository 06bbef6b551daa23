#include "alpertlab/alpert.hpp"

#include "alpertlab/error.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace alpertlab {

int PieceFamily::mono_count() const { return poly_space_dim(dim, kappa); }

int PieceFamily::piece_of(const Point &u) const {
  for (int i = 0; i < dim; ++i)
    if (u[i] < 0.0 || u[i] >= 1.0)
      return -1;
  if (!split)
    return 0;
  int c = 0;
  for (int i = 0; i < dim; ++i)
    c = 2 * c + (u[i] >= 0.5 ? 1 : 0);
  return c;
}

void PieceFamily::eval_piece(int p, const Point &u, std::span<double> out) const {
  const int d = mono_count();
  std::array<double, 128> mono{};
  basis.evaluate(u, centres[p], std::span<double>(mono.data(), d));
  const double *c = coeffs.data() + static_cast<std::size_t>(p) * functions * d;
  for (int f = 0; f < functions; ++f) {
    double v = 0.0;
    for (int k = 0; k < d; ++k)
      v += c[f * d + k] * mono[k];
    out[f] = v;
  }
}

void PieceFamily::eval(const Point &u, std::span<double> out) const {
  const int p = piece_of(u);
  if (p < 0) {
    std::fill(out.begin(), out.begin() + functions, 0.0);
    return;
  }
  eval_piece(p, u, out);
}

double PiecewisePolynomial::operator()(const Point &x) const { return wavelet_eval(*this, x); }

WaveletFamily::WaveletFamily(int dim, int kappa) : dim_(dim), kappa_(kappa) {
  if (dim < 1 || dim > kMaxDim)
    throw Error("dimension must be 1, 2 or 3");
  if (kappa < 1)
    throw Error("kappa must be >= 1");
  if (kappa > kMaxKappa)
    throw ConditioningError("Alpert construction is limited to kappa <= 6");
  MonomialBasis mono(dim, kappa);
  d_ = mono.size();
  const int nchild = 1 << dim;
  const int n_fine = nchild * d_;

  const DyadicCube root = DyadicCube::root(dim);
  const Box root_box = root.box();
  const std::vector<PolynomialRep> parent = orthonormal_poly_basis(root_box, kappa);

  scaling_.dim = dim;
  scaling_.kappa = kappa;
  scaling_.functions = d_;
  scaling_.split = false;
  scaling_.basis = mono;
  scaling_.boxes = {root_box};
  scaling_.centres = {root_box.centre()};
  scaling_.coeffs.resize(static_cast<std::size_t>(d_) * d_);
  for (int j = 0; j < d_; ++j)
    for (int k = 0; k < d_; ++k)
      scaling_.coeffs[j * d_ + k] = parent[j].coeffs[k];

  // Child bases: the parent scaling basis transported to each child.
  const double norm_factor = std::sqrt(static_cast<double>(nchild));
  std::vector<std::vector<PolynomialRep>> child_basis(nchild);
  std::vector<Box> child_boxes(nchild);
  for (int c = 0; c < nchild; ++c) {
    child_boxes[c] = root.child(c).box();
    for (int i = 0; i < d_; ++i) {
      PolynomialRep e = parent[i];
      e.centre = child_boxes[c].centre();
      e.reference = child_boxes[c];
      for (int k = 0; k < d_; ++k)
        e.coeffs[k] = parent[i].coeffs[k] * std::ldexp(norm_factor, mono.indices()[k].order());
      child_basis[c].push_back(std::move(e));
    }
  }

  Eigen::MatrixXd coarse(n_fine, d_);
  for (int c = 0; c < nchild; ++c)
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        coarse(c * d_ + i, j) = exact_inner(parent[j], child_basis[c][i], child_boxes[c]);

  // Orthonormalise the columns of (I - A A^T) in fixed child/degree order,
  // skipping columns already in the span of the previously accepted ones.
  const Eigen::MatrixXd projector =
      Eigen::MatrixXd::Identity(n_fine, n_fine) - coarse * coarse.transpose();
  std::vector<Eigen::VectorXd> accepted;
  for (int k = 0; k < n_fine && static_cast<int>(accepted.size()) < n_fine - d_; ++k) {
    Eigen::VectorXd v = projector.col(k);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto &q : accepted)
        v -= q.dot(v) * q;
    const double nv = v.norm();
    if (nv < 1e-8)
      continue;
    v /= nv;
    for (int r = 0; r < n_fine; ++r) {
      if (std::abs(v(r)) > 1e-12) {
        if (v(r) < 0)
          v = -v;
        break;
      }
    }
    accepted.push_back(v);
  }
  if (static_cast<int>(accepted.size()) != n_fine - d_)
    throw ConditioningError("Alpert complement has the wrong dimension");

  two_scale_.resize(n_fine, n_fine);
  two_scale_.leftCols(d_) = coarse;
  for (int a = 0; a < n_fine - d_; ++a)
    two_scale_.col(d_ + a) = accepted[a];
  const double defect =
      (two_scale_.transpose() * two_scale_ - Eigen::MatrixXd::Identity(n_fine, n_fine)).cwiseAbs().maxCoeff();
  if (defect > 1e-11)
    throw ConditioningError("two-scale matrix is not orthogonal");

  const int nw = n_fine - d_;
  wavelets_.dim = dim;
  wavelets_.kappa = kappa;
  wavelets_.functions = nw;
  wavelets_.split = true;
  wavelets_.basis = mono;
  wavelets_.boxes = child_boxes;
  for (int c = 0; c < nchild; ++c)
    wavelets_.centres.push_back(child_boxes[c].centre());
  wavelets_.coeffs.assign(static_cast<std::size_t>(nchild) * nw * d_, 0.0);
  for (int c = 0; c < nchild; ++c)
    for (int a = 0; a < nw; ++a)
      for (int i = 0; i < d_; ++i) {
        const double t = two_scale_(c * d_ + i, d_ + a);
        for (int k = 0; k < d_; ++k)
          wavelets_.coeffs[(static_cast<std::size_t>(c) * nw + a) * d_ + k] += t * child_basis[c][i].coeffs[k];
      }
}

namespace {

Point to_local(const DyadicCube &q, const Point &x) {
  Point u{};
  for (int i = 0; i < q.dim; ++i)
    u[i] = std::ldexp(x[i], q.level) - static_cast<double>(q.index[i]);
  return u;
}

} // namespace

void WaveletFamily::eval_wavelets(const DyadicCube &q, const Point &x, std::span<double> out) const {
  wavelets_.eval(to_local(q, x), out);
  const double s = 1.0 / std::sqrt(q.volume());
  for (int a = 0; a < wavelets_.functions; ++a)
    out[a] *= s;
}

void WaveletFamily::eval_scaling(const DyadicCube &q, const Point &x, std::span<double> out) const {
  scaling_.eval(to_local(q, x), out);
  const double s = 1.0 / std::sqrt(q.volume());
  for (int j = 0; j < d_; ++j)
    out[j] *= s;
}

namespace {

PolynomialRep transport(const PieceFamily &fam, int piece, int f, const DyadicCube &q) {
  MonomialBasis mono(fam.dim, fam.kappa);
  const int d = mono.size();
  PolynomialRep p;
  p.dim = fam.dim;
  p.kappa = fam.kappa;
  const double l = q.side();
  Box ref;
  ref.dim = fam.dim;
  for (int i = 0; i < fam.dim; ++i) {
    p.centre[i] = q.lower(i) + l * fam.centres[piece][i];
    ref.lo[i] = q.lower(i) + l * fam.boxes[piece].lo[i];
    ref.hi[i] = q.lower(i) + l * fam.boxes[piece].hi[i];
  }
  p.reference = ref;
  p.coeffs.resize(d);
  const double s = 1.0 / std::sqrt(q.volume());
  for (int k = 0; k < d; ++k)
    p.coeffs[k] = fam.coeffs[(static_cast<std::size_t>(piece) * fam.functions + f) * d + k] * s *
                  std::ldexp(1.0, q.level * mono.indices()[k].order());
  return p;
}

} // namespace

PiecewisePolynomial WaveletFamily::wavelet(const DyadicCube &q, int a) const {
  PiecewisePolynomial w{q, {}};
  for (int c = 0; c < wavelets_.piece_count(); ++c)
    w.pieces.push_back(transport(wavelets_, c, a, q));
  return w;
}

PolynomialRep WaveletFamily::scaling_polynomial(const DyadicCube &q, int j) const {
  return transport(scaling_, 0, j, q);
}

std::shared_ptr<const WaveletFamily> wavelet_family(int dim, int kappa) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const WaveletFamily>> cache;
  std::lock_guard lock(mutex);
  auto &slot = cache[{dim, kappa}];
  if (!slot)
    slot = std::make_shared<const WaveletFamily>(dim, kappa);
  return slot;
}

AlpertWaveletSet build_alpert(const DyadicCube &q, int kappa) {
  auto fam = wavelet_family(q.dim, kappa);
  AlpertWaveletSet set{q, kappa, {}};
  for (int a = 0; a < fam->wavelet_count(); ++a)
    set.wavelets.push_back(fam->wavelet(q, a));
  return set;
}

ScalingBasis build_scaling(const DyadicCube &q, int kappa) {
  auto fam = wavelet_family(q.dim, kappa);
  ScalingBasis s{q, {}};
  for (int j = 0; j < fam->poly_dim(); ++j)
    s.polys.push_back(fam->scaling_polynomial(q, j));
  return s;
}

double wavelet_eval(const PiecewisePolynomial &w, const Point &x) {
  if (!w.cube.contains(x))
    return 0.0;
  for (const auto &p : w.pieces)
    if (p.reference.contains(x))
      return p(x);
  return 0.0;
}

int default_gauss_order(int kappa) { return kappa + 6; }

std::vector<double> analysis(const Function &f, const DyadicCube &q, int kappa, int g) {
  if (g <= 0)
    g = default_gauss_order(kappa);
  auto fam = wavelet_family(q.dim, kappa);
  const int nw = fam->wavelet_count();
  std::vector<double> out(nw, 0.0), vals(nw);
  for (int c = 0; c < q.child_count(); ++c) {
    const QuadratureRule rule = gauss_rule(g, q.child(c).box());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double fv = f(rule.nodes[i]);
      if (!std::isfinite(fv))
        throw EvaluationError("analysis: integrand is not finite");
      fam->eval_wavelets(q, rule.nodes[i], vals);
      for (int a = 0; a < nw; ++a)
        out[a] += rule.weights[i] * fv * vals[a];
    }
  }
  return out;
}

PiecewisePolynomial project_delta(const Function &f, const DyadicCube &q, int kappa, int g) {
  auto fam = wavelet_family(q.dim, kappa);
  const std::vector<double> c = analysis(f, q, kappa, g);
  PiecewisePolynomial out = fam->wavelet(q, 0);
  for (auto &p : out.pieces)
    std::fill(p.coeffs.begin(), p.coeffs.end(), 0.0);
  for (int a = 0; a < fam->wavelet_count(); ++a) {
    const PiecewisePolynomial w = fam->wavelet(q, a);
    for (std::size_t p = 0; p < w.pieces.size(); ++p)
      for (std::size_t k = 0; k < w.pieces[p].coeffs.size(); ++k)
        out.pieces[p].coeffs[k] += c[a] * w.pieces[p].coeffs[k];
  }
  return out;
}

TruncatedExpansion::TruncatedExpansion(int dim, int kappa, int depth)
    : dim_(dim), kappa_(kappa), depth_(depth), d_(poly_space_dim(dim, kappa)),
      block_(((1 << dim) - 1) * d_), blocks_(0) {
  if (depth < 0)
    throw StructureError("truncation depth must be >= 0");
  for (int k = 0; k < depth; ++k)
    blocks_ += std::size_t{1} << (dim * k);
  values_.assign(static_cast<std::size_t>(d_) + blocks_ * block_, 0.0);
}

std::size_t TruncatedExpansion::offset(const DyadicCube &q) const {
  if (q.dim != dim_ || q.level >= depth_)
    throw StructureError("cube " + q.to_string() + " has no block in this truncation");
  std::size_t before = 0;
  for (int k = 0; k < q.level; ++k)
    before += std::size_t{1} << (dim_ * k);
  return static_cast<std::size_t>(d_) + (before + level_offset(q)) * block_;
}

std::span<double> TruncatedExpansion::block(const DyadicCube &q) {
  return {values_.data() + offset(q), static_cast<std::size_t>(block_)};
}

std::span<const double> TruncatedExpansion::block(const DyadicCube &q) const {
  return {values_.data() + offset(q), static_cast<std::size_t>(block_)};
}

double TruncatedExpansion::norm() const {
  double s = 0.0;
  for (double v : values_)
    s += v * v;
  return std::sqrt(s);
}

CellField::CellField(int dim, int kappa, int level)
    : dim_(dim), kappa_(kappa), level_(level), d_(poly_space_dim(dim, kappa)),
      cells_(std::size_t{1} << (dim * level)), values_(cells_ * d_, 0.0),
      family_(wavelet_family(dim, kappa)) {}

double CellField::operator()(const Point &x) const {
  for (int i = 0; i < dim_; ++i)
    if (x[i] < 0.0 || x[i] >= 1.0)
      return 0.0;
  const DyadicCube cell = locate(x, dim_, level_);
  std::array<double, 64> s{};
  family_->eval_scaling(cell, x, std::span<double>(s.data(), d_));
  const auto c = this->cell(level_offset(cell));
  double v = 0.0;
  for (int j = 0; j < d_; ++j)
    v += c[j] * s[j];
  return v;
}

CellField project_cells(const Function &f, int dim, int kappa, int level, int g) {
  if (g <= 0)
    g = default_gauss_order(kappa);
  CellField field(dim, kappa, level);
  auto fam = wavelet_family(dim, kappa);
  const int d = fam->poly_dim();
  std::vector<double> s(d);
  const auto cells = level_cubes(dim, level);
  for (std::size_t flat = 0; flat < cells.size(); ++flat) {
    const QuadratureRule rule = gauss_rule(g, cells[flat].box());
    auto out = field.cell(flat);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double fv = f(rule.nodes[i]);
      if (!std::isfinite(fv))
        throw EvaluationError("project_cells: integrand is not finite");
      fam->eval_scaling(cells[flat], rule.nodes[i], s);
      for (int j = 0; j < d; ++j)
        out[j] += rule.weights[i] * fv * s[j];
    }
  }
  return field;
}

TruncatedExpansion analyse_cells(const CellField &cells) {
  const int dim = cells.dim();
  auto fam = wavelet_family(dim, cells.kappa());
  const int d = fam->poly_dim();
  const int nchild = 1 << dim;
  const Eigen::MatrixXd &t = fam->two_scale();
  TruncatedExpansion out(dim, cells.kappa(), cells.level());
  std::vector<double> current(cells.values().begin(), cells.values().end());
  Eigen::VectorXd v(nchild * d);
  for (int k = cells.level() - 1; k >= 0; --k) {
    const auto parents = level_cubes(dim, k);
    std::vector<double> next(parents.size() * d);
    for (std::size_t p = 0; p < parents.size(); ++p) {
      for (int c = 0; c < nchild; ++c) {
        const std::size_t fine = level_offset(parents[p].child(c));
        for (int i = 0; i < d; ++i)
          v(c * d + i) = current[fine * d + i];
      }
      const Eigen::VectorXd w = t.transpose() * v;
      for (int j = 0; j < d; ++j)
        next[p * d + j] = w(j);
      auto blk = out.block(parents[p]);
      for (int a = 0; a < out.block_size(); ++a)
        blk[a] = w(d + a);
    }
    current.swap(next);
  }
  for (int j = 0; j < d; ++j)
    out.scaling()[j] = current[j];
  return out;
}

CellField synthesize_cells(const TruncatedExpansion &coeffs) {
  const int dim = coeffs.dim();
  auto fam = wavelet_family(dim, coeffs.kappa());
  const int d = fam->poly_dim();
  const int nchild = 1 << dim;
  const Eigen::MatrixXd &t = fam->two_scale();
  std::vector<double> current(coeffs.scaling().begin(), coeffs.scaling().end());
  Eigen::VectorXd w(nchild * d);
  for (int k = 0; k < coeffs.depth(); ++k) {
    const auto parents = level_cubes(dim, k);
    std::vector<double> next((std::size_t{1} << (dim * (k + 1))) * d);
    for (std::size_t p = 0; p < parents.size(); ++p) {
      for (int j = 0; j < d; ++j)
        w(j) = current[p * d + j];
      const auto blk = coeffs.block(parents[p]);
      for (int a = 0; a < coeffs.block_size(); ++a)
        w(d + a) = blk[a];
      const Eigen::VectorXd v = t * w;
      for (int c = 0; c < nchild; ++c) {
        const std::size_t fine = level_offset(parents[p].child(c));
        for (int i = 0; i < d; ++i)
          next[fine * d + i] = v(c * d + i);
      }
    }
    current.swap(next);
  }
  CellField field(dim, coeffs.kappa(), coeffs.depth());
  std::copy(current.begin(), current.end(), field.values().begin());
  return field;
}

TruncatedExpansion expand(const Function &f, const GridTruncation &trunc, int kappa, int g) {
  return analyse_cells(project_cells(f, trunc.dim, kappa, trunc.max_depth, g));
}

Function synthesize(const TruncatedExpansion &coeffs) {
  auto field = std::make_shared<const CellField>(synthesize_cells(coeffs));
  return [field](const Point &x) { return (*field)(x); };
}

double evaluate_expansion(const TruncatedExpansion &coeffs, const Point &x) {
  const int dim = coeffs.dim();
  for (int i = 0; i < dim; ++i)
    if (x[i] < 0.0 || x[i] >= 1.0)
      return 0.0;
  auto fam = wavelet_family(dim, coeffs.kappa());
  std::vector<double> vals(std::max(fam->poly_dim(), fam->wavelet_count()));
  fam->eval_scaling(DyadicCube::root(dim), x, vals);
  double v = 0.0;
  for (int j = 0; j < fam->poly_dim(); ++j)
    v += coeffs.scaling()[j] * vals[j];
  for (int k = 0; k < coeffs.depth(); ++k) {
    const DyadicCube q = locate(x, dim, k);
    fam->eval_wavelets(q, x, vals);
    const auto blk = coeffs.block(q);
    for (int a = 0; a < fam->wavelet_count(); ++a)
      v += blk[a] * vals[a];
  }
  return v;
}

} // namespace alpertlab
