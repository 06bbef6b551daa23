#include "alpertlab/frame.hpp"

#include "alpertlab/error.hpp"
#include "alpertlab/test_functions.hpp"

#include <algorithm>
#include <cmath>

namespace alpertlab {

namespace {


Point from_local(const DyadicCube &q, const Point &u) {
  Point x{};
  for (int i = 0; i < q.dim; ++i)
    x[i] = std::ldexp(u[i] + static_cast<double>(q.index[i]), -q.level);
  return x;
}

Point to_local(const DyadicCube &q, const Point &x) {
  Point u{};
  for (int i = 0; i < q.dim; ++i)
    u[i] = std::ldexp(x[i], q.level) - static_cast<double>(q.index[i]);
  return u;
}

bool in_root(const Point &x, int dim) {
  for (int i = 0; i < dim; ++i)
    if (x[i] < 0.0 || x[i] >= 1.0)
      return false;
  return true;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v)
    s += x * x;
  return std::sqrt(s);
}

} // namespace

std::vector<CoordGroup> coordinate_groups(int dim, int kappa, int depth) {
  const int d = poly_space_dim(dim, kappa);
  const int block = ((1 << dim) - 1) * d;
  std::vector<CoordGroup> out;
  out.push_back({true, DyadicCube::root(dim), 0, d});
  std::size_t offset = d;
  for (int k = 0; k < depth; ++k)
    for (const DyadicCube &q : level_cubes(dim, k)) {
      out.push_back({false, q, offset, block});
      offset += block;
    }
  return out;
}

std::vector<CoordGroup> FrameMatrix::layout(int dim, int kappa, int depth) {
  return coordinate_groups(dim, kappa, depth);
}

void FrameMatrix::build_csr(const std::vector<std::map<std::size_t, double>> &rows) {
  row_ptr_.assign(1, 0);
  cols_.clear();
  vals_.clear();
  for (const auto &row : rows) {
    for (const auto &[c, v] : row) {
      cols_.push_back(static_cast<std::uint32_t>(c));
      vals_.push_back(v);
    }
    row_ptr_.push_back(cols_.size());
  }
  stats_.stored_entries = vals_.size();
  stats_.density = size_ ? static_cast<double>(vals_.size()) / (static_cast<double>(size_) * size_) : 0.0;
}

FrameMatrix FrameMatrix::identity(int dim, int kappa, int depth) {
  FrameMatrix m;
  m.dim_ = dim;
  m.kappa_ = kappa;
  m.depth_ = depth;
  m.groups_ = layout(dim, kappa, depth);
  m.size_ = m.groups_.back().offset + m.groups_.back().size;
  std::vector<std::map<std::size_t, double>> rows(m.size_);
  for (std::size_t r = 0; r < m.size_; ++r)
    rows[r][r] = 1.0;
  for (std::size_t g = 0; g < m.groups_.size(); ++g)
    m.pattern_.emplace_back(g, g);
  m.build_csr(rows);
  return m;
}

void FrameMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r < size_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      s += vals_[k] * x[cols_[k]];
    y[r] = s;
  }
}

void FrameMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.begin() + size_, 0.0);
  for (std::size_t r = 0; r < size_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      y[cols_[k]] += vals_[k] * x[r];
}

double FrameMatrix::entry(std::size_t row, std::size_t col) const {
  for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
    if (cols_[k] == col)
      return vals_[k];
  return 0.0;
}

Eigen::MatrixXd FrameMatrix::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size_, size_);
  for (std::size_t r = 0; r < size_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      out(r, cols_[k]) = vals_[k];
  return out;
}

FrameMatrix assemble(const GridTruncation &trunc, double eta, int kappa, const SmoothOptions &options) {
  const int dim = trunc.dim;
  const int depth = trunc.max_depth;
  FrameMatrix m;
  m.dim_ = dim;
  m.kappa_ = kappa;
  m.depth_ = depth;
  m.eta_ = eta;
  m.renormalized_ = options.renormalize;
  m.options_ = options;
  m.groups_ = FrameMatrix::layout(dim, kappa, depth);
  m.size_ = m.groups_.back().offset + m.groups_.back().size;
  const auto &groups = m.groups_;
  const std::size_t ng = groups.size();

  // Row group of the level-k cube containing x.
  std::vector<std::size_t> level_start(depth + 1, 1);
  for (int k = 1; k <= depth; ++k)
    level_start[k] = level_start[k - 1] + (std::size_t{1} << (dim * (k - 1)));

  auto plain = wavelet_family(dim, kappa);
  const auto scaling_family = smooth_family(dim, kappa, eta, true, options);
  const auto wavelet_smooth = smooth_family(dim, kappa, eta, false, options);
  std::vector<std::map<std::size_t, double>> rows(m.size_);

  for (std::size_t gc = 0; gc < ng; ++gc) {
    const CoordGroup &col = groups[gc];
    const SmoothFamily &fam = col.scaling ? *scaling_family : *wavelet_smooth;
    const DyadicCube &i = col.cube;
    const double delta = eta * i.side();

    std::vector<char> alive(ng, 0);
    for (std::size_t gr = 0; gr < ng; ++gr) {
      const CoordGroup &row = groups[gr];
      ++m.stats_.block_pairs;
      const bool vanish =
          gr != gc && pair_vanishes(i, !col.scaling, delta, row.cube, !row.scaling);
      if (vanish)
        ++m.stats_.pruned_pairs;
      else
        alive[gr] = 1;
    }
    std::map<std::size_t, Eigen::MatrixXd> acc;
    for (std::size_t gr = 0; gr < ng; ++gr)
      if (alive[gr])
        acc[gr] = Eigen::MatrixXd::Zero(groups[gr].size, col.size);

    const int tile_level = std::max(fam.min_tile_level(), depth - i.level);
    const double jac = std::sqrt(i.volume());
    std::array<double, kMaxFunctions> vals{};
    try {
      fam.for_each_halo_node(tile_level, nullptr, [&](const Point &u, double w, std::span<const double> diff,
                                                      std::span<const double>) {
        const Point x = from_local(i, u);
        if (!in_root(x, dim))
          return;
        const double wt = w * jac;
        auto add = [&](std::size_t gr, int rows_in_group) {
          Eigen::MatrixXd &a = acc[gr];
          for (int b = 0; b < rows_in_group; ++b) {
            if (vals[b] == 0.0)
              continue;
            const double s = wt * vals[b];
            for (int c = 0; c < col.size; ++c)
              a(b, c) += s * diff[c];
          }
        };
        if (alive[0]) {
          plain->eval_scaling(DyadicCube::root(dim), x, std::span<double>(vals.data(), groups[0].size));
          add(0, groups[0].size);
        }
        for (int k = 0; k < depth; ++k) {
          const DyadicCube q = locate(x, dim, k);
          const std::size_t gr = level_start[k] + level_offset(q);
          if (!alive[gr])
            continue;
          plain->eval_wavelets(q, x, std::span<double>(vals.data(), groups[gr].size));
          add(gr, groups[gr].size);
        }
      });
    } catch (const EvaluationError &e) {
      throw EvaluationError(std::string(e.what()) + " (column " + i.to_string() + ")");
    }

    for (auto &[gr, a] : acc) {
      if (gr == gc)
        a += Eigen::MatrixXd::Identity(col.size, col.size);
      for (int c = 0; c < col.size; ++c) {
        const double s = fam.output_scale(c);
        for (int b = 0; b < groups[gr].size; ++b)
          rows[groups[gr].offset + b][col.offset + c] = a(b, c) * s;
      }
      m.pattern_.emplace_back(gr, gc);
    }
  }
  std::sort(m.pattern_.begin(), m.pattern_.end());
  m.build_csr(rows);
  return m;
}

DeviationReport deviation(const FrameMatrix &m, bool transpose, int min_iter, int max_iter, double rel_tol) {
  const std::size_t n = m.size();
  std::vector<double> v(n), w(n), mw(n), z(n);
  SplitMix64 rng(0xA1BE57ULL);
  for (double &x : v)
    x = rng.uniform(0.5, 1.5);
  double nv = norm2(v);
  for (double &x : v)
    x /= nv;

  // A = I - M. Non-transposed: z = A A^tr v. Transposed: z = A^tr A v.
  auto apply = [&](bool t, std::span<const double> in, std::span<double> out) {
    if (t)
      m.multiply_transpose(in, out);
    else
      m.multiply(in, out);
    for (std::size_t k = 0; k < n; ++k)
      out[k] = in[k] - out[k];
  };
  DeviationReport rep;
  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    apply(!transpose, v, w);
    apply(transpose, w, z);
    double lambda = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      lambda += v[k] * z[k];
    const double nz = norm2(z);
    rep.iterations = it;
    rep.value = std::sqrt(std::max(lambda, 0.0));
    if (nz == 0.0) {
      rep.value = 0.0;
      rep.converged = true;
      break;
    }
    for (std::size_t k = 0; k < n; ++k)
      v[k] = z[k] / nz;
    if (it >= min_iter && prev >= 0.0 && std::abs(lambda - prev) <= rel_tol * std::abs(lambda)) {
      rep.converged = true;
      break;
    }
    prev = lambda;
  }
  return rep;
}

NeumannResult neumann_solve(const FrameMatrix &m, std::span<const double> g, double tol, int max_iter) {
  const std::size_t n = m.size();
  if (g.size() != n)
    throw StructureError("right-hand side does not match the matrix size");
  NeumannResult res;
  res.coeffs.assign(n, 0.0);
  const double ng = norm2(g);
  if (ng == 0.0) {
    res.residual_history.push_back(0.0);
    return res;
  }
  std::vector<double> r(g.begin(), g.end()), mc(n);
  double rel = 1.0;
  res.residual_history.push_back(rel);
  while (rel > tol) {
    if (res.iterations >= max_iter)
      throw DivergenceError("Neumann iteration did not reach the tolerance", res.residual_history);
    for (std::size_t k = 0; k < n; ++k)
      res.coeffs[k] += r[k];
    m.multiply(res.coeffs, mc);
    for (std::size_t k = 0; k < n; ++k)
      r[k] = g[k] - mc[k];
    ++res.iterations;
    rel = norm2(r) / ng;
    res.residual_history.push_back(rel);
    if (!std::isfinite(rel) || rel > 1e8)
      throw DivergenceError("Neumann iteration diverged", res.residual_history);
  }
  return res;
}

std::vector<double> dense_solve(const FrameMatrix &m, std::span<const double> g) {
  const Eigen::MatrixXd a = m.dense();
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
  const Eigen::VectorXd x = a.partialPivLu().solve(b);
  return {x.data(), x.data() + x.size()};
}

SmoothSynthesis::SmoothSynthesis(const TruncatedExpansion &coeffs, double eta, const SmoothOptions &options)
    : coeffs_(coeffs), eta_(eta), scaling_(smooth_family(coeffs.dim(), coeffs.kappa(), eta, true, options)),
      wavelets_(smooth_family(coeffs.dim(), coeffs.kappa(), eta, false, options)) {}

template <class Visit> void SmoothSynthesis::visit_terms(const Point &x, Visit &&visit) const {
  const int dim = coeffs_.dim();
  std::array<double, kMaxFunctions> vals{};
  auto near = [&](const Point &u) {
    for (int i = 0; i < dim; ++i)
      if (u[i] <= -eta_ || u[i] >= 1.0 + eta_)
        return false;
    return true;
  };
  if (near(x)) {
    const int d = coeffs_.poly_dim();
    scaling_->smooth(x, std::span<double>(vals.data(), d));
    for (int j = 0; j < d; ++j)
      visit(coeffs_.scaling()[j] * vals[j] * scaling_->output_scale(j));
  }
  const int nf = coeffs_.block_size();
  for (int k = 0; k < coeffs_.depth(); ++k) {
    const double l = std::ldexp(1.0, -k);
    const double delta = eta_ * l;
    const std::int64_t top = (std::int64_t{1} << k) - 1;
    std::array<std::int64_t, kMaxDim> lo{}, hi{};
    bool empty = false;
    for (int i = 0; i < dim; ++i) {
      lo[i] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((x[i] - delta) / l)));
      hi[i] = std::min<std::int64_t>(top, static_cast<std::int64_t>(std::floor((x[i] + delta) / l)));
      empty = empty || lo[i] > hi[i];
    }
    if (empty)
      continue;
    std::array<std::int64_t, kMaxDim> j = lo;
    while (true) {
      DyadicCube q{dim, k, j};
      const Point u = to_local(q, x);
      if (near(u)) {
        wavelets_->smooth(u, std::span<double>(vals.data(), nf));
        const double s = 1.0 / std::sqrt(q.volume());
        const auto blk = coeffs_.block(q);
        for (int a = 0; a < nf; ++a)
          visit(blk[a] * vals[a] * s * wavelets_->output_scale(a));
      }
      int i = dim - 1;
      while (i >= 0 && j[i] == hi[i]) {
        j[i] = lo[i];
        --i;
      }
      if (i < 0)
        break;
      ++j[i];
    }
  }
}

double SmoothSynthesis::operator()(const Point &x) const {
  double s = 0.0;
  visit_terms(x, [&](double t) { s += t; });
  return s;
}

double SmoothSynthesis::square_sum(const Point &x) const {
  double s = 0.0;
  visit_terms(x, [&](double t) { s += t * t; });
  return s;
}

double lp_norm(const FunctionSample &sample, double p) {
  if (!(p > 1.0 && std::isfinite(p)))
    throw Error("lp_norm: p must lie in (1, inf)");
  const int dim = sample.dim;
  const double side = std::ldexp(1.0, -sample.level);
  const std::int64_t n = std::int64_t{1} << sample.level;
  const auto extra = static_cast<std::int64_t>(std::ceil(sample.margin / side - 1e-12));
  const GaussLegendre &gl = gauss_legendre(sample.order);
  const int g = sample.order;
  std::array<std::int64_t, kMaxDim> k{};
  for (int i = 0; i < dim; ++i)
    k[i] = -extra;
  int nodes_per_cell = 1;
  for (int i = 0; i < dim; ++i)
    nodes_per_cell *= g;
  double sum = 0.0;
  while (true) {
    for (int flat = 0; flat < nodes_per_cell; ++flat) {
      int rem = flat;
      Point x{};
      double w = 1.0;
      for (int i = dim - 1; i >= 0; --i) {
        const int t = rem % g;
        rem /= g;
        x[i] = (static_cast<double>(k[i]) + 0.5 + 0.5 * gl.nodes[t]) * side;
        w *= 0.5 * side * gl.weights[t];
      }
      const double v = sample.f(x);
      if (!std::isfinite(v))
        throw EvaluationError("lp_norm: integrand is not finite");
      sum += w * std::pow(std::abs(v), p);
    }
    int i = dim - 1;
    while (i >= 0 && k[i] == n - 1 + extra) {
      k[i] = -extra;
      --i;
    }
    if (i < 0)
      break;
    ++k[i];
  }
  return std::pow(sum, 1.0 / p);
}

double square_function(const TruncatedExpansion &coeffs, const Point &x, SquareVariant variant, double eta,
                       const SmoothOptions &options) {
  const int dim = coeffs.dim();
  if (variant == SquareVariant::smooth)
    return std::sqrt(SmoothSynthesis(coeffs, eta, options).square_sum(x));
  if (!in_root(x, dim))
    return 0.0;
  auto fam = wavelet_family(dim, coeffs.kappa());
  double s = 0.0;
  if (variant == SquareVariant::plain) {
    std::array<double, kMaxFunctions> vals{};
    const int d = coeffs.poly_dim();
    fam->eval_scaling(DyadicCube::root(dim), x, std::span<double>(vals.data(), d));
    for (int j = 0; j < d; ++j)
      s += std::pow(coeffs.scaling()[j] * vals[j], 2);
    for (int k = 0; k < coeffs.depth(); ++k) {
      const DyadicCube q = locate(x, dim, k);
      fam->eval_wavelets(q, x, std::span<double>(vals.data(), coeffs.block_size()));
      const auto blk = coeffs.block(q);
      for (int a = 0; a < coeffs.block_size(); ++a)
        s += std::pow(blk[a] * vals[a], 2);
    }
    return std::sqrt(s);
  }
  for (int k = 0; k < coeffs.depth(); ++k) {
    const DyadicCube q = locate(x, dim, k);
    if (skeleton_distance(x, q) < eta * q.side()) {
      const auto blk = coeffs.block(q);
      double c2 = 0.0;
      for (double v : blk)
        c2 += v * v;
      s += c2 / q.volume();
    }
  }
  return std::sqrt(s);
}

double halo_fraction(int dim, double eta) {
  const double keep = 1.0 - std::min(1.0, 4.0 * eta);
  return 1.0 - std::pow(keep, dim);
}

double halo_square_l2(const TruncatedExpansion &coeffs, double eta) {
  double wavelet_energy = 0.0;
  const auto v = coeffs.values();
  for (std::size_t i = coeffs.scaling().size(); i < v.size(); ++i)
    wavelet_energy += v[i] * v[i];
  return std::sqrt(wavelet_energy * halo_fraction(coeffs.dim(), eta));
}

namespace {

TruncatedExpansion with_values(const FrameMatrix &m, std::span<const double> v) {
  TruncatedExpansion e(m.dim(), m.kappa(), m.depth());
  std::copy(v.begin(), v.end(), e.values().begin());
  return e;
}

} // namespace

ReproduceReport reproduce(const Function &f, const FrameMatrix &m, double tol, std::span<const double> p_list,
                          int max_iter) {
  const GridTruncation trunc{m.dim(), m.depth()};
  const TruncatedExpansion g = expand(f, trunc, m.kappa());
  const NeumannResult sol = neumann_solve(m, g.values(), tol, max_iter);
  std::vector<double> mc(m.size());
  m.multiply(sol.coeffs, mc);
  const Function projected = synthesize(with_values(m, mc));
  const Function residual = [&](const Point &x) { return projected(x) - f(x); };

  ReproduceReport rep;
  rep.iterations = sol.iterations;
  rep.deviation = deviation(m).value;
  FunctionSample rs{residual, m.dim(), m.depth() + 4, m.kappa() + 6, 0.0};
  FunctionSample fs{f, m.dim(), m.depth() + 4, m.kappa() + 6, 0.0};
  rep.residual_l2 = lp_norm(rs, 2.0) / lp_norm(fs, 2.0);
  for (double p : p_list)
    rep.residual_lp[p] = lp_norm(rs, p) / lp_norm(fs, p);

  const SmoothSynthesis smooth(with_values(m, sol.coeffs), m.eta(), m.options());
  const Function direct = [&](const Point &x) { return smooth(x) - f(x); };
  FunctionSample ds{direct, m.dim(), m.depth() + 4, m.kappa() + 6, m.eta()};
  rep.unprojected_l2 = lp_norm(ds, 2.0) / lp_norm(fs, 2.0);
  return rep;
}

RatioTable frame_ratio_experiment(const std::vector<TestFunction> &tests, std::span<const double> p_list,
                                  const FrameMatrix &m, double tol) {
  RatioTable table;
  table.r_min = std::numeric_limits<double>::infinity();
  table.r_max = 0.0;
  const GridTruncation trunc{m.dim(), m.depth()};
  for (const TestFunction &t : tests) {
    const TruncatedExpansion g = expand(t.f, trunc, m.kappa());
    const NeumannResult sol = neumann_solve(m, g.values(), tol);
    const SmoothSynthesis smooth(with_values(m, sol.coeffs), m.eta(), m.options());
    const Function sq = [&](const Point &x) { return std::sqrt(smooth.square_sum(x)); };
    for (double p : p_list) {
      const double num = lp_norm({sq, m.dim(), m.depth() + 4, m.kappa() + 6, m.eta()}, p);
      const double den = lp_norm({t.f, m.dim(), m.depth() + 4, m.kappa() + 6, 0.0}, p);
      const double r = num / den;
      table.rows.push_back({t.name, p, r});
      table.r_min = std::min(table.r_min, r);
      table.r_max = std::max(table.r_max, r);
    }
  }
  return table;
}

std::vector<double> EtaSweepConfig::etas() const {
  std::vector<double> out;
  for (int b : betas)
    out.push_back(std::ldexp(1.0, -b));
  return out;
}

} // namespace alpertlab
