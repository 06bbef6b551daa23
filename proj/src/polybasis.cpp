#include "alpertlab/polybasis.hpp"

#include "alpertlab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace alpertlab {

std::vector<MultiIndex> multi_indices(int dim, int kappa) {
  if (dim < 1 || dim > kMaxDim || kappa < 1)
    throw Error("multi_indices: need 1 <= n <= 3 and kappa >= 1");
  std::vector<MultiIndex> out;
  for (int deg = 0; deg < kappa; ++deg) {
    std::vector<MultiIndex> level;
    if (dim == 1) {
      level.push_back({{deg, 0, 0}});
    } else if (dim == 2) {
      for (int a = deg; a >= 0; --a)
        level.push_back({{a, deg - a, 0}});
    } else {
      for (int a = deg; a >= 0; --a)
        for (int b = deg - a; b >= 0; --b)
          level.push_back({{a, b, deg - a - b}});
    }
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

int poly_space_dim(int dim, int kappa) {
  // C(n + kappa - 1, n)
  long num = 1, den = 1;
  for (int i = 1; i <= dim; ++i) {
    num *= kappa - 1 + i;
    den *= i;
  }
  return static_cast<int>(num / den);
}

MonomialBasis::MonomialBasis(int dim, int kappa)
    : dim_(dim), kappa_(kappa), indices_(multi_indices(dim, kappa)) {}

int MonomialBasis::find(const MultiIndex &alpha) const {
  for (int k = 0; k < size(); ++k)
    if (indices_[k] == alpha)
      return k;
  return -1;
}

void MonomialBasis::evaluate(const Point &x, const Point &centre, std::span<double> out) const {
  // powers[i][p] = (x_i - c_i)^p
  std::array<std::array<double, 16>, kMaxDim> powers{};
  for (int i = 0; i < dim_; ++i) {
    const double t = x[i] - centre[i];
    powers[i][0] = 1.0;
    for (int p = 1; p < kappa_; ++p)
      powers[i][p] = powers[i][p - 1] * t;
  }
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    const auto &a = indices_[k].alpha;
    double v = powers[0][a[0]];
    if (dim_ > 1)
      v *= powers[1][a[1]];
    if (dim_ > 2)
      v *= powers[2][a[2]];
    out[k] = v;
  }
}

double box_monomial_moment(const MultiIndex &alpha, const Box &box, const Point &centre) {
  double m = 1.0;
  for (int i = 0; i < box.dim; ++i) {
    const int e = alpha.alpha[i] + 1;
    const double b = box.hi[i] - centre[i];
    const double a = box.lo[i] - centre[i];
    m *= (std::pow(b, e) - std::pow(a, e)) / e;
  }
  return m;
}

double box_monomial_moment(const MultiIndex &alpha, const Box &box) {
  return box_monomial_moment(alpha, box, box.centre());
}

double PolynomialRep::operator()(const Point &x) const {
  MonomialBasis basis(dim, kappa);
  std::vector<double> m(basis.size());
  basis.evaluate(x, centre, m);
  double v = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k)
    v += coeffs[k] * m[k];
  return v;
}

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

} // namespace

PolynomialRep PolynomialRep::recentred(const Point &new_centre) const {
  // (x - c)^a = ((x - c') + s)^a with s = c' - c, expanded binomially.
  MonomialBasis basis(dim, kappa);
  PolynomialRep out = *this;
  out.centre = new_centre;
  std::fill(out.coeffs.begin(), out.coeffs.end(), 0.0);
  Point shift{};
  for (int i = 0; i < dim; ++i)
    shift[i] = new_centre[i] - centre[i];
  const auto &idx = basis.indices();
  for (int k = 0; k < basis.size(); ++k) {
    if (coeffs[k] == 0.0)
      continue;
    const auto &a = idx[k].alpha;
    for (int t = 0; t < basis.size(); ++t) {
      const auto &b = idx[t].alpha;
      bool below = true;
      double factor = coeffs[k];
      for (int i = 0; i < dim && below; ++i) {
        if (b[i] > a[i]) {
          below = false;
          break;
        }
        factor *= binomial(a[i], b[i]) * std::pow(shift[i], a[i] - b[i]);
      }
      if (below)
        out.coeffs[t] += factor;
    }
  }
  return out;
}

double exact_inner(const PolynomialRep &p, const PolynomialRep &q, const Box &box) {
  const Point c = box.centre();
  const PolynomialRep pc = p.recentred(c);
  const PolynomialRep qc = q.recentred(c);
  MonomialBasis bp(p.dim, p.kappa), bq(q.dim, q.kappa);
  double s = 0.0;
  for (int i = 0; i < bp.size(); ++i) {
    if (pc.coeffs[i] == 0.0)
      continue;
    for (int j = 0; j < bq.size(); ++j) {
      MultiIndex ab;
      for (int a = 0; a < kMaxDim; ++a)
        ab.alpha[a] = bp.indices()[i].alpha[a] + bq.indices()[j].alpha[a];
      s += pc.coeffs[i] * qc.coeffs[j] * box_monomial_moment(ab, box, c);
    }
  }
  return s;
}

std::vector<PolynomialRep> orthonormal_poly_basis(const Box &box, int kappa) {
  MonomialBasis basis(box.dim, kappa);
  const int d = basis.size();
  const Point c = box.centre();
  Eigen::MatrixXd gram(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      MultiIndex ab;
      for (int a = 0; a < kMaxDim; ++a)
        ab.alpha[a] = basis.indices()[i].alpha[a] + basis.indices()[j].alpha[a];
      gram(i, j) = box_monomial_moment(ab, box, c);
    }
  // Equilibrate before factoring so fine boxes do not underflow the pivots.
  Eigen::VectorXd scale = gram.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd scaled = scale.asDiagonal() * gram * scale.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("monomial Gram matrix is not positive definite");
  Eigen::MatrixXd lower = llt.matrixL();
  if (lower.diagonal().minCoeff() < 1e-7)
    throw ConditioningError("monomial Gram matrix is numerically singular");
  Eigen::MatrixXd inv = lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
  inv = inv * scale.asDiagonal();

  std::vector<PolynomialRep> out;
  out.reserve(d);
  for (int i = 0; i < d; ++i) {
    PolynomialRep p{box.dim, kappa, c, box, std::vector<double>(d, 0.0)};
    for (int j = 0; j <= i; ++j)
      p.coeffs[j] = inv(i, j);
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

GaussLegendre compute_gauss_legendre(int g) {
  GaussLegendre rule;
  rule.nodes.resize(g);
  rule.weights.resize(g);
  for (int i = 0; i < (g + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (g + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= g; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (g == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = g * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= g; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = g * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[g - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[g - 1 - i] = w;
  }
  if (g % 2 == 1)
    rule.nodes[g / 2] = 0.0;
  return rule;
}

} // namespace

const GaussLegendre &gauss_legendre(int g) {
  if (g < 1 || g > 200)
    throw Error("Gauss-Legendre order must be in [1, 200]");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard lock(mutex);
  auto &slot = cache[g];
  if (!slot) {
    if (g == 1)
      slot = std::make_unique<GaussLegendre>(GaussLegendre{{0.0}, {2.0}});
    else
      slot = std::make_unique<GaussLegendre>(compute_gauss_legendre(g));
  }
  return *slot;
}

QuadratureRule gauss_rule(int g, const Box &box) {
  if (g < 1)
    throw Error("gauss_rule: g must be >= 1");
  const GaussLegendre &gl = gauss_legendre(g);
  QuadratureRule rule;
  rule.per_axis = g;
  std::size_t total = 1;
  for (int i = 0; i < box.dim; ++i)
    total *= static_cast<std::size_t>(g);
  rule.nodes.resize(total);
  rule.weights.resize(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    Point x{};
    double w = 1.0;
    for (int i = box.dim - 1; i >= 0; --i) {
      const std::size_t k = rem % g;
      rem /= g;
      const double half = 0.5 * box.side(i);
      x[i] = box.center(i) + half * gl.nodes[k];
      w *= half * gl.weights[k];
    }
    rule.nodes[flat] = x;
    rule.weights[flat] = w;
  }
  return rule;
}

double integrate(const std::function<double(const Point &)> &f, const QuadratureRule &rule) {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = f(rule.nodes[i]);
    if (!std::isfinite(v))
      throw EvaluationError("integrand is not finite at a quadrature node");
    s += rule.weights[i] * v;
  }
  return s;
}

double integrate(const std::function<double(const Point &)> &f, const Box &box, int g) {
  return integrate(f, gauss_rule(g, box));
}

} // namespace alpertlab
