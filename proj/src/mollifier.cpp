#include "alpertlab/mollifier.hpp"

#include "alpertlab/error.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace alpertlab {

double bump_moment(int dim, int m, const MultiIndex &alpha) {
  // int_B (1-|y|^2)^m y^alpha = prod Gamma((a_i+1)/2) Gamma(m+1) / Gamma((|a|+n)/2 + m + 1)
  double log_num = std::lgamma(m + 1.0);
  for (int i = 0; i < dim; ++i) {
    if (alpha.alpha[i] % 2 != 0)
      return 0.0;
    log_num += std::lgamma((alpha.alpha[i] + 1.0) / 2.0);
  }
  return std::exp(log_num - std::lgamma((alpha.order() + dim) / 2.0 + m + 1.0));
}

int default_smoothness(int kappa) { return kappa + 4; }

namespace {

MultiIndex add(const MultiIndex &a, const MultiIndex &b) {
  MultiIndex s;
  for (int i = 0; i < kMaxDim; ++i)
    s.alpha[i] = a.alpha[i] + b.alpha[i];
  return s;
}

} // namespace

MollifierSpec build_mollifier(int dim, int kappa, int m) {
  if (dim < 1 || dim > kMaxDim)
    throw Error("mollifier: dimension must be 1, 2 or 3");
  if (kappa < 1)
    throw Error("mollifier: kappa must be >= 1");
  if (m < 1)
    throw Error("mollifier: smoothness exponent must be >= 1");

  MollifierSpec spec;
  spec.dim = dim;
  spec.kappa = kappa;
  spec.smoothness = m;
  for (const auto &a : multi_indices(dim, kappa))
    if (a.order() % 2 == 0)
      spec.terms.push_back(a);

  // Odd moments vanish by symmetry; the even ones form a Gram system in the
  // weight (1-|y|^2)^m, which is positive definite.
  const int k = static_cast<int>(spec.terms.size());
  Eigen::MatrixXd gram(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      gram(i, j) = bump_moment(dim, m, add(spec.terms[i], spec.terms[j]));
  rhs(0) = 1.0;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw ConditioningError("mollifier moment system is singular");
  const Eigen::VectorXd c = ldlt.solve(rhs);
  spec.coeffs.assign(c.data(), c.data() + k);

  double residual = 0.0;
  for (const auto &g : multi_indices(dim, kappa)) {
    const double target = g.order() == 0 ? 1.0 : 0.0;
    residual = std::max(residual, std::abs(moment(spec, g) - target));
  }
  spec.moment_residual = residual;
  spec.normalization_verified = residual <= 1e-12;
  return spec;
}

double MollifierSpec::operator()(const Point &y) const {
  double r2 = 0.0;
  for (int i = 0; i < dim; ++i)
    r2 += y[i] * y[i];
  if (r2 >= 1.0)
    return 0.0;
  const double base = 1.0 - r2;
  double w = 1.0;
  for (int i = 0; i < smoothness; ++i)
    w *= base;
  double p = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    double v = coeffs[t];
    for (int i = 0; i < dim; ++i)
      for (int e = 0; e < terms[t].alpha[i]; ++e)
        v *= y[i];
    p += v;
  }
  return w * p;
}

double eval(const MollifierSpec &spec, double delta, const Point &x) {
  Point y{};
  for (int i = 0; i < spec.dim; ++i)
    y[i] = x[i] / delta;
  return spec(y) / std::pow(delta, spec.dim);
}

double moment(const MollifierSpec &spec, const MultiIndex &gamma) {
  double s = 0.0;
  for (std::size_t t = 0; t < spec.terms.size(); ++t)
    s += spec.coeffs[t] * bump_moment(spec.dim, spec.smoothness, add(spec.terms[t], gamma));
  return s;
}

} // namespace alpertlab
