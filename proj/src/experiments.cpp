#include "alpertlab/experiments.hpp"

#include "alpertlab/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace alpertlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> &known_tests() {
  static const std::vector<std::string> names = {"random_expansion", "ball_indicator", "gaussian_bump",
                                                 "alpert_wavelet"};
  return names;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty())
      out.push_back(trim(item));
  return out;
}

long long parse_int(const std::string &key, const std::string &text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size())
      return v;
  } catch (const std::exception &) {
  }
  throw ConfigError("'" + key + "' expects an integer, got '" + text + "'");
}

double parse_double(const std::string &key, const std::string &text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size())
      return v;
  } catch (const std::exception &) {
  }
  throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
}

bool parse_bool(const std::string &key, const std::string &text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on")
    return true;
  if (text == "0" || text == "false" || text == "no" || text == "off")
    return false;
  throw ConfigError("'" + key + "' expects a boolean, got '" + text + "'");
}

int beta_of_eta(const std::string &text) {
  const double eta = parse_double("eta", text);
  if (!(eta > 0.0 && eta < 1.0))
    throw ConfigError("eta must lie in (0, 1), got " + text);
  int e = 0;
  const double mant = std::frexp(eta, &e);
  if (mant != 0.5)
    throw ConfigError("eta must be a power of two, got " + text);
  return 1 - e;
}

std::string cube_label(const DyadicCube &q) {
  std::string s;
  for (int i = 0; i < q.dim; ++i) {
    if (i)
      s += '_';
    s += std::to_string(q.index[i]);
  }
  return s;
}

std::vector<DyadicCube> truncation_cubes(int dim, int depth) {
  std::vector<DyadicCube> out;
  for (int k = 0; k < depth; ++k)
    for (const DyadicCube &q : level_cubes(dim, k))
      out.push_back(q);
  return out;
}

/// A corner cube of level k touching the face x_0 = 0 of the root.
DyadicCube face_cube(int dim, int k) {
  const auto t = static_cast<std::int64_t>(std::floor(0.3 * std::ldexp(1.0, k)));
  std::array<std::int64_t, kMaxDim> idx{};
  for (int i = 1; i < dim; ++i)
    idx[i] = t;
  return DyadicCube::make(dim, k, idx);
}

double block_norm(const SmoothFamily &fam, const DyadicCube &i, const DyadicCube &q) {
  return smooth_inner_block(fam, i, q).norm();
}

/// ||h^eta||_2 of every function of a family (after output scaling), by
/// direct tiled Gauss quadrature of (h^eta)^2 over the eta-expanded root.
/// Independent of the halo bookkeeping used for the raw norms.
std::vector<double> quadrature_norms(const SmoothFamily &fam) {
  const int n = fam.dim(), nf = fam.functions();
  const double tau = std::ldexp(1.0, -fam.min_tile_level());
  const auto lo = static_cast<std::int64_t>(std::floor(-fam.eta() / tau));
  const auto hi = static_cast<std::int64_t>(std::ceil((1.0 + fam.eta()) / tau)) - 1;
  std::vector<double> sq(nf, 0.0);
  std::array<double, kMaxFunctions> vals{};
  std::array<std::int64_t, kMaxDim> k{};
  for (int i = 0; i < n; ++i)
    k[i] = lo;
  while (true) {
    Box tile;
    tile.dim = n;
    for (int i = 0; i < n; ++i) {
      tile.lo[i] = static_cast<double>(k[i]) * tau;
      tile.hi[i] = static_cast<double>(k[i] + 1) * tau;
    }
    const QuadratureRule rule = gauss_rule(fam.halo_order(), tile);
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      fam.smooth(rule.nodes[j], std::span<double>(vals.data(), nf));
      for (int f = 0; f < nf; ++f)
        sq[f] += rule.weights[j] * vals[f] * vals[f];
    }
    int i = n - 1;
    while (i >= 0 && k[i] == hi) {
      k[i] = lo;
      --i;
    }
    if (i < 0)
      break;
    ++k[i];
  }
  for (int f = 0; f < nf; ++f)
    sq[f] = std::sqrt(sq[f]) * fam.output_scale(f);
  return sq;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

} // namespace

std::vector<double> ExperimentConfig::etas() const {
  std::vector<double> out;
  for (int b : betas)
    out.push_back(std::ldexp(1.0, -b));
  return out;
}

SmoothOptions ExperimentConfig::smooth_options() const {
  SmoothOptions o;
  o.smoothness = smoothness();
  o.renormalize = renormalize;
  return o;
}

void apply_setting(ExperimentConfig &cfg, const std::string &raw_key, const std::string &raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  auto as_int = [&] {
    const long long v = parse_int(key, value);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
      throw ConfigError("'" + key + "' is out of range");
    return static_cast<int>(v);
  };
  if (key == "n")
    cfg.n = as_int();
  else if (key == "kappa")
    cfg.kappa = as_int();
  else if (key == "L")
    cfg.L = as_int();
  else if (key == "m")
    cfg.m = as_int();
  else if (key == "beta" || key == "betas") {
    cfg.betas.clear();
    const auto range = value.find("..");
    if (range != std::string::npos) {
      const int lo = static_cast<int>(parse_int(key, trim(value.substr(0, range))));
      const int hi = static_cast<int>(parse_int(key, trim(value.substr(range + 2))));
      if (hi < lo)
        throw ConfigError("empty beta range " + value);
      for (int b = lo; b <= hi; ++b)
        cfg.betas.push_back(b);
    } else {
      for (const auto &item : split_list(value))
        cfg.betas.push_back(static_cast<int>(parse_int(key, item)));
    }
  } else if (key == "eta") {
    cfg.betas.clear();
    for (const auto &item : split_list(value))
      cfg.betas.push_back(beta_of_eta(item));
  } else if (key == "p") {
    cfg.p_list.clear();
    for (const auto &item : split_list(value))
      cfg.p_list.push_back(parse_double(key, item));
  } else if (key == "tol")
    cfg.tol = parse_double(key, value);
  else if (key == "max_iter")
    cfg.max_iter = as_int();
  else if (key == "seed") {
    const long long v = parse_int(key, value);
    if (v < 0)
      throw ConfigError("seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(v);
  } else if (key == "out")
    cfg.out = value;
  else if (key == "renormalize")
    cfg.renormalize = parse_bool(key, value);
  else if (key == "tests")
    cfg.tests = split_list(value);
  else if (key == "ratio_beta")
    cfg.ratio_beta = as_int();
  else if (key == "check_beta")
    cfg.check_beta = as_int();
  else
    throw ConfigError("unknown configuration key '" + key + "'");
}

void load_config_file(ExperimentConfig &cfg, const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.resize(hash);
    if (trim(line).empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void validate(const ExperimentConfig &cfg) {
  if (cfg.n < 1 || cfg.n > 3)
    throw ConfigError("n must be 1, 2 or 3");
  if (cfg.kappa < 1 || cfg.kappa > kMaxKappa)
    throw ConfigError("kappa must lie in [1, 6]");
  const int max_depth = cfg.n == 1 ? 6 : cfg.n == 2 ? 4 : 3;
  if (cfg.L < 1 || cfg.L > max_depth)
    throw ConfigError("L must lie in [1, " + std::to_string(max_depth) + "] for n = " + std::to_string(cfg.n));
  if (cfg.m < 0 || (cfg.m > 0 && cfg.m < cfg.kappa + 2))
    throw ConfigError("m must be at least kappa + 2 (or 0 for the default kappa + 4)");
  if (cfg.betas.empty())
    throw ConfigError("the eta sweep is empty");
  for (int b : cfg.betas)
    if (b < 1 || b > 30)
      throw ConfigError("every eta must be 2^-beta with beta in [1, 30]");
  if (cfg.ratio_beta < 1 || cfg.ratio_beta > 30)
    throw ConfigError("ratio_beta must lie in [1, 30]");
  if (cfg.check_beta < 0 || cfg.check_beta > 30)
    throw ConfigError("check_beta must lie in [1, 30], or 0 for the largest swept eta");
  for (double p : cfg.p_list)
    if (!(p > 1.0 && std::isfinite(p)))
      throw ConfigError("every p must lie in (1, inf)");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0))
    throw ConfigError("tol must lie in (0, 1)");
  if (cfg.max_iter < 1)
    throw ConfigError("max_iter must be positive");
  if (cfg.out.empty())
    throw ConfigError("out must name a directory");
  if (cfg.tests.empty())
    throw ConfigError("the test set is empty");
  std::set<std::string> seen;
  for (const auto &t : cfg.tests) {
    if (std::find(known_tests().begin(), known_tests().end(), t) == known_tests().end())
      throw ConfigError("unknown test function '" + t + "'");
    if (!seen.insert(t).second)
      throw ConfigError("test function '" + t + "' listed twice");
  }
}

std::vector<TestFunction> selected_tests(const ExperimentConfig &cfg) {
  const auto all = standard_test_set(cfg.n, cfg.kappa, cfg.L, cfg.seed);
  std::vector<TestFunction> out;
  for (const auto &name : cfg.tests)
    for (const auto &t : all)
      if (t.name == name)
        out.push_back(t);
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error("loglog_slope needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0))
      return kNaN;
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double gamma_p(double p) {
  if (!(p > 1.0))
    throw Error("gamma_p needs p > 1");
  if (p > 2.0)
    return 1.0 / (2.0 * (p - 1.0));
  if (p == 2.0)
    return 0.5;
  return (p - 1.0) / (p * (3.0 - p));
}

// ---------------------------------------------------------------- verify

std::vector<VerifyRow> run_verify_wavelets(const ExperimentConfig &cfg) {
  validate(cfg);
  const int n = cfg.n, kappa = cfg.kappa;
  const SmoothOptions opts = cfg.smooth_options();
  const auto plain_family = wavelet_family(n, kappa);
  const int nf = plain_family->wavelet_count();
  const auto alphas = multi_indices(n, kappa);

  std::vector<int> betas = cfg.betas;
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
  // Norms, supports and moments at one eta (by default the widest halo);
  // gradients over the sweep.
  const double check_eta = std::ldexp(1.0, -(cfg.check_beta > 0 ? cfg.check_beta : betas.front()));
  const auto check_family = smooth_family(n, kappa, check_eta, false, opts);
  const std::vector<double> smooth_norms = quadrature_norms(*check_family);

  // Renormalizing scales each function by 1 + O(eta), which cannot move a
  // log-log slope, and its halo integral costs O(1/eta) at small eta. The
  // sweep therefore uses the raw convolutions.
  SmoothOptions raw = opts;
  raw.renormalize = false;
  std::vector<double> inv_eta;
  std::vector<std::vector<double>> sup[2];
  for (int b : betas) {
    const double eta = std::ldexp(1.0, -b);
    inv_eta.push_back(1.0 / eta);
    const auto fam = smooth_family(n, kappa, eta, false, raw);
    for (int m = 0; m < 2; ++m)
      sup[m].push_back(grad_sup_family(*fam, m));
  }
  std::vector<double> slope[2];
  for (int m = 0; m < 2; ++m)
    for (int a = 0; a < nf; ++a) {
      std::vector<double> y;
      for (const auto &s : sup[m])
        y.push_back(s[a]);
      // Transport multiplies every value by the same constant, so the slope
      // is shared by all cubes.
      slope[m].push_back(betas.size() >= 2 ? loglog_slope(inv_eta, y) : kNaN);
    }

  std::vector<VerifyRow> rows;
  SplitMix64 rng(cfg.seed);
  constexpr int kSupportSamples = 10000;
  std::array<double, kMaxFunctions> vals{};
  for (const DyadicCube &q : truncation_cubes(n, cfg.L)) {
    const std::string label = cube_label(q);

    // Support: sample the shell between (1 + eta) Q and (1 + 2 eta) Q in
    // local coordinates and evaluate the convolution there.
    std::vector<double> outside(nf, 0.0);
    for (int s = 0; s < kSupportSamples;) {
      Point u{};
      bool out = false;
      for (int i = 0; i < n; ++i) {
        u[i] = rng.uniform(-2.0 * check_eta, 1.0 + 2.0 * check_eta);
        out = out || u[i] < -check_eta || u[i] > 1.0 + check_eta;
      }
      if (!out)
        continue;
      ++s;
      check_family->smooth_quadrature(u, std::span<double>(vals.data(), nf));
      for (int a = 0; a < nf; ++a)
        outside[a] = std::max(outside[a], std::abs(vals[a]) / std::sqrt(q.volume()));
    }

    for (int a = 0; a < nf; ++a) {
      const PiecewisePolynomial h = plain_family->wavelet(q, a);
      double norm2 = 0.0;
      for (const auto &piece : h.pieces)
        norm2 += integrate([&](const Point &x) { return piece(x) * piece(x); }, piece.reference, kappa + 1);
      rows.push_back({q.level, label, a, "unit_norm", std::abs(std::sqrt(norm2) - 1.0), 1e-10,
                      std::abs(std::sqrt(norm2) - 1.0) <= 1e-10});

      // Transport preserves L^2 norms, so the root value serves every cube.
      const SmoothWavelet sw = make_smooth_wavelet(q, a, kappa, check_eta, opts);
      const double drift = std::abs(smooth_norms[a] - 1.0);
      if (cfg.renormalize)
        rows.push_back({q.level, label, a, "unit_norm_smooth", drift, 1e-10, drift <= 1e-10});
      else
        rows.push_back({q.level, label, a, "norm_drift_smooth", drift, kNaN, true});

      rows.push_back({q.level, label, a, "support", outside[a], 0.0, outside[a] == 0.0});

      double plain_moment = 0.0, smooth_mom = 0.0;
      for (const MultiIndex &alpha : alphas) {
        auto mono = [&](const Point &x) {
          double v = 1.0;
          for (int i = 0; i < n; ++i)
            v *= std::pow(x[i], alpha.alpha[i]);
          return v;
        };
        double pm = 0.0;
        for (const auto &piece : h.pieces)
          pm += integrate([&](const Point &x) { return piece(x) * mono(x); }, piece.reference,
                          (kappa + alpha.order()) / 2 + 2);
        plain_moment = std::max(plain_moment, std::abs(pm));
        smooth_mom = std::max(smooth_mom, std::abs(smooth_moment(sw, alpha)));
      }
      rows.push_back({q.level, label, a, "moments", plain_moment, 1e-8, plain_moment <= 1e-8});
      rows.push_back({q.level, label, a, "moments_smooth", smooth_mom, 1e-8, smooth_mom <= 1e-8});

      for (int m = 0; m < 2; ++m) {
        const double s = slope[m][a];
        rows.push_back({q.level, label, a, "grad_sup_slope_m" + std::to_string(m), s, static_cast<double>(m),
                        std::abs(s - m) <= 0.2});
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------- decay

std::vector<DecayRow> run_inner_decay(const ExperimentConfig &cfg) {
  validate(cfg);
  const int n = cfg.n, kappa = cfg.kappa;
  const SmoothOptions opts = cfg.smooth_options();
  const DyadicCube root = DyadicCube::root(n);
  std::vector<DecayRow> rows;

  auto close_case = [&](std::size_t first, const std::vector<double> &x, const std::vector<double> &y,
                        double expected, bool two_sided, bool asserted) {
    const double s = loglog_slope(x, y);
    const bool ok = !asserted || (two_sided ? std::abs(s - expected) <= 0.25 : s >= expected - 0.25);
    for (std::size_t i = first; i < rows.size(); ++i) {
      rows[i].slope = s;
      rows[i].expected = expected;
      rows[i].pass = ok;
    }
  };

  std::vector<int> betas = cfg.betas;
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
  if (betas.size() < 2)
    throw ConfigError("inner-decay needs at least two eta values");

  // Diagonal: |<h_I^eta, h_I> - delta| ~ eta.
  {
    const std::size_t first = rows.size();
    std::vector<double> x, y;
    for (int b : betas) {
      const double eta = std::ldexp(1.0, -b);
      const auto fam = smooth_family(n, kappa, eta, false, opts);
      const Eigen::MatrixXd blk = smooth_inner_block(*fam, root, root);
      const double v = (blk - Eigen::MatrixXd::Identity(blk.rows(), blk.cols())).norm();
      rows.push_back({"diagonal", b, eta, eta, v, 0, 0, true});
      x.push_back(eta);
      y.push_back(v);
    }
    close_case(first, x, y, 1.0, true, true);
  }

  // Siblings: bounded by C eta.
  {
    const std::size_t first = rows.size();
    const DyadicCube i = DyadicCube::make(n, 1, {0, 0, 0});
    const DyadicCube q = DyadicCube::make(n, 1, {1, 0, 0});
    std::vector<double> x, y;
    double c = 0.0;
    for (int b : betas) {
      const double eta = std::ldexp(1.0, -b);
      const auto fam = smooth_family(n, kappa, eta, false, opts);
      const double v = block_norm(*fam, i, q);
      rows.push_back({"sibling", b, eta, eta, v, 0, 0, true});
      x.push_back(eta);
      y.push_back(v);
      c = std::max(c, v / eta);
    }
    close_case(first, x, y, 1.0, false, true);
    rows.push_back({"sibling_constant", 0, kNaN, kNaN, c, kNaN, kNaN, true});
  }

  // Carleson cube I of Q = root, shrinking: exponent n/2 + 1 in l(I)/l(Q).
  {
    const int b = 4;
    const double eta = std::ldexp(1.0, -b);
    const auto fam = smooth_family(n, kappa, eta, false, opts);
    const std::size_t first = rows.size();
    std::vector<double> x, y;
    for (int k = 2; k <= 6; ++k) {
      const double r = std::ldexp(1.0, -k);
      const double v = block_norm(*fam, face_cube(n, k), root);
      rows.push_back({"carleson_small_I", b, eta, r, v, 0, 0, true});
      x.push_back(r);
      y.push_back(v);
    }
    close_case(first, x, y, n / 2.0 + 1.0, true, true);
  }

  // Q a Carleson cube of I = root, shrinking with eta << l(Q): exponent
  // n/2 - 1, which is 0 at n = 2 and not asserted there.
  {
    const int kmax = n == 3 ? 4 : 6;
    const int b = kmax + 2;
    const double eta = std::ldexp(1.0, -b);
    const auto fam = smooth_family(n, kappa, eta, false, opts);
    const std::size_t first = rows.size();
    std::vector<double> x, y;
    for (int k = 2; k <= kmax; ++k) {
      const double r = std::ldexp(1.0, -k);
      const double v = block_norm(*fam, root, face_cube(n, k));
      rows.push_back({"carleson_small_Q", b, eta, r, v, 0, 0, true});
      x.push_back(r);
      y.push_back(v);
    }
    close_case(first, x, y, n / 2.0 - 1.0, true, n != 2);
  }

  // Tiny Q inside the halo of I = root: exponent kappa + n/2.
  {
    const int b = 2;
    const double eta = std::ldexp(1.0, -b);
    const auto fam = smooth_family(n, kappa, eta, false, opts);
    const Point x0{0.5 - 0.3 * eta, 0.3, 0.3};
    const std::size_t first = rows.size();
    std::vector<double> x, y;
    const int kmax = n == 3 ? b + 3 : b + 5;
    for (int k = b + 1; k <= kmax; ++k) {
      const double r = std::ldexp(1.0, -k);
      const double v = block_norm(*fam, root, locate(x0, n, k));
      rows.push_back({"nested_tiny_Q", b, eta, r, v, 0, 0, true});
      x.push_back(r);
      y.push_back(v);
    }
    close_case(first, x, y, kappa + n / 2.0, true, true);
  }

  // Zero cases: disjoint enlarged supports, and Q inside a child of I away
  // from the halo, where h_I^eta is a single polynomial.
  {
    const DyadicCube far_i = DyadicCube::make(n, 2, {0, 0, 0});
    const DyadicCube far_q = DyadicCube::make(n, 2, {3, 0, 0});
    std::array<std::int64_t, kMaxDim> mid{};
    for (int i = 0; i < n; ++i)
      mid[i] = 1;
    const DyadicCube inner_q = DyadicCube::make(n, 3, mid);
    for (int b : betas) {
      const double eta = std::ldexp(1.0, -b);
      const auto fam = smooth_family(n, kappa, eta, false, opts);
      const double v1 = block_norm(*fam, far_i, far_q);
      rows.push_back({"zero_disjoint", b, eta, eta, v1, kNaN, 0.0, v1 == 0.0});
      if (eta <= 0.125) {
        const double v2 = block_norm(*fam, root, inner_q);
        rows.push_back({"zero_interior", b, eta, eta, v2, kNaN, 0.0, v2 == 0.0});
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------- frame

std::vector<FrameRow> run_frame(const ExperimentConfig &cfg, FrameSummary *summary_out) {
  validate(cfg);
  const int n = cfg.n, kappa = cfg.kappa;
  const SmoothOptions opts = cfg.smooth_options();
  const GridTruncation trunc{n, cfg.L};
  const auto tests = selected_tests(cfg);
  std::vector<int> betas = cfg.betas;
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());

  std::vector<double> lp_list;
  for (double p : sorted_unique(cfg.p_list))
    if (p != 2.0)
      lp_list.push_back(p);

  std::vector<FrameRow> rows;
  FrameSummary summary;

  // Parseval for the plain square function (eta plays no role).
  for (const auto &t : tests) {
    if (!t.in_span)
      continue;
    const TruncatedExpansion c = expand(t.f, trunc, kappa);
    const Function sq = [&](const Point &x) { return square_function(c, x, SquareVariant::plain); };
    const double num = lp_norm({sq, n, cfg.L + 4, kappa + 6, 0.0}, 2.0);
    const double den = lp_norm({t.f, n, cfg.L + 4, kappa + 6, 0.0}, 2.0);
    const double r = num / den;
    rows.push_back({0, kNaN, "parseval", t.name, 2.0, r, 1e-8, std::abs(r - 1.0) <= 1e-8});
  }

  std::optional<FrameMatrix> ratio_matrix;
  for (int b : betas) {
    const double eta = std::ldexp(1.0, -b);
    FrameMatrix m = assemble(trunc, eta, kappa, opts);
    const DeviationReport d = deviation(m);
    const DeviationReport dt = deviation(m, true);
    summary.etas.push_back(eta);
    summary.deviations.push_back(d.value);
    summary.deviations_transpose.push_back(dt.value);
    rows.push_back({b, eta, "deviation", "", 2.0, d.value, kNaN, true});
    rows.push_back({b, eta, "deviation_transpose", "", 2.0, dt.value, kNaN, true});
    const double gap = std::abs(d.value - dt.value);
    rows.push_back({b, eta, "transpose_gap", "", 2.0, gap, 1e-6, gap <= 1e-6});
    rows.push_back({b, eta, "density", "", kNaN, m.stats().density, kNaN, true});

    std::vector<std::pair<std::string, double>> residuals;
    if (d.value < 1.0) {
      for (const auto &t : tests) {
        ReproduceReport rep;
        try {
          rep = reproduce(t.f, m, cfg.tol, lp_list, cfg.max_iter);
        } catch (const DivergenceError &) {
          rows.push_back({b, eta, "neumann_diverged", t.name, 2.0, 1.0, 0.0, false});
          continue;
        }
        residuals.emplace_back(t.name, rep.residual_l2);
        rows.push_back({b, eta, "neumann_iterations", t.name, 2.0, static_cast<double>(rep.iterations), kNaN, true});
        const double l2_bound = t.in_span ? 1e-6 : kNaN;
        rows.push_back({b, eta, "reproduce", t.name, 2.0, rep.residual_l2, l2_bound,
                        !t.in_span || rep.residual_l2 <= 1e-6});
        for (double p : lp_list) {
          const double v = rep.residual_lp.at(p);
          rows.push_back({b, eta, "reproduce", t.name, p, v, t.in_span ? 1e-4 : kNaN, !t.in_span || v <= 1e-4});
        }
        rows.push_back({b, eta, "reproduce_unprojected", t.name, 2.0, rep.unprojected_l2, kNaN, true});
      }
    }
    summary.residuals.push_back(std::move(residuals));
    if (b == cfg.ratio_beta)
      ratio_matrix = std::move(m);
  }

  double dmin = std::numeric_limits<double>::infinity(), rise = 0.0;
  for (std::size_t i = 0; i < summary.deviations.size(); ++i) {
    dmin = std::min(dmin, summary.deviations[i]);
    if (i > 0)
      rise = std::max(rise, summary.deviations[i] - summary.deviations[i - 1]);
    if (summary.deviations[i] < 0.5)
      summary.eta0 = std::max(summary.eta0, summary.etas[i]);
  }
  rows.push_back({0, kNaN, "deviation_min", "", 2.0, dmin, 1.0, dmin < 1.0});
  rows.push_back({0, kNaN, "deviation_rise", "", 2.0, rise, 0.0, rise <= 0.0});
  rows.push_back({0, summary.eta0, "eta0", "", 2.0, summary.eta0, kNaN, true});

  // Frame ratios at the configured eta.
  const double ratio_eta = std::ldexp(1.0, -cfg.ratio_beta);
  if (!ratio_matrix)
    ratio_matrix = assemble(trunc, ratio_eta, kappa, opts);
  if (deviation(*ratio_matrix).value < 1.0) {
    const RatioTable table = frame_ratio_experiment(tests, sorted_unique(cfg.p_list), *ratio_matrix, cfg.tol);
    for (const auto &r : table.rows)
      rows.push_back({cfg.ratio_beta, ratio_eta, "frame_ratio", r.function, r.p, r.ratio, kNaN, true});
    summary.r_min = table.r_min;
    summary.r_max = table.r_max;
    const double spread = table.r_max / table.r_min;
    rows.push_back({cfg.ratio_beta, ratio_eta, "ratio_band", "", kNaN, spread, 10.0, spread <= 10.0});
  } else {
    rows.push_back({cfg.ratio_beta, ratio_eta, "ratio_band", "", kNaN, kNaN, 10.0, false});
  }

  if (summary_out)
    *summary_out = std::move(summary);
  return rows;
}

std::string frame_summary_json(const ExperimentConfig &cfg, const FrameSummary &s) {
  nlohmann::ordered_json j;
  j["n"] = cfg.n;
  j["kappa"] = cfg.kappa;
  j["L"] = cfg.L;
  j["m"] = cfg.smoothness();
  j["eta_list"] = s.etas;
  j["eta0_measured"] = s.eta0 > 0.0 ? nlohmann::ordered_json(s.eta0) : nlohmann::ordered_json(nullptr);
  j["deviations"] = s.deviations;
  auto res = nlohmann::ordered_json::array();
  for (const auto &per_eta : s.residuals) {
    auto obj = nlohmann::ordered_json::object();
    for (const auto &[name, v] : per_eta)
      obj[name] = v;
    res.push_back(obj);
  }
  j["residuals"] = res;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- marcin

std::vector<MarcinRow> run_marcin(const ExperimentConfig &cfg) {
  validate(cfg);
  const int n = cfg.n, kappa = cfg.kappa;
  const GridTruncation trunc{n, cfg.L};
  const auto tests = selected_tests(cfg);
  std::vector<int> betas = cfg.betas;
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
  const auto ps = sorted_unique(cfg.p_list);

  std::vector<MarcinRow> rows;
  for (const auto &t : tests) {
    const TruncatedExpansion c = expand(t.f, trunc, kappa);
    for (double p : ps) {
      const std::size_t first = rows.size();
      const double fnorm = lp_norm({t.f, n, cfg.L + 4, kappa + 6, 0.0}, p);
      std::vector<double> x, y;
      for (int b : betas) {
        const double eta = std::ldexp(1.0, -b);
        double num;
        if (p == 2.0) {
          num = halo_square_l2(c, eta);
        } else {
          // R_eta f is constant on cells of side 2^{-(L-1+beta)}; cap the
          // grid and fall back to a higher order when it is too fine.
          const int exact_level = cfg.L - 1 + b;
          const int cap = 18 / n;
          const int level = std::min(exact_level, cap);
          const Function r = [&](const Point &pt) { return square_function(c, pt, SquareVariant::halo, eta); };
          num = lp_norm({r, n, level, level == exact_level ? 1 : 4, 0.0}, p);
        }
        const double ratio = num / fnorm;
        const double bound = p == 2.0 ? std::sqrt(eta) : kNaN;
        rows.push_back({b, eta, t.name, p, ratio, bound, gamma_p(p), 0.0, p != 2.0 || ratio <= bound});
        x.push_back(eta);
        y.push_back(ratio);
      }
      const double s = x.size() >= 2 ? loglog_slope(x, y) : kNaN;
      for (std::size_t i = first; i < rows.size(); ++i)
        rows[i].fitted_exponent = s;
    }
  }
  return rows;
}

// ---------------------------------------------------------------- output

void write_csv(std::ostream &os, const std::vector<VerifyRow> &rows) {
  os << "level,cube,index,check,value,bound,pass\n";
  for (const auto &r : rows)
    os << r.level << ',' << r.cube << ',' << r.index << ',' << r.check << ',' << format_number(r.value) << ','
       << format_number(r.bound) << ',' << (r.pass ? 1 : 0) << '\n';
}

void write_csv(std::ostream &os, const std::vector<DecayRow> &rows) {
  os << "case,beta,eta,ratio,value,slope,expected,pass\n";
  for (const auto &r : rows)
    os << r.case_name << ',' << r.beta << ',' << format_number(r.eta) << ',' << format_number(r.ratio) << ','
       << format_number(r.value) << ',' << format_number(r.slope) << ',' << format_number(r.expected) << ','
       << (r.pass ? 1 : 0) << '\n';
}

void write_csv(std::ostream &os, const std::vector<FrameRow> &rows) {
  os << "beta,eta,metric,function,p,value,bound,pass\n";
  for (const auto &r : rows)
    os << r.beta << ',' << format_number(r.eta) << ',' << r.metric << ',' << r.function << ',' << format_number(r.p)
       << ',' << format_number(r.value) << ',' << format_number(r.bound) << ',' << (r.pass ? 1 : 0) << '\n';
}

void write_csv(std::ostream &os, const std::vector<MarcinRow> &rows) {
  os << "beta,eta,function,p,ratio,bound,gamma_p,fitted_exponent,pass\n";
  for (const auto &r : rows)
    os << r.beta << ',' << format_number(r.eta) << ',' << r.function << ',' << format_number(r.p) << ','
       << format_number(r.ratio) << ',' << format_number(r.bound) << ',' << format_number(r.gamma) << ','
       << format_number(r.fitted_exponent) << ',' << (r.pass ? 1 : 0) << '\n';
}

namespace {

template <class Row> int write_rows(const ExperimentConfig &cfg, const std::string &file, const std::vector<Row> &rows,
                                    std::ostream &log) {
  const std::filesystem::path path = std::filesystem::path(cfg.out) / file;
  std::ofstream os(path);
  if (!os)
    throw ConfigError("cannot write " + path.string());
  write_csv(os, rows);
  std::size_t failed = 0;
  for (const auto &r : rows)
    failed += r.pass ? 0 : 1;
  log << "wrote " << path.string() << " (" << rows.size() << " rows, " << failed << " failed)\n";
  return failed == 0 ? kExitOk : kExitFailed;
}

} // namespace

int run_command(const std::string &command, const ExperimentConfig &cfg, std::ostream &log) {
  try {
    validate(cfg);
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec)
      throw ConfigError("cannot create output directory " + cfg.out + ": " + ec.message());
    if (command == "verify-wavelets")
      return write_rows(cfg, "verify_wavelets.csv", run_verify_wavelets(cfg), log);
    if (command == "inner-decay")
      return write_rows(cfg, "inner_decay.csv", run_inner_decay(cfg), log);
    if (command == "frame") {
      FrameSummary summary;
      const auto rows = run_frame(cfg, &summary);
      const int code = write_rows(cfg, "frame.csv", rows, log);
      const std::filesystem::path path = std::filesystem::path(cfg.out) / "frame_summary.json";
      std::ofstream os(path);
      if (!os)
        throw ConfigError("cannot write " + path.string());
      os << frame_summary_json(cfg, summary);
      log << "wrote " << path.string() << "\n";
      return code;
    }
    if (command == "marcin")
      return write_rows(cfg, "marcin.csv", run_marcin(cfg), log);
    throw ConfigError("unknown subcommand '" + command + "'");
  } catch (const ConfigError &e) {
    log << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
}

} // namespace alpertlab
