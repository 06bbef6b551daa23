#pragma once

// Experiment drivers behind the alpertlab command line: configuration, the
// four subcommands, and their CSV/JSON records.
//
// Exit codes: 0 when every check passes, 2 when a scientific check fails,
// 64 for configuration errors.

#include "alpertlab/frame.hpp"
#include "alpertlab/test_functions.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace alpertlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 2;
inline constexpr int kExitConfig = 64;

struct ExperimentConfig {
  int n = 1;
  int kappa = 2;
  int L = 4;
  int m = 0; // mollifier exponent; 0 selects kappa + 4
  std::vector<int> betas = {2, 3, 4, 5, 6};
  std::vector<double> p_list = {1.5, 2.0, 3.0};
  double tol = 1e-10;
  int max_iter = 10000;
  std::uint64_t seed = 20240611;
  std::string out = ".";
  bool renormalize = false;
  std::vector<std::string> tests = {"random_expansion", "ball_indicator", "gaussian_bump", "alpert_wavelet"};
  int ratio_beta = 6; // eta used for the frame-ratio band
  int check_beta = 0; // eta for norm, support and moment checks; 0 selects the largest swept eta

  int smoothness() const { return m > 0 ? m : kappa + 4; }
  std::vector<double> etas() const;
  SmoothOptions smooth_options() const;
};

/// Sets one key from its text value. Lists are comma separated; betas also
/// accept a range "2..6". `eta` takes values that must be powers of two.
void apply_setting(ExperimentConfig &cfg, const std::string &key, const std::string &value);

/// Reads a flat key=value file ('#' starts a comment).
void load_config_file(ExperimentConfig &cfg, const std::string &path);

/// Throws ConfigError on any violated invariant.
void validate(const ExperimentConfig &cfg);

/// The configured subset of the standard test set, in configured order.
std::vector<TestFunction> selected_tests(const ExperimentConfig &cfg);

/// %.17g, with "nan" and "inf" spelled out.
std::string format_number(double v);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double> &x, const std::vector<double> &y);

/// gamma_p: 1/(2(p-1)) for p > 2, 1/2 at p = 2, (p-1)/(p(3-p)) for 1 < p < 2.
double gamma_p(double p);

struct VerifyRow {
  int level = 0;
  std::string cube;
  int index = 0;
  std::string check;
  double value = 0.0;
  double bound = 0.0;
  bool pass = true;
};

struct DecayRow {
  std::string case_name;
  int beta = 0;
  double eta = 0.0;
  double ratio = 0.0; // the swept scale: eta, or a side-length ratio
  double value = 0.0;
  double slope = 0.0;
  double expected = 0.0;
  bool pass = true;
};

struct FrameRow {
  int beta = 0;
  double eta = 0.0;
  std::string metric;
  std::string function;
  double p = 2.0;
  double value = 0.0;
  double bound = 0.0;
  bool pass = true;
};

struct MarcinRow {
  int beta = 0;
  double eta = 0.0;
  std::string function;
  double p = 2.0;
  double ratio = 0.0;
  double bound = 0.0;
  double gamma = 0.0;
  double fitted_exponent = 0.0;
  bool pass = true;
};

struct FrameSummary {
  std::vector<double> etas;
  std::vector<double> deviations;
  std::vector<double> deviations_transpose;
  double eta0 = 0.0; // largest swept eta with deviation < 1/2, 0 if none
  /// residuals[i][function] = relative L^2 reproduce residual at etas[i]
  std::vector<std::vector<std::pair<std::string, double>>> residuals;
  double r_min = 0.0, r_max = 0.0;
};

template <class Row> bool all_pass(const std::vector<Row> &rows) {
  for (const Row &r : rows)
    if (!r.pass)
      return false;
  return true;
}

std::vector<VerifyRow> run_verify_wavelets(const ExperimentConfig &cfg);
std::vector<DecayRow> run_inner_decay(const ExperimentConfig &cfg);
std::vector<FrameRow> run_frame(const ExperimentConfig &cfg, FrameSummary *summary = nullptr);
std::vector<MarcinRow> run_marcin(const ExperimentConfig &cfg);

void write_csv(std::ostream &os, const std::vector<VerifyRow> &rows);
void write_csv(std::ostream &os, const std::vector<DecayRow> &rows);
void write_csv(std::ostream &os, const std::vector<FrameRow> &rows);
void write_csv(std::ostream &os, const std::vector<MarcinRow> &rows);

/// {n, kappa, L, m, eta_list, eta0_measured, deviations, residuals}
std::string frame_summary_json(const ExperimentConfig &cfg, const FrameSummary &summary);

/// Runs a subcommand, writes its files under cfg.out and returns the exit
/// code. Progress lines go to `log`.
int run_command(const std::string &command, const ExperimentConfig &cfg, std::ostream &log);

} // namespace alpertlab
