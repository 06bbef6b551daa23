// alpertlab <verify-wavelets|inner-decay|frame|marcin> [--config FILE] [--key value ...] [--out DIR]

#include "alpertlab/error.hpp"
#include "alpertlab/experiments.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>
#include <string>

namespace {

// Every configuration key can be overridden on the command line.
const char *const kKeys[] = {"n",   "kappa", "L",    "m",        "beta", "eta",         "p",
                             "tol", "max_iter", "seed", "renormalize", "tests", "ratio_beta", "check_beta"};

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Smooth Alpert wavelet frame experiments"};
  app.require_subcommand(1);

  std::string config_file, out_dir;
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option *> seen;

  const std::pair<const char *, const char *> commands[] = {
      {"verify-wavelets", "norms, supports, moments and gradient scaling of h and h^eta"},
      {"inner-decay", "decay of <h_I^eta, h_Q> in each geometric case"},
      {"frame", "deviation of S_eta, Neumann inversion, reproducing formula, frame ratios"},
      {"marcin", "halo square function R_eta against the eta^(1/2) bound"},
  };
  for (const auto &[name, help] : commands) {
    CLI::App *sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_file, "key=value configuration file");
    sub->add_option("--out", out_dir, "output directory");
    for (const char *key : kKeys)
      sub->add_option(std::string("--") + key, overrides[key], std::string("override '") + key + "'");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return alpertlab::kExitConfig;
  }

  CLI::App *sub = app.get_subcommands().front();
  alpertlab::ExperimentConfig cfg;
  try {
    if (!config_file.empty())
      alpertlab::load_config_file(cfg, config_file);
    for (const char *key : kKeys)
      if (sub->count(std::string("--") + key) > 0)
        alpertlab::apply_setting(cfg, key, overrides[key]);
    if (!out_dir.empty())
      cfg.out = out_dir;
  } catch (const alpertlab::ConfigError &e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return alpertlab::kExitConfig;
  }

  try {
    const int code = alpertlab::run_command(sub->get_name(), cfg, std::cerr);
    if (code == alpertlab::kExitFailed)
      std::cerr << sub->get_name() << ": some checks failed (see the pass column)\n";
    return code;
  } catch (const alpertlab::Error &e) {
    std::cerr << sub->get_name() << ": " << e.what() << "\n";
    return alpertlab::kExitFailed;
  }
}
