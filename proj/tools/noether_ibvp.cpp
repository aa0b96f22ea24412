#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nibvp/config.hpp"
#include "nibvp/error.hpp"
#include "nibvp/experiments.hpp"

using namespace nibvp;

namespace {

struct Common {
  std::string config;
  std::string out;
  int jobs = 1;
  bool force = false;
  std::optional<double> tolerance;
  std::optional<std::string> order;
};

void add_common(CLI::App* app, Common& c, bool with_config) {
  if (with_config) {
    app->add_option("--config", c.config, "TOML-style config file (defaults reproduce the headline run)");
    app->add_option("--tolerance", c.tolerance, "solver gradient tolerance");
  }
  app->add_option("--order", c.order, "sbp121 or sbp242");
  app->add_option("--out", c.out, "output root (else $NOETHER_IBVP_OUT, else ./noether-ibvp-out)");
  app->add_option("--jobs", c.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app->add_flag("--force", c.force, "recompute even if the artifact directory exists");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (c.tolerance) cfg.solver.tolerance = *c.tolerance;
  if (c.order) {
    try {
      cfg.order = parse_order(*c.order);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  validate(cfg);
  return cfg;
}

int report(const Outcome& o) {
  std::cout << (o.cache_hit ? "cached " : "") << o.dir.string() << "\n";
  if (o.exit_code != kExitOk) std::cerr << "noether-ibvp: " << o.message << "\n";
  return o.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational space-time solver for a scalar wave coupled to a dynamic time map"};
  app.require_subcommand(1);

  Common run_opt, conv_opt, tdot_opt, diag_opt;
  int diag_n_tau = 16, diag_n_sigma = 24;
  auto* run = app.add_subcommand("run", "solve one configuration and write its artifacts");
  add_common(run, run_opt, true);
  auto* conv = app.add_subcommand("sweep-convergence", "grid refinement study against the reference solutions");
  add_common(conv, conv_opt, true);
  auto* tdot = app.add_subcommand("sweep-tdot", "Noether charge across initial t_dot values");
  add_common(tdot, tdot_opt, true);
  auto* diag = app.add_subcommand("diag-operators", "dump SBP operators and their spectra");
  add_common(diag, diag_opt, false);
  diag->add_option("--n-tau", diag_n_tau, "points in tau");
  diag->add_option("--n-sigma", diag_n_sigma, "points in sigma");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) {
      const RunConfig cfg = resolve(run_opt);
      return report(run_command(cfg, {resolve_output_root(run_opt.out), run_opt.jobs, run_opt.force}));
    }
    if (conv->parsed()) {
      const RunConfig cfg = resolve(conv_opt);
      return report(sweep_convergence_command(cfg, {resolve_output_root(conv_opt.out), conv_opt.jobs, conv_opt.force}));
    }
    if (tdot->parsed()) {
      const RunConfig cfg = resolve(tdot_opt);
      return report(sweep_tdot_command(cfg, {resolve_output_root(tdot_opt.out), tdot_opt.jobs, tdot_opt.force}));
    }
    SbpOrder order = SbpOrder::SBP121;
    if (diag_opt.order) {
      try {
        order = parse_order(*diag_opt.order);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    return report(diag_operators_command(order, diag_n_tau, diag_n_sigma,
                                         {resolve_output_root(diag_opt.out), diag_opt.jobs, diag_opt.force}));
  } catch (const ConfigError& e) {
    std::cerr << "noether-ibvp: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "noether-ibvp: " << e.what() << "\n";
    return kExitSolver;
  }
}
