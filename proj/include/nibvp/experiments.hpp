#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nibvp/action.hpp"
#include "nibvp/config.hpp"
#include "nibvp/oracle.hpp"
#include "nibvp/solver.hpp"

namespace nibvp {

// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitSolver = 2 };

std::string git_describe();

struct ReflectionProbe {
  double t_phys = 0.0;   // physical time of the wall hit, measured from t_IC
  int slice = 0;         // tau slice whose mean t is closest to it
  int argmax_sigma = 0;  // sigma index of max |t_dot - t_dot_IC| on that slice
  int wall_distance = 0;
  double peak = 0.0;
};

struct AmrDiagnostics {
  double interior_tdot_range = 0.0;  // max - min of t_dot off the boundary slices and walls
  double last_slice_tdot_jump = 0.0;
  std::vector<ReflectionProbe> probes;
};

AmrDiagnostics amr_diagnostics(const Discretization& disc, const StateVector& state, const RunConfig& cfg);

struct RunResult {
  std::shared_ptr<const Discretization> disc;
  SolveReport solve;
  Vec e_conv;
  ConstraintResiduals constraints;
  bool have_errors = false;
  ErrorNorms errors;
  MolReference reference;
  AmrDiagnostics amr;
  double final_time = 0.0;
  double physical_limit_t = 0.0;    // max |t1 - t2|
  double physical_limit_phi = 0.0;  // max |phi1 - phi2|
  double setup_seconds = 0.0;
  double mol_seconds = 0.0;
  nlohmann::json report;
};

struct RunOptions {
  bool with_errors = true;
  std::string mol_cache_dir;
};

// Whole pipeline in memory: precondition, solve, charges, energies, oracle errors.
RunResult execute_run(const RunConfig& cfg, const RunOptions& options = {});

struct ExperimentOptions {
  std::filesystem::path out_root;
  int jobs = 1;
  bool force = false;
};

// --out if given, else NOETHER_IBVP_OUT, else ./noether-ibvp-out.
std::filesystem::path resolve_output_root(const std::string& flag);

struct Outcome {
  int exit_code = kExitOk;
  std::filesystem::path dir;
  bool cache_hit = false;
  std::string message;
  nlohmann::json summary;
};

Outcome run_command(const RunConfig& cfg, const ExperimentOptions& options);
Outcome sweep_convergence_command(const RunConfig& cfg, const ExperimentOptions& options);
Outcome sweep_tdot_command(const RunConfig& cfg, const ExperimentOptions& options);
Outcome diag_operators_command(SbpOrder order, int n_tau, int n_sigma, const ExperimentOptions& options);

void write_run_artifacts(const std::filesystem::path& dir, const RunResult& result, bool gnuplot);

}  // namespace nibvp
