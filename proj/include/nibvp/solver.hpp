#pragma once

#include <string>
#include <vector>

#include "nibvp/discretization.hpp"
#include "nibvp/noether.hpp"

namespace nibvp {

struct SolverOptions {
  double tolerance = 1e-10;       // flat gradient infinity norm
  double step_tolerance = 1e-11;  // Newton step, relative to max(1, |x|_inf)
  int max_iterations = 50;
  int max_backtracks = 30;
  double armijo = 1e-4;
  double levenberg_initial = 1e-8;
  double levenberg_max = 1e8;
  int verbosity = 0;
};

struct SolveReport {
  bool converged = false;
  std::string message;
  int iterations = 0;  // accepted steps
  double final_residual = 0.0;
  std::vector<double> residual_history;  // infinity norm, one entry per accepted state
  std::vector<double> step_history;
  int levenberg_steps = 0;
  double condition_estimate = 0.0;
  double wall_time = 0.0;
  std::vector<std::string> warnings;
  StateVector state;
  ChargeSeries charges;
};

// Decoupled warm start: t = t_IC + t_dot_IC (tau - tau_i), phi from the d'Alembert oracle
// through that map, multipliers from a least-squares fit of the primal stationarity rows.
StateVector precondition(const Discretization& disc);
StateVector precondition(const ProblemSpec& spec);

StateVector solve_stationarity_system(const Discretization& disc, const StateVector& start,
                                      const SolverOptions& options, SolveReport* report = nullptr);

SolveReport solve(const Discretization& disc, const SolverOptions& options);
SolveReport solve(const ProblemSpec& spec, const SolverOptions& options);

}  // namespace nibvp
