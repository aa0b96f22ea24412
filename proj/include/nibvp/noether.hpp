#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nibvp/discretization.hpp"

namespace nibvp {

struct ChargeSeries {
  Vec q_total, q_coord, q_field, q_multiplier;
  double drift = 0.0;
  // Drift recomputed without the multiplier corrections.
  double drift_uncorrected() const;
};

ChargeSeries noether_charge(const Discretization& disc, const StateVector& state);
ChargeSeries noether_charge(const ProblemSpec& spec, const StateVector& state);

// 1/2 H_sigma { (D_tau phi / D_tau t)^2 + (D_sigma phi)^2 } per tau slice, forward branch.
Vec conventional_energy(const Discretization& disc, const StateVector& state);
Vec conventional_energy(const ProblemSpec& spec, const StateVector& state);

struct SolverOptions;

struct DriftRow {
  double t_dot_ic = 0.0;
  int n_tau = 0;
  bool converged = false;
  double q0 = 0.0;
  double drift = 0.0;
  int iterations = 0;
  std::string message;
};

// Builds the spec for one t_dot value; lets callers scale the grid with t_dot.
using SpecFactory = std::function<ProblemSpec(double t_dot_ic)>;

std::vector<DriftRow> noether_drift_sweep(const SpecFactory& make_spec, const std::vector<double>& t_dot_values,
                                          const SolverOptions& options, int jobs = 1);

}  // namespace nibvp
