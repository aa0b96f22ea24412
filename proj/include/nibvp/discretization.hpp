#pragma once

#include <vector>

#include "nibvp/problem.hpp"
#include "nibvp/sbp.hpp"

namespace nibvp {

// Immutable operator set for one ProblemSpec. Safe to share between threads.
class Discretization {
 public:
  explicit Discretization(ProblemSpec spec);

  const ProblemSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return spec_.grid; }
  Layout layout() const { return Layout(spec_.grid); }

  SbpPair pair_tau, pair_sigma;
  SpMat d_tau, d_sigma;             // lifted, unregularized
  SpMat d_tau_T, d_sigma_T;
  AffineOp dt_t;                    // tau derivative of t, penalized with t_IC
  AffineOp dt_phi;                  // tau derivative of phi, penalized with phi_IC
  AffineOp ds_phi;                  // sigma derivative of phi, penalized with the left wall data
  SpMat dt_t_T, dt_phi_T, ds_phi_T; // transposed linear parts
  Vec h;                            // h_tau (x) h_sigma
  SpatialQuadrature quad;

  // Weighted linear constraints K x_primal = b, one row per multiplier in flat order.
  SpMat constraints;
  Vec constraint_rhs;

  // Multiplier entries whose constraint rows duplicate a wall condition at the
  // corners; they are held at zero so the stationarity system is nonsingular.
  std::vector<int> pinned;

 private:
  ProblemSpec spec_;
};

}  // namespace nibvp
