#pragma once

#include "nibvp/discretization.hpp"

namespace nibvp {

enum class Branch { forward, backward };

// Derivative channels of one branch: a = tau derivative of t, s = sigma derivative of t,
// p = tau derivative of phi, q = sigma derivative of phi.
struct Channels {
  Vec a, s, p, q;
};

Channels branch_channels(const Discretization& disc, const Vec& t, const Vec& phi);
Channels unregularized_channels(const Discretization& disc, const Vec& t, const Vec& phi);

// Pointwise induced metric for G = diag(c^2, -1).
struct InducedMetric {
  double g00, g01, g11;
  double det() const { return g00 * g11 - g01 * g01; }
};
InducedMetric induced_metric(double t_dot, double t_prime, double x_dot, double x_prime, double c);

struct MetricBundle {
  Vec t_dot, t_prime, phi_dot, phi_prime;
  Vec g00, g01, g11;
  Vec det_g;
  Vec adj00, adj01, adj11;
};

MetricBundle metric_bundle(const Discretization& disc, const Vec& t, const Vec& phi, Branch branch);

// Quadratured bulk term of one branch.
double bulk_term(const Discretization& disc, const Vec& t, const Vec& phi);

double evaluate_action(const Discretization& disc, const StateVector& state);
double evaluate_action(const ProblemSpec& spec, const StateVector& state);

// Bulk part only: forward bulk minus backward bulk.
double evaluate_bulk_action(const Discretization& disc, const StateVector& state);

Vec evaluate_gradient(const Discretization& disc, const StateVector& state);
Vec evaluate_gradient(const ProblemSpec& spec, const StateVector& state);
Vec evaluate_gradient(const Discretization& disc, const Vec& flat);

// Full symmetric Hessian of the action in flat order.
SpMat evaluate_hessian(const Discretization& disc, const Vec& flat);

struct ConstraintResiduals {
  double initial_t = 0, initial_phi = 0;
  double initial_dt = 0, initial_dphi = 0;
  double connect_t = 0, connect_phi = 0;
  double connect_dt = 0, connect_dphi = 0;
  double wall_phi1 = 0, wall_phi2 = 0;
  double max() const;
};

ConstraintResiduals constraint_residuals(const Discretization& disc, const StateVector& state);
ConstraintResiduals constraint_residuals(const ProblemSpec& spec, const StateVector& state);

}  // namespace nibvp
