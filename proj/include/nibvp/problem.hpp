#pragma once

#include <functional>
#include <string>

#include "nibvp/grid.hpp"
#include "nibvp/sbp.hpp"
#include "nibvp/types.hpp"

namespace nibvp {

using Profile = std::function<double(double)>;

// Closed-form initial data. The sampled vectors in ProblemSpec are what the
// discretization consumes; the profiles feed the oracles on finer grids.
struct InitialProfiles {
  Profile phi;
  Profile phi_dot;
  Profile t;
  Profile t_dot;
};

// Pointwise potential V(phi) with first and second derivatives. Empty means V = 0.
struct Potential {
  Profile v;
  Profile dv;
  Profile d2v;
  explicit operator bool() const { return static_cast<bool>(v); }
};

struct ProblemSpec {
  GridSpec grid;
  SbpOrder order = SbpOrder::SBP121;
  double tension = 1e4;
  double wave_speed = 1.0;
  double sigma0 = 1.0;
  Vec phi_ic, phi_dot_ic, t_ic, t_dot_ic;  // n_sigma each
  Vec phi_bc_left, phi_bc_right;           // n_tau each
  Potential potential;
  InitialProfiles profiles;

  void validate() const;
  double inv_tension() const;  // 0 for infinite tension
};

// Samples the profiles on the grid; spatial Dirichlet data is taken constant in
// tau from the corner values of phi.
ProblemSpec make_problem(const GridSpec& grid, SbpOrder order, double tension, double wave_speed,
                         const InitialProfiles& profiles, double sigma0 = 1.0);

InitialProfiles bump_profiles(double t_dot_ic);  // bump sin(pi s) exp(-100 (s-1/2)^2), t_IC = 0
InitialProfiles vacuum_profiles(double t_dot_ic);

// Largest pointwise field energy density 1/2 ((phi_dot/t_dot)^2 + phi'^2) in the initial data,
// with phi' from the sigma SBP operator.
double initial_field_energy_density(const ProblemSpec& spec);

struct Layout {
  int nv = 0;
  int n_tau = 0;
  int n_sigma = 0;

  explicit Layout(const GridSpec& g) : nv(g.total_volume()), n_tau(g.n_tau), n_sigma(g.n_sigma) {}
  int primal_size() const { return 4 * nv; }
  int size() const { return 4 * nv + 8 * n_sigma + 4 * n_tau; }
  // Primal blocks: 0 t1, 1 t2, 2 phi1, 3 phi2.
  int primal(int block) const { return block * nv; }
  // Slice multipliers: 0 lam_t, 1 lam_phi, 2 lamt_t, 3 lamt_phi, 4 gam_t, 5 gam_phi, 6 gamt_t, 7 gamt_phi.
  int slice_mult(int block) const { return 4 * nv + block * n_sigma; }
  // Wall multipliers: 0 kap_phi, 1 kapt_phi, 2 xi_phi, 3 xit_phi.
  int wall_mult(int block) const { return 4 * nv + 8 * n_sigma + block * n_tau; }
};

struct StateVector {
  Vec t1, t2, phi1, phi2;
  Vec lam_t, lam_phi, lamt_t, lamt_phi;
  Vec gam_t, gam_phi, gamt_t, gamt_phi;
  Vec kap_phi, kapt_phi, xi_phi, xit_phi;

  static StateVector zeros(const GridSpec& grid);
  static StateVector unpack(const GridSpec& grid, const Vec& flat);
  Vec pack() const;
  void check(const GridSpec& grid) const;  // dimensions and finiteness
};

}  // namespace nibvp
