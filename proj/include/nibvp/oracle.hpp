#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "nibvp/discretization.hpp"

namespace nibvp {

// Exact solution of phi_tt = c^2 phi_xx on [a, b] with homogeneous Dirichlet walls.
// phi_dot_ic is the physical velocity d phi / d t. Empty profiles mean zero.
double dalembert(const Profile& phi_ic, const Profile& phi_dot_ic, double x, double t, double c,
                 std::array<double, 2> domain);

struct MolOptions {
  int refinement = 4;       // fine sigma spacing = comparison spacing / refinement
  double cfl = 0.5;         // max |t_dot| dtau_fine / dsigma_fine
  bool trivial_time_map = false;  // freeze t = t_IC + t_dot_IC (tau - tau_i), evolve phi only
  double blowup_factor = 1e6;
  std::string cache_dir;    // empty disables the disk cache
};

// Reference fields on the comparison grid (flat index order).
struct MolReference {
  Vec t, phi, t_dot, phi_dot;
  int fine_n_sigma = 0;
  int substeps = 0;  // fine steps per comparison tau interval
  bool from_cache = false;
  std::string key;
};

MolReference mol_reference(const ProblemSpec& spec, const MolOptions& options = {});

double l2_error(const Vec& a, const Vec& b, const Vec& quadrature);

struct PowerLawFit {
  double alpha = 0.0;
  double beta = 0.0;
};
PowerLawFit fit_convergence(const std::vector<std::pair<double, double>>& points);

struct ErrorNorms {
  double eps_t = 0.0;       // t1 vs MOL t_ref
  double eps_phi = 0.0;     // phi1 vs d'Alembert evaluated at t_ref
  double eps_phi_we = 0.0;  // phi1 vs d'Alembert evaluated at t1
  double eps_phi_mol = 0.0; // phi1 vs MOL phi_ref
};

ErrorNorms error_norms(const Discretization& disc, const StateVector& state, const MolReference& ref);

// d'Alembert field sampled on the grid through a time map t(tau, sigma); time is measured from t_IC.
Vec dalembert_on_map(const ProblemSpec& spec, const Vec& time_map);

// 64-bit FNV-1a, used for cache keys and artifact directory names.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace nibvp
