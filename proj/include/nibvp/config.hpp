#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nibvp/problem.hpp"
#include "nibvp/solver.hpp"

namespace nibvp {

struct RunConfig {
  // [grid]
  int n_tau = 60;
  int n_sigma = 48;
  std::array<double, 2> tau_interval{0.0, 0.5};
  std::array<double, 2> sigma_interval{0.0, 1.0};
  SbpOrder order = SbpOrder::SBP121;
  // [physics]
  double tension = 1e4;
  double wave_speed = 1.0;
  double sigma0 = 1.0;
  // [initial]
  std::string profile = "bump";  // bump | mode | vacuum
  double amplitude = 1.0;
  double width = 100.0;
  double center = 0.5;
  double phi_dot_amplitude = 0.0;
  double t0 = 0.0;
  double t_dot = 2.5;
  // [solver]
  SolverOptions solver;
  // [sweep]
  std::vector<int> sweep_n_sigma{24, 32, 48, 64, 96};
  std::vector<int> sweep_n_tau;  // empty: derived from sweep_ratio
  double sweep_ratio = 0.9;
  std::vector<double> sweep_t_dot{1.5, 2.0, 2.5};
  int mol_refinement = 4;
  double mol_cfl = 0.5;
  // [output]
  bool gnuplot = false;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg, const std::string& salt = "");

InitialProfiles make_profiles(const RunConfig& cfg);
ProblemSpec build_spec(const RunConfig& cfg);

// t_dot * d_tau / d_sigma; the discrete system needs this at or below about 1.
double marching_ratio(const RunConfig& cfg);

// Convergence grids (n_tau, n_sigma) in sweep order.
std::vector<std::array<int, 2>> sweep_grids(const RunConfig& cfg);

// n_tau for a t_dot sweep entry: keeps t_dot * d_tau at or below the base run's value.
int scaled_n_tau(const RunConfig& cfg, double t_dot);

}  // namespace nibvp
