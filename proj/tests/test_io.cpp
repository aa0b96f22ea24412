#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "nibvp/config.hpp"
#include "nibvp/csv.hpp"
#include "nibvp/error.hpp"
#include "nibvp/experiments.hpp"
#include "nibvp/spectra.hpp"

using namespace nibvp;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Csv, RoundTripIsBitwise) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  Table t{{"a", "b", "c"}, {}};
  for (int k = 0; k < 200; ++k) t.rows.push_back({u(rng), u(rng) * std::pow(10.0, k % 40 - 20), double(k)});
  t.rows.push_back({std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max(), 1.0 / 3.0});
  const fs::path p = fresh_dir("nibvp-csv") / "t.csv";
  write_csv(p, t);
  const Table r = read_csv(p);
  ASSERT_EQ(r.columns, t.columns);
  ASSERT_EQ(r.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(r.rows[i][j], t.rows[i][j]);
}

TEST(Config, DefaultsAreTheHeadlineRun) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c.n_tau, 60);
  EXPECT_EQ(c.n_sigma, 48);
  EXPECT_EQ(c.tension, 1e4);
  EXPECT_EQ(c.t_dot, 2.5);
  EXPECT_EQ(c.order, SbpOrder::SBP121);
  const ProblemSpec spec = build_spec(c);
  EXPECT_NEAR(spec.phi_ic[24], std::sin(M_PI * 24 / 47.0) * std::exp(-100 * std::pow(24 / 47.0 - 0.5, 2)), 1e-15);
  EXPECT_EQ(spec.t_dot_ic[5], 2.5);
  EXPECT_NEAR(marching_ratio(c), 2.5 * 47 / 118.0, 1e-15);
}

TEST(Config, ParsesSectionsAndLists) {
  const RunConfig c = parse_config(
      "# comment\n[grid]\nn_tau = 16\nn_sigma = 24\ntau_interval = [0, 0.25]\norder = \"sbp242\"\n"
      "[physics]\ntension = 1e3\n[initial]\nprofile = \"mode\"\nt_dot = 2.0  # trailing\n"
      "[sweep]\nn_sigma = [24, 32, 48]\nt_dot = [1.0, 2.0]\n[solver]\ntolerance = 1e-9\n");
  EXPECT_EQ(c.n_tau, 16);
  EXPECT_EQ(c.tau_interval[1], 0.25);
  EXPECT_EQ(c.order, SbpOrder::SBP242);
  EXPECT_EQ(c.tension, 1e3);
  EXPECT_EQ(c.profile, "mode");
  EXPECT_EQ(c.sweep_n_sigma.size(), 3u);
  EXPECT_EQ(c.sweep_t_dot[1], 2.0);
  EXPECT_EQ(c.solver.tolerance, 1e-9);
}

TEST(Config, ValidationMessages) {
  try {
    parse_config("[grid]\nn_tau = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("SBP minimum-size rule"), std::string::npos);
  }
  EXPECT_THROW(parse_config("[grid]\norder = \"sbp242\"\nn_sigma = 7\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[physics]\ntension = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\nn_tau = 6.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[sweep]\nn_sigma = [24, 32, 24]\n"), ConfigError);
  EXPECT_THROW(parse_config("[sweep]\nn_sigma = [24, 32]\nn_tau = [40, 40, 40]\n"), ConfigError);
  EXPECT_THROW(parse_config("[initial]\nprofile = \"square\"\n"), ConfigError);
}

TEST(Config, EchoAndHash) {
  const RunConfig a = parse_config("");
  RunConfig b = a;
  const auto j = to_json(a);
  for (const char* s : {"grid", "physics", "initial", "solver", "sweep", "output"}) EXPECT_TRUE(j.contains(s)) << s;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.solver.verbosity = 2;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.tension = 2e4;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a, "run"), config_hash(a, "sweep-tdot"));
}

TEST(Config, SweepGridRules) {
  const RunConfig c;
  const auto g = sweep_grids(c);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g[0], (std::array<int, 2>{33, 24}));
  EXPECT_EQ(g[4], (std::array<int, 2>{133, 96}));
  RunConfig probe = c;
  for (const auto& gr : g) {
    probe.n_tau = gr[0];
    probe.n_sigma = gr[1];
    EXPECT_LE(marching_ratio(probe), 0.9 + 1e-12);
  }
  EXPECT_EQ(scaled_n_tau(c, 1.5), 37);
  EXPECT_EQ(scaled_n_tau(c, 2.0), 49);
  EXPECT_EQ(scaled_n_tau(c, 2.5), 60);
}

TEST(Spectra, ZeroModeCounts) {
  for (int n : {6, 8, 16, 24}) EXPECT_EQ(operator_spectrum(Mat(build_sbp_1d(SbpOrder::SBP121, n, 1.0 / (n - 1)).d_matrix)).zero_modes, 2) << n;
  for (int n : {5, 9, 17}) EXPECT_EQ(operator_spectrum(Mat(build_sbp_1d(SbpOrder::SBP121, n, 1.0 / (n - 1)).d_matrix)).zero_modes, 3) << n;
  for (int n : {8, 12, 16}) EXPECT_EQ(generalized_nullity(Mat(build_sbp_1d(SbpOrder::SBP242, n, 1.0).d_matrix)), 4) << n;
  for (int n : {9, 17}) EXPECT_EQ(generalized_nullity(Mat(build_sbp_1d(SbpOrder::SBP242, n, 1.0).d_matrix)), 3) << n;
}

TEST(Spectra, UnregularizedSpectrumIsImaginary) {
  for (SbpOrder o : {SbpOrder::SBP121, SbpOrder::SBP242})
    for (int n : {8, 16, 24}) {
      const Spectrum s = operator_spectrum(Mat(build_sbp_1d(o, n, 1.0 / (n - 1)).d_matrix));
      EXPECT_LT(s.max_real_nonzero, 1e-12) << to_string(o) << " " << n;
    }
  const Spectrum s5 = operator_spectrum(Mat(build_sbp_1d(SbpOrder::SBP121, 5, 0.25).d_matrix));
  EXPECT_LT(s5.max_real_nonzero, 1e-12);
}

TEST(Spectra, RegularizationRemovesZeroModes) {
  for (SbpOrder o : {SbpOrder::SBP121, SbpOrder::SBP242})
    for (int n : {8, 16, 24}) {
      const SbpPair p = build_sbp_1d(o, n, 1.0 / (n - 1));
      const Mat r = regularized_1d(p);
      EXPECT_GT(min_singular_value(r), 1e-6) << to_string(o) << " " << n;
      const Spectrum s = operator_spectrum(r);
      EXPECT_EQ(s.zero_modes, 0);
      EXPECT_GT(s.min_real, 0.0);
      const Mat aff = affine_extension(r, Vec::Constant(n, -1.0 / p.h_diag[0]).cwiseProduct(Vec::Unit(n, 0)));
      Eigen::EigenSolver<Mat> es(aff, false);
      double closest = 1e300;
      for (auto z : es.eigenvalues()) closest = std::min(closest, std::abs(z - 1.0));
      EXPECT_LT(closest, 1e-12);
    }
}

TEST(Experiments, RunWritesArtifactsAndCaches) {
  const fs::path root = fresh_dir("nibvp-run");
  RunConfig c;
  c.n_tau = 14;
  c.n_sigma = 12;
  c.gnuplot = true;
  const Outcome a = run_command(c, {root, 1, false});
  ASSERT_EQ(a.exit_code, kExitOk) << a.message;
  for (const char* f : {"solution.csv", "charges.csv", "derivatives.csv", "report.json", "charges.gp"})
    EXPECT_TRUE(fs::exists(a.dir / f)) << f;
  EXPECT_FALSE(fs::exists(a.dir / "FAILED"));
  const Table sol = read_csv(a.dir / "solution.csv");
  EXPECT_EQ(sol.columns, (std::vector<std::string>{"tau_idx", "sigma_idx", "tau", "sigma", "t", "x", "phi"}));
  EXPECT_EQ(sol.rows.size(), 14u * 12u);
  EXPECT_EQ(a.summary["config"], to_json(c));
  EXPECT_EQ(a.summary["git_describe"], git_describe());
  EXPECT_TRUE(a.summary.contains("last_slice_tdot_jump"));

  const Outcome b = run_command(c, {root, 1, false});
  EXPECT_TRUE(b.cache_hit);
  EXPECT_EQ(b.dir, a.dir);
  const Outcome f = run_command(c, {root, 1, true});
  EXPECT_FALSE(f.cache_hit);
}

TEST(Experiments, SolverFailureLeavesMarker) {
  const fs::path root = fresh_dir("nibvp-fail");
  RunConfig c;
  c.n_tau = 14;
  c.n_sigma = 12;
  c.solver.max_iterations = 1;
  const Outcome o = run_command(c, {root, 1, false});
  EXPECT_EQ(o.exit_code, kExitSolver);
  EXPECT_TRUE(fs::exists(o.dir / "FAILED"));
  EXPECT_TRUE(fs::exists(o.dir / "report.json"));
  EXPECT_FALSE(run_command(c, {root, 1, false}).cache_hit);
}

TEST(Experiments, SweepNeedsThreeSuccesses) {
  const fs::path root = fresh_dir("nibvp-sweep");
  RunConfig c;
  c.sweep_n_sigma = {8, 10, 12};
  c.sweep_n_tau = {10, 12, 40};
  c.solver.max_iterations = 1;
  const Outcome o = sweep_convergence_command(c, {root, 2, false});
  EXPECT_EQ(o.exit_code, kExitSolver);
  EXPECT_TRUE(fs::exists(o.dir / "FAILED"));
  EXPECT_TRUE(fs::exists(o.dir / "convergence.csv"));
}

TEST(Experiments, TdotSweepVacuumEntry) {
  const fs::path root = fresh_dir("nibvp-tdot");
  RunConfig c;
  c.profile = "vacuum";
  c.n_tau = 10;
  c.n_sigma = 8;
  c.sweep_t_dot = {1.75};
  const Outcome o = sweep_tdot_command(c, {root, 1, false});
  ASSERT_EQ(o.exit_code, kExitOk) << o.message;
  const Table t = read_csv(o.dir / "tdot_sweep.csv");
  EXPECT_EQ(t.columns, (std::vector<std::string>{"t_dot_ic", "n_tau", "q0", "drift", "iterations"}));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_NEAR(t.rows[0][2], 1.75, 1e-13);
  EXPECT_LE(t.rows[0][3], 1e-13);
}

TEST(Experiments, DiagOperators) {
  const fs::path root = fresh_dir("nibvp-diag");
  const Outcome o = diag_operators_command(SbpOrder::SBP121, 16, 24, {root, 1, false});
  ASSERT_EQ(o.exit_code, kExitOk);
  EXPECT_EQ(o.summary["tau"]["zero_modes_lifted"], 2 * 24);
  EXPECT_GT(o.summary["tau"]["regularized_sigma_min"].get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(o.dir / "d_tau.csv"));
  EXPECT_TRUE(fs::exists(o.dir / "eigenvalues_unregularized_tau.csv"));
  EXPECT_TRUE(fs::exists(o.dir / "eigenvalues_regularized_tau.csv"));
  EXPECT_GT(o.summary["tau"]["regularized_min_real"].get<double>(), 0.0);
  const Outcome big = diag_operators_command(SbpOrder::SBP242, 32, 24, {root, 1, false});
  EXPECT_FALSE(fs::exists(big.dir / "eigenvalues_regularized_tau.csv"));
  EXPECT_EQ(big.summary["sigma"]["zero_modes_1d"], 4);
  EXPECT_THROW(diag_operators_command(SbpOrder::SBP121, 65, 10, {root, 1, false}), ConfigError);
}

#ifdef NIBVP_CLI_PATH
TEST(Cli, ExitCodes) {
  const fs::path d = fresh_dir("nibvp-cli");
  {
    std::ofstream(d / "bad.toml") << "[grid]\nn_tau = 3\n";
    std::ofstream(d / "vac.toml") << "[grid]\nn_tau = 10\nn_sigma = 8\n[initial]\nprofile = \"vacuum\"\n";
  }
  const std::string cli = NIBVP_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(cli + " run --config " + (d / "bad.toml").string() + " --out " + d.string() + " 2>/dev/null"), 1);
  EXPECT_EQ(status(cli + " run --config " + (d / "vac.toml").string() + " --out " + d.string() + " >/dev/null"), 0);
  EXPECT_EQ(status(cli + " run --order sbp999 --out " + d.string() + " 2>/dev/null"), 1);
  EXPECT_EQ(status("NOETHER_IBVP_OUT=" + (d / "env").string() + " " + cli + " run --config " + (d / "vac.toml").string() +
                   " >/dev/null"),
            0);
  EXPECT_TRUE(fs::exists(d / "env"));
}
#endif
