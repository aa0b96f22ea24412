#include "nibvp/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>

#include "nibvp/csv.hpp"
#include "nibvp/error.hpp"
#include "nibvp/noether.hpp"
#include "nibvp/parallel.hpp"
#include "nibvp/spectra.hpp"

#ifndef NIBVP_GIT_DESCRIBE
#define NIBVP_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace nibvp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  return json::parse(in);
}

// NaN and infinities are not valid JSON numbers.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void mark_failed(const fs::path& dir, const std::string& message) {
  write_text(dir / "FAILED", message + "\n");
}

// Cached result of an earlier invocation, if present and complete.
bool cached(const fs::path& dir, const std::string& summary_name, bool force, Outcome& out) {
  const fs::path summary = dir / summary_name;
  if (force || !fs::exists(summary) || fs::exists(dir / "FAILED")) return false;
  out.dir = dir;
  out.cache_hit = true;
  out.summary = read_json(summary);
  out.exit_code = out.summary.value("exit_code", 0);
  out.message = "cache hit: " + dir.string();
  return true;
}

fs::path prepare_dir(const fs::path& dir) {
  fs::create_directories(dir);
  fs::remove(dir / "FAILED");
  return dir;
}

Table operator_table(const SpMat& m) {
  Table t{{"row", "col", "value"}, {}};
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      t.rows.push_back({double(it.row()), double(it.col()), it.value()});
  return t;
}

Table eigen_table(const std::vector<std::complex<double>>& ev) {
  Table t{{"index", "re", "im", "modulus"}, {}};
  for (std::size_t k = 0; k < ev.size(); ++k)
    t.rows.push_back({double(k), ev[k].real(), ev[k].imag(), std::abs(ev[k])});
  return t;
}

json constraints_json(const ConstraintResiduals& c) {
  return json{{"initial_t", c.initial_t},     {"initial_phi", c.initial_phi}, {"initial_dt", c.initial_dt},
              {"initial_dphi", c.initial_dphi}, {"connect_t", c.connect_t},   {"connect_phi", c.connect_phi},
              {"connect_dt", c.connect_dt},   {"connect_dphi", c.connect_dphi}, {"wall_phi1", c.wall_phi1},
              {"wall_phi2", c.wall_phi2},     {"max", c.max()}};
}

json amr_json(const AmrDiagnostics& a) {
  json probes = json::array();
  for (const auto& p : a.probes)
    probes.push_back({{"t_phys", p.t_phys}, {"slice", p.slice}, {"argmax_sigma", p.argmax_sigma},
                      {"wall_distance", p.wall_distance}, {"peak", p.peak}});
  return json{{"interior_tdot_range", a.interior_tdot_range}, {"reflections", probes}};
}

json report_json(const RunConfig& cfg, const RunResult& r, int exit_code) {
  const SolveReport& s = r.solve;
  json j;
  j["status"] = s.converged ? "converged" : "failed";
  j["exit_code"] = exit_code;
  j["message"] = s.message;
  j["iterations"] = s.iterations;
  j["final_residual"] = num(s.final_residual);
  j["residual_history"] = s.residual_history;
  j["step_history"] = s.step_history;
  j["levenberg_steps"] = s.levenberg_steps;
  j["condition_estimate"] = num(s.condition_estimate);
  j["q0"] = num(s.charges.q_total.size() ? s.charges.q_total[0] : std::nan(""));
  j["drift"] = num(s.charges.drift);
  j["drift_uncorrected"] = num(s.charges.drift_uncorrected());
  j["final_time"] = num(r.final_time);
  j["cfl_ratio"] = marching_ratio(cfg);
  j["last_slice_tdot_jump"] = num(r.amr.last_slice_tdot_jump);
  j["physical_limit"] = {{"t", num(r.physical_limit_t)}, {"phi", num(r.physical_limit_phi)}};
  j["constraints"] = constraints_json(r.constraints);
  if (r.e_conv.size()) {
    j["e_conv"] = {{"initial", r.e_conv[0]},
                   {"max_deviation", (r.e_conv.array() - r.e_conv[0]).abs().maxCoeff()}};
  }
  if (r.have_errors) {
    j["errors"] = {{"eps_t", r.errors.eps_t},
                   {"eps_phi", r.errors.eps_phi},
                   {"eps_phi_we", r.errors.eps_phi_we},
                   {"eps_phi_mol", r.errors.eps_phi_mol}};
    j["mol"] = {{"fine_n_sigma", r.reference.fine_n_sigma},
                {"substeps", r.reference.substeps},
                {"from_cache", r.reference.from_cache},
                {"key", r.reference.key}};
  }
  j["amr"] = amr_json(r.amr);
  j["timings"] = {{"setup", r.setup_seconds}, {"solve", s.wall_time}, {"mol", r.mol_seconds}};
  j["warnings"] = s.warnings;
  j["config"] = to_json(cfg);
  j["git_describe"] = git_describe();
  return j;
}

void write_gnuplot(const fs::path& dir) {
  write_text(dir / "charges.gp",
             "set datafile separator ','\n"
             "set key autotitle columnhead\n"
             "set xlabel 'tau'\n"
             "plot 'charges.csv' using 2:3 with linespoints title 'Q', \\\n"
             "     'charges.csv' using 2:7 with lines title 'E_conv'\n"
             "pause -1\n");
  write_text(dir / "solution.gp",
             "set datafile separator ','\n"
             "set xlabel 'x'\nset ylabel 't'\nset zlabel 'phi'\n"
             "splot 'solution.csv' every ::1 using 6:5:7 with points pt 7 ps 0.4 title 'phi(t, x)'\n"
             "pause -1\n");
  write_text(dir / "derivatives.gp",
             "set datafile separator ','\n"
             "set xlabel 'sigma'\nset ylabel 'tau'\nset view map\n"
             "splot 'derivatives.csv' every ::1 using 4:3:5 with points pt 5 ps 0.6 palette title 't_dot'\n"
             "pause -1\n");
}

}  // namespace

std::string git_describe() { return NIBVP_GIT_DESCRIBE; }

AmrDiagnostics amr_diagnostics(const Discretization& disc, const StateVector& state, const RunConfig& cfg) {
  const GridSpec& g = disc.grid();
  const int nt = g.n_tau, ns = g.n_sigma;
  const Vec tdot = disc.d_tau * state.t1;
  AmrDiagnostics a;

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 1; i < nt - 1; ++i)
    for (int j = 1; j < ns - 1; ++j) {
      lo = std::min(lo, tdot[g.index(i, j)]);
      hi = std::max(hi, tdot[g.index(i, j)]);
    }
  a.interior_tdot_range = hi - lo;
  for (int j = 0; j < ns; ++j)
    a.last_slice_tdot_jump =
        std::max(a.last_slice_tdot_jump, std::abs(tdot[g.index(nt - 1, j)] - tdot[g.index(nt - 2, j)]));

  if (cfg.profile != "bump") return a;
  // Pulses leave the bump centre in both directions and hit the walls at these times.
  const double len = cfg.sigma_interval[1] - cfg.sigma_interval[0];
  const double c = cfg.wave_speed;
  std::vector<double> hits;
  for (int k = 0; k < 8; ++k) {
    hits.push_back((cfg.center + k) * len / c);
    hits.push_back((1.0 - cfg.center + k) * len / c);
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
             hits.end());

  Vec slice_time(nt);
  for (int i = 0; i < nt; ++i) slice_time[i] = state.t1.segment(i * ns, ns).mean() - cfg.t0;
  for (double th : hits) {
    if (th <= slice_time[0] || th >= slice_time[nt - 1]) continue;
    ReflectionProbe p;
    p.t_phys = th;
    (slice_time.array() - th).abs().minCoeff(&p.slice);
    for (int j = 0; j < ns; ++j) {
      const double v = std::abs(tdot[g.index(p.slice, j)] - cfg.t_dot);
      if (v > p.peak) {
        p.peak = v;
        p.argmax_sigma = j;
      }
    }
    p.wall_distance = std::min(p.argmax_sigma, ns - 1 - p.argmax_sigma);
    a.probes.push_back(p);
  }
  return a;
}

RunResult execute_run(const RunConfig& cfg, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r;
  auto disc = std::make_shared<Discretization>(build_spec(cfg));
  r.disc = disc;
  r.setup_seconds = seconds_since(t0);

  r.solve = solve(*disc, cfg.solver);
  const StateVector& st = r.solve.state;
  const GridSpec& g = disc->grid();
  r.e_conv = conventional_energy(*disc, st);
  r.constraints = constraint_residuals(*disc, st);
  r.final_time = st.t1.segment((g.n_tau - 1) * g.n_sigma, g.n_sigma).mean();
  r.physical_limit_t = (st.t1 - st.t2).cwiseAbs().maxCoeff();
  r.physical_limit_phi = (st.phi1 - st.phi2).cwiseAbs().maxCoeff();
  r.amr = amr_diagnostics(*disc, st, cfg);

  if (options.with_errors && r.solve.converged) {
    const auto tm = std::chrono::steady_clock::now();
    MolOptions mo;
    mo.refinement = cfg.mol_refinement;
    mo.cfl = cfg.mol_cfl;
    mo.cache_dir = options.mol_cache_dir;
    r.reference = mol_reference(disc->spec(), mo);
    r.errors = error_norms(*disc, st, r.reference);
    r.have_errors = true;
    r.mol_seconds = seconds_since(tm);
  }
  r.report = report_json(cfg, r, r.solve.converged ? kExitOk : kExitSolver);
  return r;
}

fs::path resolve_output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("NOETHER_IBVP_OUT"); env && *env) return env;
  return "noether-ibvp-out";
}

void write_run_artifacts(const fs::path& dir, const RunResult& r, bool gnuplot) {
  const Discretization& disc = *r.disc;
  const GridSpec& g = disc.grid();
  const StateVector& st = r.solve.state;

  Table sol{{"tau_idx", "sigma_idx", "tau", "sigma", "t", "x", "phi"}, {}};
  Table der{{"tau_idx", "sigma_idx", "tau", "sigma", "t_dot", "t_prime"}, {}};
  const Vec tdot = disc.d_tau * st.t1;
  const Vec tprime = disc.d_sigma * st.t1;
  for (int i = 0; i < g.n_tau; ++i)
    for (int j = 0; j < g.n_sigma; ++j) {
      const int k = g.index(i, j);
      sol.rows.push_back({double(i), double(j), g.tau(i), g.sigma(j), st.t1[k], g.sigma(j), st.phi1[k]});
      der.rows.push_back({double(i), double(j), g.tau(i), g.sigma(j), tdot[k], tprime[k]});
    }
  write_csv(dir / "solution.csv", sol);
  write_csv(dir / "derivatives.csv", der);

  const ChargeSeries& q = r.solve.charges;
  Table ch{{"slice", "tau", "q_total", "q_coord", "q_field", "q_multiplier", "e_conv"}, {}};
  for (int i = 0; i < q.q_total.size(); ++i)
    ch.rows.push_back({double(i), g.tau(i), q.q_total[i], q.q_coord[i], q.q_field[i], q.q_multiplier[i],
                       i < r.e_conv.size() ? r.e_conv[i] : std::nan("")});
  write_csv(dir / "charges.csv", ch);
  if (gnuplot) write_gnuplot(dir);
  write_json(dir / "report.json", r.report);
  if (!r.solve.converged) mark_failed(dir, "solver: " + r.solve.message);
}

Outcome run_command(const RunConfig& cfg, const ExperimentOptions& opt) {
  Outcome out;
  out.dir = opt.out_root / ("run-" + config_hash(cfg, "run"));
  if (cached(out.dir, "report.json", opt.force, out)) return out;
  prepare_dir(out.dir);
  try {
    RunOptions ro;
    ro.mol_cache_dir = (opt.out_root / "cache").string();
    const RunResult r = execute_run(cfg, ro);
    write_run_artifacts(out.dir, r, cfg.gnuplot);
    out.summary = r.report;
    out.exit_code = r.solve.converged ? kExitOk : kExitSolver;
    out.message = r.solve.message;
  } catch (const ConfigError& e) {
    mark_failed(out.dir, e.what());
    out.exit_code = kExitConfig;
    out.message = e.what();
  } catch (const std::exception& e) {
    mark_failed(out.dir, e.what());
    out.exit_code = kExitSolver;
    out.message = e.what();
  }
  return out;
}

Outcome sweep_convergence_command(const RunConfig& cfg, const ExperimentOptions& opt) {
  Outcome out;
  out.dir = opt.out_root / ("sweep-convergence-" + config_hash(cfg, "sweep-convergence"));
  if (cached(out.dir, "fits.json", opt.force, out)) return out;
  prepare_dir(out.dir);

  const auto grids = sweep_grids(cfg);
  const int n = static_cast<int>(grids.size());
  struct Entry {
    bool ok = false;
    std::string message;
    double spacing = 0, drift = 0;
    ErrorNorms e;
  };
  std::vector<Entry> entries(n);
  const std::string cache = (opt.out_root / "cache").string();
  parallel_for(n, opt.jobs, [&](int k) {
    RunConfig c = cfg;
    c.n_tau = grids[k][0];
    c.n_sigma = grids[k][1];
    Entry& e = entries[k];
    const fs::path sub = out.dir / "runs" / (std::to_string(c.n_tau) + "x" + std::to_string(c.n_sigma));
    fs::create_directories(sub);
    try {
      const RunResult r = execute_run(c, {true, cache});
      write_run_artifacts(sub, r, false);
      const GridSpec& g = r.disc->grid();
      e.spacing = std::hypot(g.d_tau(), g.d_sigma());
      e.drift = r.solve.charges.drift;
      e.ok = r.solve.converged && r.have_errors;
      e.e = r.errors;
      e.message = r.solve.message;
    } catch (const std::exception& ex) {
      e.message = ex.what();
      mark_failed(sub, e.message);
    }
  });

  Table t{{"n_tau", "n_sigma", "spacing", "converged", "drift", "eps_t", "eps_phi", "eps_phi_we", "eps_phi_mol"}, {}};
  std::vector<std::pair<double, double>> pt, pp, pw, pm;
  const double nan = std::nan("");
  json failures = json::array();
  for (int k = 0; k < n; ++k) {
    const Entry& e = entries[k];
    t.rows.push_back({double(grids[k][0]), double(grids[k][1]), e.spacing, e.ok ? 1.0 : 0.0, e.ok ? e.drift : nan,
                      e.ok ? e.e.eps_t : nan, e.ok ? e.e.eps_phi : nan, e.ok ? e.e.eps_phi_we : nan,
                      e.ok ? e.e.eps_phi_mol : nan});
    if (!e.ok) {
      failures.push_back({{"n_tau", grids[k][0]}, {"n_sigma", grids[k][1]}, {"message", e.message}});
      continue;
    }
    pt.emplace_back(e.spacing, e.e.eps_t);
    pp.emplace_back(e.spacing, e.e.eps_phi);
    pw.emplace_back(e.spacing, e.e.eps_phi_we);
    pm.emplace_back(e.spacing, e.e.eps_phi_mol);
  }
  write_csv(out.dir / "convergence.csv", t);

  json fits;
  fits["grids_used"] = pt.size();
  fits["failures"] = failures;
  fits["config"] = to_json(cfg);
  fits["git_describe"] = git_describe();
  if (pt.size() < 3) {
    out.exit_code = kExitSolver;
    out.message = "fewer than 3 grids succeeded";
    fits["exit_code"] = out.exit_code;
    write_json(out.dir / "fits.json", fits);
    mark_failed(out.dir, out.message);
    return out;
  }
  auto fit_json = [](const std::vector<std::pair<double, double>>& p) {
    const PowerLawFit f = fit_convergence(p);
    return json{{"alpha", f.alpha}, {"beta", f.beta}};
  };
  fits["eps_t"] = fit_json(pt);
  fits["eps_phi"] = fit_json(pp);
  fits["eps_phi_we"] = fit_json(pw);
  fits["eps_phi_mol"] = fit_json(pm);
  bool decreasing = true;
  for (std::size_t k = 1; k < pw.size(); ++k) decreasing = decreasing && pw[k].second < pw[k - 1].second;
  fits["eps_phi_we_strictly_decreasing"] = decreasing;
  out.exit_code = failures.empty() ? kExitOk : kExitSolver;
  fits["exit_code"] = out.exit_code;
  out.summary = fits;
  write_json(out.dir / "fits.json", fits);
  if (!failures.empty()) mark_failed(out.dir, std::to_string(failures.size()) + " grid(s) failed");
  return out;
}

Outcome sweep_tdot_command(const RunConfig& cfg, const ExperimentOptions& opt) {
  Outcome out;
  out.dir = opt.out_root / ("sweep-tdot-" + config_hash(cfg, "sweep-tdot"));
  if (cached(out.dir, "summary.json", opt.force, out)) return out;
  prepare_dir(out.dir);

  const SpecFactory factory = [&cfg](double td) {
    RunConfig c = cfg;
    c.t_dot = td;
    c.n_tau = scaled_n_tau(cfg, td);
    return build_spec(c);
  };
  const auto rows = noether_drift_sweep(factory, cfg.sweep_t_dot, cfg.solver, opt.jobs);

  Table t{{"t_dot_ic", "n_tau", "q0", "drift", "iterations"}, {}};
  json entries = json::array();
  bool all_ok = true, ascending = true;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const DriftRow& r = rows[k];
    t.rows.push_back({r.t_dot_ic, double(r.n_tau), r.q0, r.drift, double(r.iterations)});
    entries.push_back({{"t_dot_ic", r.t_dot_ic}, {"n_tau", r.n_tau}, {"converged", r.converged},
                       {"q0", num(r.q0)}, {"drift", num(r.drift)}, {"message", r.message}});
    all_ok = all_ok && r.converged;
    if (k > 0) ascending = ascending && r.q0 > rows[k - 1].q0;
  }
  write_csv(out.dir / "tdot_sweep.csv", t);
  out.exit_code = all_ok ? kExitOk : kExitSolver;
  json s{{"rows", entries},
         {"n_tau_rule", "n_tau = 1 + ceil((n_tau_base - 1) * t_dot / t_dot_base)"},
         {"q0_strictly_increasing", ascending},
         {"exit_code", out.exit_code},
         {"config", to_json(cfg)},
         {"git_describe", git_describe()}};
  out.summary = s;
  write_json(out.dir / "summary.json", s);
  if (!all_ok) mark_failed(out.dir, "one or more sweep entries failed");
  return out;
}

Outcome diag_operators_command(SbpOrder order, int n_tau, int n_sigma, const ExperimentOptions& opt) {
  if (n_tau > 64 || n_sigma > 64)
    throw ConfigError("diag-operators: grid " + std::to_string(n_tau) + "x" + std::to_string(n_sigma) +
                      " exceeds the 64x64 limit for dense diagnostics");
  RunConfig cfg;
  cfg.order = order;
  cfg.n_tau = n_tau;
  cfg.n_sigma = n_sigma;
  cfg.profile = "vacuum";
  validate(cfg);

  Outcome out;
  const std::string tag = to_string(order) + "-" + std::to_string(n_tau) + "x" + std::to_string(n_sigma);
  out.dir = opt.out_root / ("diag-operators-" + tag);
  if (cached(out.dir, "summary.json", opt.force, out)) return out;
  prepare_dir(out.dir);

  const Discretization disc(build_spec(cfg));
  write_csv(out.dir / "d_tau.csv", operator_table(disc.d_tau));
  write_csv(out.dir / "d_sigma.csv", operator_table(disc.d_sigma));
  write_csv(out.dir / "dt_t_regularized.csv", operator_table(disc.dt_t.linear));
  write_csv(out.dir / "ds_phi_regularized.csv", operator_table(disc.ds_phi.linear));

  json s;
  s["order"] = to_string(order);
  s["n_tau"] = n_tau;
  s["n_sigma"] = n_sigma;
  const SbpPair* pairs[2] = {&disc.pair_tau, &disc.pair_sigma};
  const char* names[2] = {"tau", "sigma"};
  const int other[2] = {n_sigma, n_tau};
  for (int d = 0; d < 2; ++d) {
    const Spectrum sp = operator_spectrum(pairs[d]->d_matrix);
    write_csv(out.dir / (std::string("eigenvalues_unregularized_") + names[d] + "_1d.csv"), eigen_table(sp.eigenvalues));
    const Mat reg = regularized_1d(*pairs[d], cfg.sigma0);
    s[names[d]] = {{"zero_modes_1d", sp.zero_modes},
                   {"zero_modes_lifted", sp.zero_modes * other[d]},
                   {"max_real_nonzero_relative", sp.max_real_nonzero},
                   {"regularized_sigma_min_1d", min_singular_value(reg)}};
  }
  const SpMat* lifted[2] = {&disc.d_tau, &disc.d_sigma};
  const SpMat* regs[2] = {&disc.dt_t.linear, &disc.ds_phi.linear};
  for (int d = 0; d < 2; ++d) {
    const Mat m = Mat(*lifted[d]);
    Eigen::EigenSolver<Mat> es(m, false);
    std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); });
    write_csv(out.dir / (std::string("eigenvalues_unregularized_") + names[d] + ".csv"), eigen_table(ev));
    s[names[d]]["regularized_sigma_min"] = min_singular_value(Mat(*regs[d]));
  }
  if (n_tau * n_sigma <= 24 * 16) {
    for (int d = 0; d < 2; ++d) {
      Eigen::EigenSolver<Mat> es(Mat(*regs[d]), false);
      std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
      std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); });
      double min_re = std::numeric_limits<double>::infinity();
      for (auto z : ev) min_re = std::min(min_re, z.real());
      write_csv(out.dir / (std::string("eigenvalues_regularized_") + names[d] + ".csv"), eigen_table(ev));
      s[names[d]]["regularized_min_real"] = min_re;
    }
  }
  s["exit_code"] = kExitOk;
  s["git_describe"] = git_describe();
  out.summary = s;
  write_json(out.dir / "summary.json", s);
  return out;
}

}  // namespace nibvp
