#include "nibvp/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "nibvp/action.hpp"
#include "nibvp/error.hpp"
#include "nibvp/oracle.hpp"

namespace nibvp {

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

std::vector<int> free_indices(const Discretization& disc) {
  const int n = disc.layout().size();
  std::vector<char> pinned(n, 0);
  for (int k : disc.pinned) pinned[k] = 1;
  std::vector<int> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k)
    if (!pinned[k]) out.push_back(k);
  return out;
}

SpMat selection(const std::vector<int>& idx, int n) {
  std::vector<Triplet> trip;
  trip.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) trip.emplace_back(static_cast<int>(i), idx[i], 1.0);
  SpMat s(static_cast<int>(idx.size()), n);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

Vec gather(const Vec& v, const std::vector<int>& idx) {
  Vec out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

// Row/column equilibration of a square sparse matrix.
struct Scaling {
  Vec row, col;
};

Scaling equilibrate(const SpMat& a) {
  Scaling s{Vec::Zero(a.rows()), Vec::Zero(a.cols())};
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) s.row[it.row()] = std::max(s.row[it.row()], std::abs(it.value()));
  for (long i = 0; i < s.row.size(); ++i) s.row[i] = s.row[i] > 0 ? 1.0 / s.row[i] : 1.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      s.col[it.col()] = std::max(s.col[it.col()], std::abs(it.value()) * s.row[it.row()]);
  for (long i = 0; i < s.col.size(); ++i) s.col[i] = s.col[i] > 0 ? 1.0 / s.col[i] : 1.0;
  return s;
}

using LU = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

struct Factored {
  std::unique_ptr<LU> lu;
  Scaling sc;
  Vec solve(const Vec& b) const {
    const Vec y = lu->solve(sc.row.cwiseProduct(b));
    return sc.col.cwiseProduct(y);
  }
};

bool factor(const SpMat& j, Factored& f) {
  f.sc = equilibrate(j);
  SpMat js = f.sc.row.asDiagonal() * j * f.sc.col.asDiagonal();
  js.makeCompressed();
  f.lu = std::make_unique<LU>();
  f.lu->analyzePattern(js);
  f.lu->factorize(js);
  return f.lu->info() == Eigen::Success;
}

// |lambda|_max / |lambda|_min of the symmetric stationarity matrix by power and inverse iteration.
double condition_estimate(const SpMat& j, const Factored& f) {
  const long n = j.rows();
  if (n == 0) return 0.0;
  Vec v = Vec::Ones(n).normalized();
  double big = 0.0;
  for (int it = 0; it < 40; ++it) {
    Vec w = j * v;
    big = w.norm();
    if (big == 0.0) return 0.0;
    v = w / big;
  }
  Vec u = Vec::Ones(n).normalized();
  double inv = 0.0;
  for (int it = 0; it < 40; ++it) {
    Vec w = f.solve(u);
    inv = w.norm();
    if (!std::isfinite(inv) || inv == 0.0) return std::numeric_limits<double>::infinity();
    u = w / inv;
  }
  return big * inv;
}

void note(const SolverOptions& opt, const std::string& msg) {
  if (opt.verbosity > 0) std::fprintf(stderr, "[solver] %s\n", msg.c_str());
}

}  // namespace

StateVector precondition(const Discretization& disc) {
  const ProblemSpec& spec = disc.spec();
  const GridSpec& g = spec.grid;
  StateVector st = StateVector::zeros(g);
  for (int i = 0; i < g.n_tau; ++i)
    for (int j = 0; j < g.n_sigma; ++j)
      st.t1[g.index(i, j)] = spec.t_ic[j] + spec.t_dot_ic[j] * (g.tau(i) - g.tau_interval[0]);
  st.t2 = st.t1;
  if (spec.profiles.phi) {
    st.phi1 = dalembert_on_map(spec, st.t1);
  } else {
    for (int i = 0; i < g.n_tau; ++i)
      for (int j = 0; j < g.n_sigma; ++j)
        st.phi1[g.index(i, j)] = spec.phi_ic[j] + spec.phi_dot_ic[j] * (g.tau(i) - g.tau_interval[0]);
  }
  st.phi2 = st.phi1;

  // Multipliers: least-squares solution of K_f^T mu = -grad_bulk over the unpinned entries.
  const Layout L = disc.layout();
  const Vec flat = st.pack();
  const Vec gb = evaluate_gradient(disc, flat).head(L.primal_size());
  std::vector<int> rows;
  {
    std::vector<char> pinned(L.size(), 0);
    for (int k : disc.pinned) pinned[k] = 1;
    for (int k = L.primal_size(); k < L.size(); ++k)
      if (!pinned[k]) rows.push_back(k - L.primal_size());
  }
  const SpMat sel = selection(rows, L.size() - L.primal_size());
  const SpMat kf = sel * disc.constraints;
  SpMat normal = kf * kf.transpose();
  Eigen::SimplicialLDLT<SpMat> ldlt(normal);
  Vec mu_f = Vec::Zero(kf.rows());
  if (ldlt.info() == Eigen::Success) {
    mu_f = ldlt.solve(-(kf * gb));
    if (!mu_f.allFinite()) mu_f.setZero();
  }
  Vec out = flat;
  const Vec mu = sel.transpose() * mu_f;
  out.tail(L.size() - L.primal_size()) = mu;
  return StateVector::unpack(g, out);
}

StateVector precondition(const ProblemSpec& spec) { return precondition(Discretization(spec)); }

StateVector solve_stationarity_system(const Discretization& disc, const StateVector& start,
                                      const SolverOptions& opt, SolveReport* report) {
  if (!(opt.tolerance > 0.0)) throw Error("solver tolerance must be positive");
  start.check(disc.grid());
  SolveReport local;
  SolveReport& rep = report ? *report : local;
  rep.residual_history.clear();
  rep.step_history.clear();
  rep.iterations = 0;
  rep.levenberg_steps = 0;
  rep.converged = false;

  const Layout L = disc.layout();
  const int n = L.size();
  const std::vector<int> fidx = free_indices(disc);
  const SpMat sel = selection(fidx, n);
  const SpMat selT = sel.transpose();

  Vec x = start.pack();
  for (int k : disc.pinned) x[k] = 0.0;
  Vec r = evaluate_gradient(disc, x);
  double rn = inf_norm(r);
  rep.residual_history.push_back(rn);
  Vec best = x;

  Factored fac;
  SpMat jf;
  bool have_factor = false;
  double lev = 0.0;

  for (int it = 0; it < opt.max_iterations; ++it) {
    jf = sel * evaluate_hessian(disc, x) * selT;
    jf.makeCompressed();
    const Vec rf = gather(r, fidx);
    Vec dxf;
    have_factor = factor(jf, fac);
    if (have_factor) {
      dxf = fac.solve(-rf);
      if (!dxf.allFinite()) have_factor = false;
    }

    bool accepted = false;
    if (have_factor) {
      const double step = inf_norm(dxf);
      if (rn <= opt.tolerance && step <= opt.step_tolerance * std::max(1.0, inf_norm(x))) {
        rep.converged = true;
        rep.message = "converged";
        break;
      }
      double alpha = 1.0;
      for (int bt = 0; bt <= opt.max_backtracks; ++bt, alpha *= 0.5) {
        const Vec xt = x + alpha * (selT * dxf);
        if (!xt.allFinite()) continue;
        const Vec rt = evaluate_gradient(disc, xt);
        const double rtn = inf_norm(rt);
        if (std::isfinite(rtn) && rtn < (1.0 - opt.armijo * alpha) * rn) {
          x = xt;
          r = rt;
          rn = rtn;
          rep.step_history.push_back(alpha * step);
          accepted = true;
          break;
        }
      }
      if (!accepted && rn <= opt.tolerance) {
        rep.converged = true;
        rep.message = "converged (residual at rounding floor)";
        break;
      }
    } else {
      rep.warnings.push_back("singular stationarity matrix at iteration " + std::to_string(it) +
                             "; using Levenberg steps");
    }

    if (!accepted) {
      // Levenberg step on the free residual.
      const SpMat jtj = SpMat(jf.transpose() * jf);
      double diag_max = 0.0;
      for (int k = 0; k < jtj.outerSize(); ++k) diag_max = std::max(diag_max, jtj.coeff(k, k));
      lev = lev > 0.0 ? lev : opt.levenberg_initial * std::max(diag_max, 1e-300);
      const Vec g = jf.transpose() * rf;
      SpMat eye(jtj.rows(), jtj.cols());
      eye.setIdentity();
      while (lev <= opt.levenberg_max * std::max(diag_max, 1e-300)) {
        Eigen::SimplicialLDLT<SpMat> chol(SpMat(jtj + lev * eye));
        if (chol.info() == Eigen::Success) {
          const Vec d = chol.solve(-g);
          const Vec xt = x + selT * d;
          if (xt.allFinite()) {
            const Vec rt = evaluate_gradient(disc, xt);
            const double rtn = inf_norm(rt);
            if (std::isfinite(rtn) && rtn < rn) {
              x = xt;
              r = rt;
              rn = rtn;
              rep.step_history.push_back(inf_norm(d));
              ++rep.levenberg_steps;
              lev = std::max(lev / 10.0, opt.levenberg_initial * diag_max);
              accepted = true;
              break;
            }
          }
        }
        lev *= 10.0;
      }
      if (!accepted) {
        rep.message = "stalled: no step reduces the residual (trust region exhausted)";
        break;
      }
    }
    ++rep.iterations;
    rep.residual_history.push_back(rn);
    best = x;
    std::ostringstream os;
    os << "iteration " << rep.iterations << " residual " << rn;
    note(opt, os.str());
  }
  if (!rep.converged && rep.message.empty())
    rep.message = "maximum iterations (" + std::to_string(opt.max_iterations) + ") exceeded";
  if (have_factor) rep.condition_estimate = condition_estimate(jf, fac);
  rep.final_residual = rn;
  rep.state = StateVector::unpack(disc.grid(), best);
  return rep.state;
}

SolveReport solve(const Discretization& disc, const SolverOptions& opt) {
  if (!(opt.tolerance > 0.0)) throw Error("solver tolerance must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport rep;
  const ProblemSpec& spec = disc.spec();
  const double dens = initial_field_energy_density(spec);
  if (dens > spec.tension / 100.0) {
    std::ostringstream os;
    os << "initial field energy density " << dens << " exceeds T/100 = " << spec.tension / 100.0
       << "; the coupled system may be strongly nonlinear";
    rep.warnings.push_back(os.str());
  }
  const StateVector start = precondition(disc);
  solve_stationarity_system(disc, start, opt, &rep);
  rep.charges = noether_charge(disc, rep.state);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

SolveReport solve(const ProblemSpec& spec, const SolverOptions& opt) { return solve(Discretization(spec), opt); }

}  // namespace nibvp
