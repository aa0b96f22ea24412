#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nibvp/error.hpp"
#include "nibvp/action.hpp"
#include "nibvp/discretization.hpp"
#include "test_util.hpp"

using namespace nibvp;
using nibvp::reference::dense_sbp;
using nibvp::reference::kron;
using nibvp::reference::random_vec;

namespace {

InitialProfiles smooth_profiles(double offset) {
  InitialProfiles p;
  p.phi = [offset](double s) { return offset + 0.3 * std::sin(std::numbers::pi * s) + 0.2 * s; };
  p.phi_dot = [](double) { return 0.0; };
  p.t = [](double s) { return 0.1 * s; };
  p.t_dot = [](double s) { return 2.0 + 0.3 * s; };
  return p;
}

ProblemSpec small_spec(SbpOrder order, int nt, int ns, double tension, double c = 1.0, double t_shift = 0.0) {
  auto p = smooth_profiles(0.25);
  p.t = [t_shift](double s) { return t_shift + 0.1 * s; };
  return make_problem(GridSpec::make(nt, ns, {0, 0.5}, {0, 1}), order, tension, c, p, 1.0);
}

StateVector random_state(const GridSpec& g, std::mt19937_64& rng) {
  StateVector st = StateVector::zeros(g);
  const int n = g.total_volume();
  Vec tau_ramp(n);
  for (int i = 0; i < g.n_tau; ++i)
    for (int j = 0; j < g.n_sigma; ++j) tau_ramp[g.index(i, j)] = 2.0 * g.tau(i);
  st.t1 = tau_ramp + random_vec(rng, n, 0.05);
  st.t2 = tau_ramp + random_vec(rng, n, 0.05);
  st.phi1 = random_vec(rng, n, 0.5);
  st.phi2 = random_vec(rng, n, 0.5);
  for (Vec* m : {&st.lam_t, &st.lam_phi, &st.lamt_t, &st.lamt_phi, &st.gam_t, &st.gam_phi, &st.gamt_t, &st.gamt_phi})
    *m = random_vec(rng, g.n_sigma);
  for (Vec* m : {&st.kap_phi, &st.kapt_phi, &st.xi_phi, &st.xit_phi}) *m = random_vec(rng, g.n_tau);
  return st;
}

// Dense re-implementation of the discrete action, written out term by term.
double reference_action(const ProblemSpec& spec, const StateVector& st) {
  const GridSpec& g = spec.grid;
  const int nt = g.n_tau, ns = g.n_sigma;
  const int code = spec.order == SbpOrder::SBP121 ? 121 : 242;
  const auto pt = dense_sbp(code, nt, g.d_tau()), ps = dense_sbp(code, ns, g.d_sigma());
  const Mat It = Mat::Identity(nt, nt), Is = Mat::Identity(ns, ns);
  const Mat Dt = kron(pt.d, Is), Ds = kron(It, ps.d);
  const Vec H = kron(pt.h, ps.h);
  Mat e0t = Mat::Zero(nt, nt), e0s = Mat::Zero(ns, ns);
  e0t(0, 0) = spec.sigma0 / pt.h[0];
  e0s(0, 0) = spec.sigma0 / ps.h[0];
  const Mat St = kron(e0t, Is), Ss = kron(It, e0s);
  Vec bt = Vec::Zero(nt * ns), bp = Vec::Zero(nt * ns), bl = Vec::Zero(nt * ns);
  bt.head(ns) = spec.t_ic;
  bp.head(ns) = spec.phi_ic;
  for (int i = 0; i < nt; ++i) bl[i * ns] = spec.phi_bc_left[i];
  const double k = 1.0 / spec.tension, c2 = spec.wave_speed * spec.wave_speed;

  auto bulk = [&](const Vec& t, const Vec& p) {
    const Vec a = Dt * t + St * (t - bt), s = Ds * t;
    const Vec pd = Dt * p + St * (p - bp), q = Ds * p + Ss * (p - bl);
    double sum = 0;
    for (int i = 0; i < nt * ns; ++i) {
      const double e = 0.5 * (c2 * a[i] * a[i] +
                              k * (pd[i] * pd[i] * (c2 * s[i] * s[i] - 1) - 2 * c2 * q[i] * pd[i] * a[i] * s[i] +
                                   c2 * q[i] * q[i] * a[i] * a[i]));
      sum += H[i] * e;
    }
    return sum;
  };
  auto row = [&](const Vec& v, int i) { return Vec(v.segment(i * ns, ns)); };
  auto col = [&](const Vec& v, int j) {
    Vec c(nt);
    for (int i = 0; i < nt; ++i) c[i] = v[i * ns + j];
    return c;
  };
  const Vec dt1 = Dt * st.t1, dt2 = Dt * st.t2, dp1 = Dt * st.phi1, dp2 = Dt * st.phi2;
  double E = bulk(st.t1, st.phi1) - bulk(st.t2, st.phi2);
  auto hs = [&](const Vec& m, const Vec& v) { return m.dot(ps.h.cwiseProduct(v)); };
  auto ht = [&](const Vec& m, const Vec& v) { return m.dot(pt.h.cwiseProduct(v)); };
  E += hs(st.lam_t, row(st.t1, 0) - spec.t_ic) + hs(st.lam_phi, row(st.phi1, 0) - spec.phi_ic);
  E += hs(st.lamt_t, row(dt1, 0) - spec.t_dot_ic) + hs(st.lamt_phi, row(dp1, 0) - spec.phi_dot_ic);
  E += hs(st.gam_t, row(st.t1, nt - 1) - row(st.t2, nt - 1)) + hs(st.gam_phi, row(st.phi1, nt - 1) - row(st.phi2, nt - 1));
  E += hs(st.gamt_t, row(dt1, nt - 1) - row(dt2, nt - 1)) + hs(st.gamt_phi, row(dp1, nt - 1) - row(dp2, nt - 1));
  E += ht(st.kap_phi, col(st.phi1, 0) - spec.phi_bc_left) + ht(st.kapt_phi, col(st.phi1, ns - 1) - spec.phi_bc_right);
  E += ht(st.xi_phi, col(st.phi2, 0) - spec.phi_bc_left) + ht(st.xit_phi, col(st.phi2, ns - 1) - spec.phi_bc_right);
  return E;
}

}  // namespace

TEST(Action, MatchesTermByTermReference) {
  std::mt19937_64 rng(42);
  for (SbpOrder o : {SbpOrder::SBP121, SbpOrder::SBP242})
    for (double c : {1.0, 1.7}) {
      const ProblemSpec spec = small_spec(o, 9, 8, 3.0, c);
      const Discretization disc(spec);
      for (int trial = 0; trial < 3; ++trial) {
        const StateVector st = random_state(spec.grid, rng);
        const double ref = reference_action(spec, st);
        EXPECT_NEAR(evaluate_action(disc, st), ref, 1e-12 * (1 + std::abs(ref))) << to_string(o) << " c=" << c;
      }
    }
}

TEST(Action, VacuumBulkIsHalfCSquaredTdotSquaredVolume) {
  const double tdot = 2.5, c = 1.3;
  auto spec = make_problem(GridSpec::make(7, 6, {0, 0.5}, {0, 1}), SbpOrder::SBP121, 1e4, c, vacuum_profiles(tdot));
  const Discretization disc(spec);
  StateVector st = StateVector::zeros(spec.grid);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 6; ++j) st.t1[spec.grid.index(i, j)] = tdot * spec.grid.tau(i);
  EXPECT_NEAR(bulk_term(disc, st.t1, st.phi1), 0.5 * c * c * tdot * tdot * 0.5, 1e-13);
}

TEST(Action, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(5);
  const ProblemSpec spec = small_spec(SbpOrder::SBP121, 8, 6, 2.0);
  const Discretization disc(spec);
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = random_state(spec.grid, rng).pack();
    const Vec g = evaluate_gradient(disc, x);
    for (long i = 0; i < x.size(); ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (evaluate_action(disc, StateVector::unpack(spec.grid, xp)) -
                         evaluate_action(disc, StateVector::unpack(spec.grid, xm))) /
                        (2 * h);
      worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Action, HessianMatchesGradientDifferences) {
  std::mt19937_64 rng(9);
  for (SbpOrder o : {SbpOrder::SBP121, SbpOrder::SBP242}) {
    const ProblemSpec spec = small_spec(o, 9, 8, 2.0, 1.2);
    const Discretization disc(spec);
    const Vec x = random_state(spec.grid, rng).pack();
    const Mat H = Mat(evaluate_hessian(disc, x));
    EXPECT_LT((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    const Vec v = random_vec(rng, x.size());
    const double h = 1e-6;
    const Vec fd = (evaluate_gradient(disc, Vec(x + h * v)) - evaluate_gradient(disc, Vec(x - h * v))) / (2 * h);
    const Vec hv = H * v;
    EXPECT_LT((fd - hv).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, hv.cwiseAbs().maxCoeff())) << to_string(o);
  }
}

TEST(Action, PotentialGradientMatchesDifferences) {
  std::mt19937_64 rng(13);
  ProblemSpec spec = small_spec(SbpOrder::SBP121, 6, 5, 1.5);
  spec.potential = {[](double f) { return 0.5 * f * f + 0.1 * f * f * f * f; },
                    [](double f) { return f + 0.4 * f * f * f; },
                    [](double f) { return 1.0 + 1.2 * f * f; }};
  const Discretization disc(spec);
  const Vec x = random_state(spec.grid, rng).pack();
  const Vec g = evaluate_gradient(disc, x);
  const Mat H = Mat(evaluate_hessian(disc, x));
  for (long i = 0; i < x.size(); i += 3) {
    Vec xp = x, xm = x;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    const double fd = (evaluate_action(disc, StateVector::unpack(spec.grid, xp)) -
                       evaluate_action(disc, StateVector::unpack(spec.grid, xm))) / 2e-6;
    EXPECT_NEAR(fd, g[i], 1e-6 * std::max(1.0, std::abs(g[i])));
    const Vec gd = (evaluate_gradient(disc, xp) - evaluate_gradient(disc, xm)) / 2e-6;
    EXPECT_LT((gd - H.col(i)).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, H.col(i).cwiseAbs().maxCoeff()));
  }
}

TEST(Action, TimeTranslationLeavesBulkUnchanged) {
  std::mt19937_64 rng(21);
  for (SbpOrder o : {SbpOrder::SBP121, SbpOrder::SBP242}) {
    for (double shift : {0.37, -5.0, 1e3}) {
      const ProblemSpec a = small_spec(o, 10, 9, 50.0, 1.0, 0.0), b = small_spec(o, 10, 9, 50.0, 1.0, shift);
      const StateVector st = random_state(a.grid, rng);
      StateVector sh = st;
      sh.t1.array() += shift;
      sh.t2.array() += shift;
      const double e0 = evaluate_bulk_action(Discretization(a), st);
      const double e1 = evaluate_bulk_action(Discretization(b), sh);
      const double scale = bulk_term(Discretization(a), st.t1, st.phi1);
      EXPECT_LE(std::abs(e1 - e0), 1e-13 * std::abs(scale) * std::max(1.0, std::abs(shift)) * 10)
          << to_string(o) << " shift=" << shift;
    }
  }
}

TEST(Action, BulkIsAntisymmetricInTheBranches) {
  std::mt19937_64 rng(33);
  const ProblemSpec spec = small_spec(SbpOrder::SBP121, 8, 7, 4.0);
  const Discretization disc(spec);
  const StateVector st = random_state(spec.grid, rng);
  StateVector sw = st;
  std::swap(sw.t1, sw.t2);
  std::swap(sw.phi1, sw.phi2);
  EXPECT_NEAR(evaluate_bulk_action(disc, sw), -evaluate_bulk_action(disc, st), 1e-13);
  StateVector same = st;
  same.t2 = same.t1;
  same.phi2 = same.phi1;
  EXPECT_EQ(evaluate_bulk_action(disc, same), 0.0);
}

TEST(Action, ConstraintResidualsVanishOnSatisfyingState) {
  const ProblemSpec spec = small_spec(SbpOrder::SBP121, 6, 5, 10.0);
  const Discretization disc(spec);
  std::mt19937_64 rng(2);
  StateVector st = random_state(spec.grid, rng);
  EXPECT_GT(constraint_residuals(disc, st).max(), 1e-3);
  EXPECT_THROW(constraint_residuals(disc, StateVector::zeros(GridSpec::make(5, 5, {0, 1}, {0, 1}))), Error);
}

TEST(Metric, DeterminantReduction) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0), cu(0.2, 3.0);
  for (int k = 0; k < 100; ++k) {
    const double td = u(rng), tp = u(rng), xd = u(rng), xp = u(rng), c = cu(rng);
    const InducedMetric m = induced_metric(td, tp, xd, xp, c);
    const double expect = -c * c * std::pow(td * xp - xd * tp, 2);
    EXPECT_LE(std::abs(m.det() - expect), 1e-12 * std::max(std::abs(expect), 1e-300) + 1e-15);
  }
  for (double c : {1.0, 0.5, 3.0}) EXPECT_EQ(induced_metric(1, 0, 0, 1, c).det(), -c * c);
}
