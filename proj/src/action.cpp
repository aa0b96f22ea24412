#include "nibvp/action.hpp"

#include <algorithm>
#include <cmath>

#include "nibvp/error.hpp"

namespace nibvp {

namespace {

// Energy density and its derivatives with respect to (a, s, p, q, f = phi).
struct Density {
  Vec e;
  Vec ea, es, ep, eq, ef;
  Vec aa, as, ap, aq, af, ss, sp, sq, pp, pq, qq, ff;
};

Density density(const ProblemSpec& spec, const Channels& ch, const Vec& phi, int derivs) {
  const double k = spec.inv_tension();
  const double c2 = spec.wave_speed * spec.wave_speed;
  const long n = ch.a.size();
  Vec V = Vec::Zero(n), dV = Vec::Zero(n), d2V = Vec::Zero(n);
  if (spec.potential) {
    for (long i = 0; i < n; ++i) {
      V[i] = spec.potential.v(phi[i]);
      if (derivs > 0) dV[i] = spec.potential.dv(phi[i]);
      if (derivs > 1) d2V[i] = spec.potential.d2v(phi[i]);
    }
  }
  const auto a = ch.a.array(), s = ch.s.array(), p = ch.p.array(), q = ch.q.array();
  const auto w = 1.0 - k * V.array();
  Density d;
  d.e = 0.5 * (c2 * a.square() * w + k * (p.square() * (c2 * s.square() - 1.0) - 2.0 * c2 * p * q * a * s +
                                            c2 * q.square() * a.square()));
  if (derivs < 1) return d;
  d.ea = c2 * a * w + k * c2 * (q.square() * a - p * q * s);
  d.es = k * c2 * (p.square() * s - p * q * a);
  d.ep = k * (p * (c2 * s.square() - 1.0) - c2 * q * a * s);
  d.eq = k * c2 * (q * a.square() - p * a * s);
  d.ef = -0.5 * k * c2 * a.square() * dV.array();
  if (derivs < 2) return d;
  d.aa = c2 * w + k * c2 * q.square();
  d.as = -k * c2 * p * q;
  d.ap = -k * c2 * q * s;
  d.aq = k * c2 * (2.0 * q * a - p * s);
  d.af = -k * c2 * a * dV.array();
  d.ss = k * c2 * p.square();
  d.sp = k * c2 * (2.0 * p * s - q * a);
  d.sq = -k * c2 * p * a;
  d.pp = k * (c2 * s.square() - 1.0);
  d.pq = -k * c2 * a * s;
  d.qq = k * c2 * a.square();
  d.ff = -0.5 * k * c2 * a.square() * d2V.array();
  return d;
}

void check_state(const Discretization& disc, const StateVector& st) { st.check(disc.grid()); }

struct BranchGradient {
  Vec gt, gphi;
};

BranchGradient branch_gradient(const Discretization& disc, const Vec& t, const Vec& phi) {
  const Channels ch = branch_channels(disc, t, phi);
  const Density d = density(disc.spec(), ch, phi, 1);
  const Vec& h = disc.h;
  BranchGradient g;
  g.gt = disc.dt_t_T * h.cwiseProduct(d.ea) + disc.d_sigma_T * h.cwiseProduct(d.es);
  g.gphi = disc.dt_phi_T * h.cwiseProduct(d.ep) + disc.ds_phi_T * h.cwiseProduct(d.eq) + h.cwiseProduct(d.ef);
  return g;
}

SpMat sparse_diag(const Vec& w) {
  SpMat m(w.size(), w.size());
  m.reserve(Eigen::VectorXi::Constant(w.size(), 1));
  for (long i = 0; i < w.size(); ++i) m.insert(i, i) = w[i];
  m.makeCompressed();
  return m;
}

SpMat xwy(const SpMat& xt, const Vec& w, const SpMat& y) {
  SpMat out = xt * w.asDiagonal() * y;
  return out;
}

struct BranchHessian {
  SpMat tt, tphi, phiphi;
};

BranchHessian branch_hessian(const Discretization& disc, const Vec& t, const Vec& phi) {
  const Channels ch = branch_channels(disc, t, phi);
  const Density d = density(disc.spec(), ch, phi, 2);
  const Vec& h = disc.h;
  const SpMat &A = disc.dt_t.linear, &S = disc.d_sigma, &P = disc.dt_phi.linear, &Q = disc.ds_phi.linear;
  const SpMat &AT = disc.dt_t_T, &ST = disc.d_sigma_T, &PT = disc.dt_phi_T, &QT = disc.ds_phi_T;
  const Vec was = h.cwiseProduct(d.as), wpq = h.cwiseProduct(d.pq);
  BranchHessian H;
  H.tt = xwy(AT, h.cwiseProduct(d.aa), A) + xwy(AT, was, S) + xwy(ST, was, A) + xwy(ST, h.cwiseProduct(d.ss), S);
  const SpMat waf = sparse_diag(h.cwiseProduct(d.af));
  H.tphi = xwy(AT, h.cwiseProduct(d.ap), P) + xwy(AT, h.cwiseProduct(d.aq), Q) + SpMat(AT * waf) +
           xwy(ST, h.cwiseProduct(d.sp), P) + xwy(ST, h.cwiseProduct(d.sq), Q);
  const SpMat wff = sparse_diag(h.cwiseProduct(d.ff));
  H.phiphi = xwy(PT, h.cwiseProduct(d.pp), P) + xwy(PT, wpq, Q) + xwy(QT, wpq, P) +
             xwy(QT, h.cwiseProduct(d.qq), Q) + wff;
  return H;
}

void append(std::vector<Triplet>& trip, const SpMat& m, int r0, int c0, double scale, bool transpose = false) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (transpose)
        trip.emplace_back(r0 + c, c0 + r, scale * it.value());
      else
        trip.emplace_back(r0 + r, c0 + c, scale * it.value());
    }
}

double slice_max(const Vec& v, const GridSpec& g, int slice, const Vec* ref) {
  double m = 0.0;
  for (int j = 0; j < g.n_sigma; ++j)
    m = std::max(m, std::abs(v[g.index(slice, j)] - (ref ? (*ref)[j] : 0.0)));
  return m;
}

double wall_max(const Vec& phi, const ProblemSpec& spec) {
  const GridSpec& g = spec.grid;
  double m = 0.0;
  for (int i = 0; i < g.n_tau; ++i) {
    m = std::max(m, std::abs(phi[g.index(i, 0)] - spec.phi_bc_left[i]));
    m = std::max(m, std::abs(phi[g.index(i, g.n_sigma - 1)] - spec.phi_bc_right[i]));
  }
  return m;
}

}  // namespace

Channels branch_channels(const Discretization& disc, const Vec& t, const Vec& phi) {
  const int nv = disc.grid().total_volume();
  if (t.size() != nv) throw_dimension("branch_channels(t)", nv, t.size());
  if (phi.size() != nv) throw_dimension("branch_channels(phi)", nv, phi.size());
  return {disc.dt_t.apply(t), disc.d_sigma * t, disc.dt_phi.apply(phi), disc.ds_phi.apply(phi)};
}

Channels unregularized_channels(const Discretization& disc, const Vec& t, const Vec& phi) {
  const int nv = disc.grid().total_volume();
  if (t.size() != nv) throw_dimension("unregularized_channels(t)", nv, t.size());
  if (phi.size() != nv) throw_dimension("unregularized_channels(phi)", nv, phi.size());
  return {disc.d_tau * t, disc.d_sigma * t, disc.d_tau * phi, disc.d_sigma * phi};
}

InducedMetric induced_metric(double t_dot, double t_prime, double x_dot, double x_prime, double c) {
  const double c2 = c * c;
  return {c2 * t_dot * t_dot - x_dot * x_dot, c2 * t_dot * t_prime - x_dot * x_prime,
          c2 * t_prime * t_prime - x_prime * x_prime};
}

MetricBundle metric_bundle(const Discretization& disc, const Vec& t, const Vec& phi, Branch) {
  const Channels ch = branch_channels(disc, t, phi);
  const double c2 = disc.spec().wave_speed * disc.spec().wave_speed;
  MetricBundle m;
  m.t_dot = ch.a;
  m.t_prime = ch.s;
  m.phi_dot = ch.p;
  m.phi_prime = ch.q;
  m.g00 = c2 * ch.a.array().square();
  m.g01 = c2 * ch.a.array() * ch.s.array();
  m.g11 = c2 * ch.s.array().square() - 1.0;
  m.det_g = -c2 * ch.a.array().square();
  m.adj00 = m.g11;
  m.adj01 = -m.g01;
  m.adj11 = m.g00;
  return m;
}

double bulk_term(const Discretization& disc, const Vec& t, const Vec& phi) {
  const Channels ch = branch_channels(disc, t, phi);
  return disc.h.dot(density(disc.spec(), ch, phi, 0).e);
}

double evaluate_bulk_action(const Discretization& disc, const StateVector& st) {
  check_state(disc, st);
  return bulk_term(disc, st.t1, st.phi1) - bulk_term(disc, st.t2, st.phi2);
}

double evaluate_action(const Discretization& disc, const StateVector& st) {
  const double bulk = evaluate_bulk_action(disc, st);
  const Vec flat = st.pack();
  const Layout L = disc.layout();
  const Vec x = flat.head(L.primal_size());
  const Vec mu = flat.tail(L.size() - L.primal_size());
  return bulk + mu.dot(disc.constraints * x - disc.constraint_rhs);
}

double evaluate_action(const ProblemSpec& spec, const StateVector& st) {
  return evaluate_action(Discretization(spec), st);
}

Vec evaluate_gradient(const Discretization& disc, const Vec& flat) {
  const Layout L = disc.layout();
  if (flat.size() != L.size()) throw_dimension("evaluate_gradient", L.size(), flat.size());
  if (!flat.allFinite()) throw Error("evaluate_gradient: non-finite state entries");
  const int nv = L.nv;
  const Vec x = flat.head(L.primal_size());
  const Vec mu = flat.tail(L.size() - L.primal_size());
  const BranchGradient g1 = branch_gradient(disc, x.segment(L.primal(0), nv), x.segment(L.primal(2), nv));
  const BranchGradient g2 = branch_gradient(disc, x.segment(L.primal(1), nv), x.segment(L.primal(3), nv));
  Vec g(L.size());
  g.segment(L.primal(0), nv) = g1.gt;
  g.segment(L.primal(1), nv) = -g2.gt;
  g.segment(L.primal(2), nv) = g1.gphi;
  g.segment(L.primal(3), nv) = -g2.gphi;
  g.head(L.primal_size()) += disc.constraints.transpose() * mu;
  g.tail(L.size() - L.primal_size()) = disc.constraints * x - disc.constraint_rhs;
  return g;
}

Vec evaluate_gradient(const Discretization& disc, const StateVector& st) {
  check_state(disc, st);
  return evaluate_gradient(disc, st.pack());
}

Vec evaluate_gradient(const ProblemSpec& spec, const StateVector& st) {
  return evaluate_gradient(Discretization(spec), st);
}

SpMat evaluate_hessian(const Discretization& disc, const Vec& flat) {
  const Layout L = disc.layout();
  if (flat.size() != L.size()) throw_dimension("evaluate_hessian", L.size(), flat.size());
  const int nv = L.nv;
  const BranchHessian h1 = branch_hessian(disc, flat.segment(L.primal(0), nv), flat.segment(L.primal(2), nv));
  const BranchHessian h2 = branch_hessian(disc, flat.segment(L.primal(1), nv), flat.segment(L.primal(3), nv));
  std::vector<Triplet> trip;
  trip.reserve(2 * (h1.tt.nonZeros() + 2 * h1.tphi.nonZeros() + h1.phiphi.nonZeros()) +
               2 * disc.constraints.nonZeros());
  const int t1 = L.primal(0), t2 = L.primal(1), p1 = L.primal(2), p2 = L.primal(3);
  append(trip, h1.tt, t1, t1, 1.0);
  append(trip, h1.tphi, t1, p1, 1.0);
  append(trip, h1.tphi, p1, t1, 1.0, true);
  append(trip, h1.phiphi, p1, p1, 1.0);
  append(trip, h2.tt, t2, t2, -1.0);
  append(trip, h2.tphi, t2, p2, -1.0);
  append(trip, h2.tphi, p2, t2, -1.0, true);
  append(trip, h2.phiphi, p2, p2, -1.0);
  append(trip, disc.constraints, L.primal_size(), 0, 1.0);
  append(trip, disc.constraints, 0, L.primal_size(), 1.0, true);
  SpMat H(L.size(), L.size());
  H.setFromTriplets(trip.begin(), trip.end());
  H.makeCompressed();
  return H;
}

double ConstraintResiduals::max() const {
  return std::max({initial_t, initial_phi, initial_dt, initial_dphi, connect_t, connect_phi, connect_dt,
                   connect_dphi, wall_phi1, wall_phi2});
}

ConstraintResiduals constraint_residuals(const Discretization& disc, const StateVector& st) {
  check_state(disc, st);
  const ProblemSpec& spec = disc.spec();
  const GridSpec& g = spec.grid;
  const int last = g.n_tau - 1;
  ConstraintResiduals r;
  r.initial_t = slice_max(st.t1, g, 0, &spec.t_ic);
  r.initial_phi = slice_max(st.phi1, g, 0, &spec.phi_ic);
  r.initial_dt = slice_max(disc.d_tau * st.t1, g, 0, &spec.t_dot_ic);
  r.initial_dphi = slice_max(disc.d_tau * st.phi1, g, 0, &spec.phi_dot_ic);
  r.connect_t = slice_max(st.t1 - st.t2, g, last, nullptr);
  r.connect_phi = slice_max(st.phi1 - st.phi2, g, last, nullptr);
  r.connect_dt = slice_max(disc.d_tau * (st.t1 - st.t2), g, last, nullptr);
  r.connect_dphi = slice_max(disc.d_tau * (st.phi1 - st.phi2), g, last, nullptr);
  r.wall_phi1 = wall_max(st.phi1, spec);
  r.wall_phi2 = wall_max(st.phi2, spec);
  return r;
}

ConstraintResiduals constraint_residuals(const ProblemSpec& spec, const StateVector& st) {
  return constraint_residuals(Discretization(spec), st);
}

}  // namespace nibvp
