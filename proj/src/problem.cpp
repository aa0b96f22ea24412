#include "nibvp/problem.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "nibvp/error.hpp"

namespace nibvp {

namespace {

Vec sample(const Profile& f, int n, double a, double d) {
  Vec out(n);
  for (int j = 0; j < n; ++j) out[j] = f ? f(a + j * d) : 0.0;
  return out;
}

void expect(const Vec& v, long n, const char* name) {
  if (v.size() != n) throw_dimension(name, n, v.size());
  if (!v.allFinite()) throw Error(std::string(name) + " has non-finite entries");
}

}  // namespace

double ProblemSpec::inv_tension() const { return std::isinf(tension) ? 0.0 : 1.0 / tension; }

void ProblemSpec::validate() const {
  grid.validate();
  if (grid.n_tau < min_points(order) || grid.n_sigma < min_points(order))
    throw Error(to_string(order) + " requires at least " + std::to_string(min_points(order)) +
                " points per direction (got " + std::to_string(grid.n_tau) + "x" +
                std::to_string(grid.n_sigma) + ")");
  if (!(tension > 0.0)) throw Error("tension T must be positive");
  if (!(wave_speed > 0.0) || !std::isfinite(wave_speed)) throw Error("wave speed c must be positive");
  if (!(sigma0 > 0.0)) throw Error("penalty weight sigma0 must be positive");
  expect(phi_ic, grid.n_sigma, "phi_ic");
  expect(phi_dot_ic, grid.n_sigma, "phi_dot_ic");
  expect(t_ic, grid.n_sigma, "t_ic");
  expect(t_dot_ic, grid.n_sigma, "t_dot_ic");
  expect(phi_bc_left, grid.n_tau, "phi_bc_left");
  expect(phi_bc_right, grid.n_tau, "phi_bc_right");
  const double tol = 1e-14 * (1.0 + phi_ic.cwiseAbs().maxCoeff());
  if (std::abs(phi_ic[0] - phi_bc_left[0]) > tol || std::abs(phi_ic[grid.n_sigma - 1] - phi_bc_right[0]) > tol)
    throw Error("corner compatibility violated: phi_ic endpoints must equal the spatial boundary data");
  for (int j = 0; j < grid.n_sigma; ++j)
    if (!(t_dot_ic[j] > 0.0)) throw Error("t_dot_ic must be positive everywhere");
}

ProblemSpec make_problem(const GridSpec& grid, SbpOrder order, double tension, double wave_speed,
                         const InitialProfiles& profiles, double sigma0) {
  grid.validate();
  ProblemSpec s;
  s.grid = grid;
  s.order = order;
  s.tension = tension;
  s.wave_speed = wave_speed;
  s.sigma0 = sigma0;
  s.profiles = profiles;
  const double a = grid.sigma_interval[0], d = grid.d_sigma();
  s.phi_ic = sample(profiles.phi, grid.n_sigma, a, d);
  s.phi_dot_ic = sample(profiles.phi_dot, grid.n_sigma, a, d);
  s.t_ic = sample(profiles.t, grid.n_sigma, a, d);
  s.t_dot_ic = sample(profiles.t_dot, grid.n_sigma, a, d);
  s.phi_bc_left = Vec::Constant(grid.n_tau, s.phi_ic[0]);
  s.phi_bc_right = Vec::Constant(grid.n_tau, s.phi_ic[grid.n_sigma - 1]);
  s.validate();
  return s;
}

InitialProfiles bump_profiles(double t_dot_ic) {
  InitialProfiles p;
  p.phi = [](double s) { return std::sin(std::numbers::pi * s) * std::exp(-100.0 * (s - 0.5) * (s - 0.5)); };
  p.phi_dot = [](double) { return 0.0; };
  p.t = [](double) { return 0.0; };
  p.t_dot = [t_dot_ic](double) { return t_dot_ic; };
  return p;
}

InitialProfiles vacuum_profiles(double t_dot_ic) {
  InitialProfiles p = bump_profiles(t_dot_ic);
  p.phi = [](double) { return 0.0; };
  return p;
}

double initial_field_energy_density(const ProblemSpec& spec) {
  const SbpPair ps = build_sbp_1d(spec.order, spec.grid.n_sigma, spec.grid.d_sigma());
  const Vec dphi = ps.d_matrix * spec.phi_ic;
  double m = 0.0;
  for (int j = 0; j < spec.grid.n_sigma; ++j) {
    const double v = spec.phi_dot_ic[j] / spec.t_dot_ic[j];
    m = std::max(m, 0.5 * (v * v + dphi[j] * dphi[j]));
  }
  return m;
}

StateVector StateVector::zeros(const GridSpec& g) {
  const int nv = g.total_volume();
  StateVector s;
  for (Vec* v : {&s.t1, &s.t2, &s.phi1, &s.phi2}) *v = Vec::Zero(nv);
  for (Vec* v : {&s.lam_t, &s.lam_phi, &s.lamt_t, &s.lamt_phi, &s.gam_t, &s.gam_phi, &s.gamt_t, &s.gamt_phi})
    *v = Vec::Zero(g.n_sigma);
  for (Vec* v : {&s.kap_phi, &s.kapt_phi, &s.xi_phi, &s.xit_phi}) *v = Vec::Zero(g.n_tau);
  return s;
}

StateVector StateVector::unpack(const GridSpec& g, const Vec& flat) {
  const Layout L(g);
  if (flat.size() != L.size()) throw_dimension("StateVector::unpack", L.size(), flat.size());
  StateVector s;
  Vec* primal[] = {&s.t1, &s.t2, &s.phi1, &s.phi2};
  for (int b = 0; b < 4; ++b) *primal[b] = flat.segment(L.primal(b), L.nv);
  Vec* slice[] = {&s.lam_t, &s.lam_phi, &s.lamt_t, &s.lamt_phi, &s.gam_t, &s.gam_phi, &s.gamt_t, &s.gamt_phi};
  for (int b = 0; b < 8; ++b) *slice[b] = flat.segment(L.slice_mult(b), L.n_sigma);
  Vec* wall[] = {&s.kap_phi, &s.kapt_phi, &s.xi_phi, &s.xit_phi};
  for (int b = 0; b < 4; ++b) *wall[b] = flat.segment(L.wall_mult(b), L.n_tau);
  return s;
}

Vec StateVector::pack() const {
  const long nv = t1.size(), ns = lam_t.size(), nt = kap_phi.size();
  Vec flat(4 * nv + 8 * ns + 4 * nt);
  long o = 0;
  for (const Vec* v : {&t1, &t2, &phi1, &phi2, &lam_t, &lam_phi, &lamt_t, &lamt_phi, &gam_t, &gam_phi,
                       &gamt_t, &gamt_phi, &kap_phi, &kapt_phi, &xi_phi, &xit_phi}) {
    flat.segment(o, v->size()) = *v;
    o += v->size();
  }
  return flat;
}

void StateVector::check(const GridSpec& g) const {
  const int nv = g.total_volume();
  for (const Vec* v : {&t1, &t2, &phi1, &phi2}) expect(*v, nv, "state primal block");
  for (const Vec* v : {&lam_t, &lam_phi, &lamt_t, &lamt_phi, &gam_t, &gam_phi, &gamt_t, &gamt_phi})
    expect(*v, g.n_sigma, "state slice multiplier");
  for (const Vec* v : {&kap_phi, &kapt_phi, &xi_phi, &xit_phi}) expect(*v, g.n_tau, "state wall multiplier");
}

}  // namespace nibvp
