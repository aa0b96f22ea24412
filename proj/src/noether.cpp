#include "nibvp/noether.hpp"

#include <cmath>

#include "nibvp/action.hpp"
#include "nibvp/error.hpp"
#include "nibvp/parallel.hpp"
#include "nibvp/solver.hpp"

namespace nibvp {

namespace {

double max_deviation(const Vec& q) { return (q.array() - q[0]).abs().maxCoeff(); }

}  // namespace

double ChargeSeries::drift_uncorrected() const { return max_deviation(q_coord + q_field); }

ChargeSeries noether_charge(const Discretization& disc, const StateVector& st) {
  st.check(disc.grid());
  const ProblemSpec& spec = disc.spec();
  const GridSpec& g = spec.grid;
  const Channels ch = unregularized_channels(disc, st.t1, st.phi1);
  const double k = spec.inv_tension();
  const double c2 = spec.wave_speed * spec.wave_speed;
  const auto a = ch.a.array(), s = ch.s.array(), p = ch.p.array(), q = ch.q.array();

  Vec coord = c2 * a;
  if (spec.potential)
    for (long i = 0; i < coord.size(); ++i) coord[i] *= 1.0 - k * spec.potential.v(st.phi1[i]);
  const Vec field = k * c2 * (q.square() * a - p * q * s);

  ChargeSeries cs;
  cs.q_coord = disc.quad.apply(coord);
  cs.q_field = disc.quad.apply(field);
  cs.q_multiplier = Vec::Zero(g.n_tau);
  const Vec& hs = disc.pair_sigma.h_diag;
  const int last = g.n_tau - 1;
  cs.q_multiplier[0] += hs.dot(st.lamt_t) * discrete_delta_tau(g, disc.pair_tau, 0)[0];
  cs.q_multiplier[last] += hs.dot(st.gamt_t) * discrete_delta_tau(g, disc.pair_tau, last)[last];
  cs.q_total = cs.q_coord + cs.q_field + cs.q_multiplier;
  cs.drift = max_deviation(cs.q_total);
  return cs;
}

ChargeSeries noether_charge(const ProblemSpec& spec, const StateVector& st) {
  return noether_charge(Discretization(spec), st);
}

Vec conventional_energy(const Discretization& disc, const StateVector& st) {
  st.check(disc.grid());
  const Channels ch = unregularized_channels(disc, st.t1, st.phi1);
  for (long i = 0; i < ch.a.size(); ++i)
    if (std::abs(ch.a[i]) < 1e-12)
      throw Error("conventional_energy: degenerate time map (|D_tau t| < 1e-12 at flat index " +
                  std::to_string(i) + ")");
  const Vec dens = 0.5 * ((ch.p.array() / ch.a.array()).square() + ch.q.array().square());
  return disc.quad.apply(dens);
}

Vec conventional_energy(const ProblemSpec& spec, const StateVector& st) {
  return conventional_energy(Discretization(spec), st);
}

std::vector<DriftRow> noether_drift_sweep(const SpecFactory& make_spec, const std::vector<double>& t_dot_values,
                                          const SolverOptions& options, int jobs) {
  std::vector<DriftRow> rows(t_dot_values.size());
  parallel_for(static_cast<int>(t_dot_values.size()), jobs, [&](int i) {
    DriftRow& row = rows[i];
    row.t_dot_ic = t_dot_values[i];
    try {
      if (!(row.t_dot_ic > 0.0)) throw Error("t_dot_ic must be positive");
      const ProblemSpec spec = make_spec(row.t_dot_ic);
      row.n_tau = spec.grid.n_tau;
      const SolveReport rep = solve(spec, options);
      row.converged = rep.converged;
      row.iterations = rep.iterations;
      row.q0 = rep.charges.q_total[0];
      row.drift = rep.charges.drift;
      row.message = rep.message;
    } catch (const std::exception& e) {
      row.converged = false;
      row.message = e.what();
    }
  });
  return rows;
}

}  // namespace nibvp
