#include "nibvp/discretization.hpp"

#include <cmath>
#include <utility>

#include "nibvp/error.hpp"

namespace nibvp {

Discretization::Discretization(ProblemSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const GridSpec& g = spec_.grid;
  const int nv = g.total_volume(), ns = g.n_sigma, nt = g.n_tau;

  pair_tau = build_sbp_1d(spec_.order, nt, g.d_tau());
  pair_sigma = build_sbp_1d(spec_.order, ns, g.d_sigma());
  d_tau = lift_tau(pair_tau, g);
  d_sigma = lift_sigma(pair_sigma, g);
  d_tau_T = d_tau.transpose();
  d_sigma_T = d_sigma.transpose();

  Vec bt = Vec::Zero(nv), bp = Vec::Zero(nv), bl = Vec::Zero(nv);
  bt.head(ns) = spec_.t_ic;
  bp.head(ns) = spec_.phi_ic;
  for (int i = 0; i < nt; ++i) bl[g.index(i, 0)] = spec_.phi_bc_left[i];
  dt_t = regularize(d_tau, pair_tau, g, Direction::tau, bt, spec_.sigma0);
  dt_phi = regularize(d_tau, pair_tau, g, Direction::tau, bp, spec_.sigma0);
  ds_phi = regularize(d_sigma, pair_sigma, g, Direction::sigma, bl, spec_.sigma0);
  dt_t_T = dt_t.linear.transpose();
  dt_phi_T = dt_phi.linear.transpose();
  ds_phi_T = ds_phi.linear.transpose();

  h = volume_weights(pair_tau, pair_sigma);
  quad = spatial_quadrature(g, pair_sigma);

  const Layout L(g);
  const int nm = L.size() - L.primal_size();
  const Vec& hs = pair_sigma.h_diag;
  const Vec& ht = pair_tau.h_diag;
  std::vector<Triplet> trip;
  constraint_rhs = Vec::Zero(nm);

  auto row_of = [&](int flat) { return flat - L.primal_size(); };
  auto add_dtau_row = [&](int row, int block, int slice, int j, double w) {
    const int k = g.index(slice, j);
    for (SpMat::InnerIterator it(d_tau_T, k); it; ++it)
      trip.emplace_back(row, L.primal(block) + static_cast<int>(it.row()), w * it.value());
  };
  const int last = nt - 1;
  for (int j = 0; j < ns; ++j) {
    int r = row_of(L.slice_mult(0) + j);
    trip.emplace_back(r, L.primal(0) + g.index(0, j), hs[j]);
    constraint_rhs[r] = hs[j] * spec_.t_ic[j];

    r = row_of(L.slice_mult(1) + j);
    trip.emplace_back(r, L.primal(2) + g.index(0, j), hs[j]);
    constraint_rhs[r] = hs[j] * spec_.phi_ic[j];

    r = row_of(L.slice_mult(2) + j);
    add_dtau_row(r, 0, 0, j, hs[j]);
    constraint_rhs[r] = hs[j] * spec_.t_dot_ic[j];

    r = row_of(L.slice_mult(3) + j);
    add_dtau_row(r, 2, 0, j, hs[j]);
    constraint_rhs[r] = hs[j] * spec_.phi_dot_ic[j];

    r = row_of(L.slice_mult(4) + j);
    trip.emplace_back(r, L.primal(0) + g.index(last, j), hs[j]);
    trip.emplace_back(r, L.primal(1) + g.index(last, j), -hs[j]);

    r = row_of(L.slice_mult(5) + j);
    trip.emplace_back(r, L.primal(2) + g.index(last, j), hs[j]);
    trip.emplace_back(r, L.primal(3) + g.index(last, j), -hs[j]);

    r = row_of(L.slice_mult(6) + j);
    add_dtau_row(r, 0, last, j, hs[j]);
    add_dtau_row(r, 1, last, j, -hs[j]);

    r = row_of(L.slice_mult(7) + j);
    add_dtau_row(r, 2, last, j, hs[j]);
    add_dtau_row(r, 3, last, j, -hs[j]);
  }
  for (int i = 0; i < nt; ++i) {
    const int left = g.index(i, 0), right = g.index(i, ns - 1);
    int r = row_of(L.wall_mult(0) + i);
    trip.emplace_back(r, L.primal(2) + left, ht[i]);
    constraint_rhs[r] = ht[i] * spec_.phi_bc_left[i];

    r = row_of(L.wall_mult(1) + i);
    trip.emplace_back(r, L.primal(2) + right, ht[i]);
    constraint_rhs[r] = ht[i] * spec_.phi_bc_right[i];

    r = row_of(L.wall_mult(2) + i);
    trip.emplace_back(r, L.primal(3) + left, ht[i]);
    constraint_rhs[r] = ht[i] * spec_.phi_bc_left[i];

    r = row_of(L.wall_mult(3) + i);
    trip.emplace_back(r, L.primal(3) + right, ht[i]);
    constraint_rhs[r] = ht[i] * spec_.phi_bc_right[i];
  }
  constraints.resize(nm, L.primal_size());
  constraints.setFromTriplets(trip.begin(), trip.end());
  constraints.makeCompressed();

  const Vec wl = pair_tau.d_matrix * spec_.phi_bc_left, wr = pair_tau.d_matrix * spec_.phi_bc_right;
  const double scale = 1.0 + spec_.phi_dot_ic.cwiseAbs().maxCoeff() + wl.cwiseAbs().maxCoeff() + wr.cwiseAbs().maxCoeff();
  if (std::abs(spec_.phi_dot_ic[0] - wl[0]) > 1e-12 * scale ||
      std::abs(spec_.phi_dot_ic[ns - 1] - wr[0]) > 1e-12 * scale)
    throw Error("corner compatibility violated: phi_dot_ic at the walls must match the tau derivative of the wall data");

  for (int b : {1, 3, 5, 7}) {
    pinned.push_back(L.slice_mult(b));
    pinned.push_back(L.slice_mult(b) + ns - 1);
  }
}

}  // namespace nibvp
