#include "nibvp/sbp.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "nibvp/error.hpp"

namespace nibvp {

namespace {

struct Rational {
  int num;
  int den;
  double value() const { return static_cast<double>(num) / den; }
};

// Upper-left corner of the SBP242 derivative (rows 0..3, columns 0..5), unit spacing.
constexpr std::array<std::array<Rational, 6>, 4> kCorner242{{
    {{{-24, 17}, {59, 34}, {-4, 17}, {-3, 34}, {0, 1}, {0, 1}}},
    {{{-1, 2}, {0, 1}, {1, 2}, {0, 1}, {0, 1}, {0, 1}}},
    {{{4, 43}, {-59, 86}, {0, 1}, {59, 86}, {-4, 43}, {0, 1}}},
    {{{3, 98}, {0, 1}, {-59, 98}, {0, 1}, {32, 49}, {-4, 49}}},
}};
constexpr std::array<Rational, 4> kNorm242{{{17, 48}, {59, 48}, {43, 48}, {49, 48}}};
constexpr std::array<Rational, 5> kInterior242{{{1, 12}, {-2, 3}, {0, 1}, {2, 3}, {-1, 12}}};

}  // namespace

std::string to_string(SbpOrder order) {
  return order == SbpOrder::SBP121 ? "sbp121" : "sbp242";
}

SbpOrder parse_order(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "sbp121" || s == "121") return SbpOrder::SBP121;
  if (s == "sbp242" || s == "242") return SbpOrder::SBP242;
  throw Error("unknown SBP order '" + name + "' (expected sbp121 or sbp242)");
}

int min_points(SbpOrder order) { return order == SbpOrder::SBP121 ? 4 : 8; }

SpMat SbpPair::q_matrix() const {
  SpMat q = h_diag.asDiagonal() * d_matrix;
  q.makeCompressed();
  return q;
}

SbpPair build_sbp_1d(SbpOrder order, int n, double spacing) {
  if (n < min_points(order))
    throw Error(to_string(order) + " requires at least " + std::to_string(min_points(order)) +
                " points (got " + std::to_string(n) + ")");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw Error("SBP spacing must be positive");

  SbpPair p;
  p.order = order;
  p.n = n;
  p.spacing = spacing;
  p.h_diag = Vec::Constant(n, spacing);

  std::vector<Triplet> trip;
  if (order == SbpOrder::SBP121) {
    p.h_diag[0] = p.h_diag[n - 1] = 0.5 * spacing;
    trip.emplace_back(0, 0, -1.0 / spacing);
    trip.emplace_back(0, 1, 1.0 / spacing);
    for (int i = 1; i < n - 1; ++i) {
      trip.emplace_back(i, i - 1, -0.5 / spacing);
      trip.emplace_back(i, i + 1, 0.5 / spacing);
    }
    trip.emplace_back(n - 1, n - 2, -1.0 / spacing);
    trip.emplace_back(n - 1, n - 1, 1.0 / spacing);
  } else {
    for (int i = 0; i < 4; ++i) {
      p.h_diag[i] = p.h_diag[n - 1 - i] = kNorm242[i].value() * spacing;
      for (int j = 0; j < 6; ++j) {
        const Rational r = kCorner242[i][j];
        if (r.num == 0) continue;
        trip.emplace_back(i, j, r.value() / spacing);
        trip.emplace_back(n - 1 - i, n - 1 - j, -r.value() / spacing);
      }
    }
    for (int i = 4; i < n - 4; ++i)
      for (int k = 0; k < 5; ++k)
        if (kInterior242[k].num != 0) trip.emplace_back(i, i - 2 + k, kInterior242[k].value() / spacing);
  }
  p.d_matrix.resize(n, n);
  p.d_matrix.setFromTriplets(trip.begin(), trip.end());
  p.d_matrix.makeCompressed();
  return p;
}

SpMat lift_tau(const SbpPair& pair, const GridSpec& grid) {
  if (pair.n != grid.n_tau) throw_dimension("lift_tau", grid.n_tau, pair.n);
  SpMat eye(grid.n_sigma, grid.n_sigma);
  eye.setIdentity();
  SpMat out = Eigen::kroneckerProduct(pair.d_matrix, eye);
  out.makeCompressed();
  return out;
}

SpMat lift_sigma(const SbpPair& pair, const GridSpec& grid) {
  if (pair.n != grid.n_sigma) throw_dimension("lift_sigma", grid.n_sigma, pair.n);
  SpMat eye(grid.n_tau, grid.n_tau);
  eye.setIdentity();
  SpMat out = Eigen::kroneckerProduct(eye, pair.d_matrix);
  out.makeCompressed();
  return out;
}

AffineOp regularize(const SpMat& base, const SbpPair& pair, const GridSpec& grid,
                    Direction direction, const Vec& boundary_data, double sigma0) {
  const int nv = grid.total_volume();
  if (base.rows() != nv || base.cols() != nv) throw_dimension("regularize(base)", nv, base.rows());
  if (boundary_data.size() != nv) throw_dimension("regularize(boundary_data)", nv, boundary_data.size());
  const int expected_n = direction == Direction::tau ? grid.n_tau : grid.n_sigma;
  if (pair.n != expected_n) throw_dimension("regularize(pair)", expected_n, pair.n);

  auto on_slice = [&](int idx) {
    return direction == Direction::tau ? idx < grid.n_sigma : idx % grid.n_sigma == 0;
  };
  for (int k = 0; k < nv; ++k)
    if (!on_slice(k) && boundary_data[k] != 0.0)
      throw Error("regularize: boundary data nonzero off the penalized slice (flat index " +
                  std::to_string(k) + ")");

  const double w = sigma0 / pair.h_diag[0];
  std::vector<Triplet> trip;
  AffineOp op;
  op.direction = direction;
  op.offset = Vec::Zero(nv);
  for (int k = 0; k < nv; ++k) {
    if (!on_slice(k)) continue;
    trip.emplace_back(k, k, w);
    op.offset[k] = -w * boundary_data[k];
  }
  SpMat s(nv, nv);
  s.setFromTriplets(trip.begin(), trip.end());
  op.linear = base + s;
  op.linear.makeCompressed();
  return op;
}

Vec discrete_delta_tau(const GridSpec& grid, const SbpPair& pair, int k) {
  if (pair.n != grid.n_tau) throw_dimension("discrete_delta_tau", grid.n_tau, pair.n);
  if (k < 0 || k >= grid.n_tau)
    throw Error("discrete_delta_tau: slice " + std::to_string(k) + " outside [0, " +
                std::to_string(grid.n_tau) + ")");
  Vec out = Vec::Zero(grid.n_tau);
  out[k] = 1.0 / pair.h_diag[k];
  return out;
}

SpatialQuadrature spatial_quadrature(const GridSpec& grid, const SbpPair& pair_sigma) {
  if (pair_sigma.n != grid.n_sigma) throw_dimension("spatial_quadrature", grid.n_sigma, pair_sigma.n);
  SpatialQuadrature sq;
  sq.h_sigma = pair_sigma.h_diag;
  std::vector<Triplet> trip;
  trip.reserve(grid.total_volume());
  for (int i = 0; i < grid.n_tau; ++i)
    for (int j = 0; j < grid.n_sigma; ++j) trip.emplace_back(i, grid.index(i, j), sq.h_sigma[j]);
  sq.matrix.resize(grid.n_tau, grid.total_volume());
  sq.matrix.setFromTriplets(trip.begin(), trip.end());
  sq.matrix.makeCompressed();
  return sq;
}

Vec volume_weights(const SbpPair& pair_tau, const SbpPair& pair_sigma) {
  Vec h(pair_tau.n * pair_sigma.n);
  for (int i = 0; i < pair_tau.n; ++i)
    h.segment(i * pair_sigma.n, pair_sigma.n) = pair_tau.h_diag[i] * pair_sigma.h_diag;
  return h;
}

}  // namespace nibvp
