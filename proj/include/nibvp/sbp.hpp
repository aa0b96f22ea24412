#pragma once

#include <string>

#include "nibvp/grid.hpp"
#include "nibvp/types.hpp"

namespace nibvp {

enum class SbpOrder { SBP121, SBP242 };
enum class Direction { tau, sigma };

std::string to_string(SbpOrder order);
SbpOrder parse_order(const std::string& name);  // "sbp121" / "SBP242" etc.
int min_points(SbpOrder order);

// One-dimensional diagonal-norm SBP pair: quadrature h and derivative d with
// q = diag(h) d satisfying q + q^T = diag(-1, 0, ..., 0, 1).
struct SbpPair {
  SbpOrder order = SbpOrder::SBP121;
  int n = 0;
  double spacing = 0.0;
  Vec h_diag;
  SpMat d_matrix;

  SpMat q_matrix() const;
  int interior_order() const { return order == SbpOrder::SBP121 ? 2 : 4; }
  int boundary_order() const { return order == SbpOrder::SBP121 ? 1 : 2; }
  int boundary_rows() const { return order == SbpOrder::SBP121 ? 1 : 4; }
};

SbpPair build_sbp_1d(SbpOrder order, int n, double spacing);

SpMat lift_tau(const SbpPair& pair, const GridSpec& grid);
SpMat lift_sigma(const SbpPair& pair, const GridSpec& grid);

// Regularized derivative in affine form: apply(f) = linear * f + offset.
struct AffineOp {
  SpMat linear;
  Vec offset;
  Direction direction = Direction::tau;

  Vec apply(const Vec& f) const { return linear * f + offset; }
};

// linear = base + sigma0 H^{-1} E0, offset = -sigma0 H^{-1} E0 boundary_data, where E0 selects
// the first slice along `direction`. `pair` is the 1D pair of that direction.
AffineOp regularize(const SpMat& base, const SbpPair& pair, const GridSpec& grid,
                    Direction direction, const Vec& boundary_data, double sigma0 = 1.0);

// h_tau^{-1} e_k
Vec discrete_delta_tau(const GridSpec& grid, const SbpPair& pair, int k);

struct SpatialQuadrature {
  SpMat matrix;  // n_tau x total_volume
  Vec h_sigma;

  Vec apply(const Vec& f) const { return matrix * f; }
};

SpatialQuadrature spatial_quadrature(const GridSpec& grid, const SbpPair& pair_sigma);

// Tensor weights h_tau (x) h_sigma in flat index order.
Vec volume_weights(const SbpPair& pair_tau, const SbpPair& pair_sigma);

}  // namespace nibvp
