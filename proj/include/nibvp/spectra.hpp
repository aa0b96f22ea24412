#pragma once

#include <complex>
#include <vector>

#include "nibvp/sbp.hpp"
#include "nibvp/types.hpp"

namespace nibvp {

// dim ker(A^k) once it stops growing: the algebraic multiplicity of the eigenvalue 0.
int generalized_nullity(const Mat& a, double rel_tol = 1e-10);

struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;  // sorted by modulus
  int zero_modes = 0;
  double scale = 0.0;               // infinity norm of the operator
  double max_real_nonzero = 0.0;    // max |Re| outside the zero cluster, divided by scale
  double min_real = 0.0;
  double min_modulus = 0.0;
};

Spectrum operator_spectrum(const Mat& a);
double min_singular_value(const Mat& a);

// Regularized 1D operator d + sigma0 h^{-1} e0 e0^T.
Mat regularized_1d(const SbpPair& pair, double sigma0 = 1.0);

// Affine extension [[linear, offset], [0, 1]] for constant boundary data f_bnd.
Mat affine_extension(const Mat& linear, const Vec& offset);

}  // namespace nibvp
