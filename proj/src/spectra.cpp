#include "nibvp/spectra.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace nibvp {

namespace {

int numerical_nullity(const Mat& a, double rel_tol) {
  Eigen::BDCSVD<Mat> svd(a);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return static_cast<int>(a.cols());
  int r = 0;
  for (long i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * s[0]) ++r;
  return static_cast<int>(a.cols()) - r;
}

}  // namespace

int generalized_nullity(const Mat& a, double rel_tol) {
  const double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();
  const Mat b = nrm > 0 ? Mat(a / nrm) : a;
  Mat p = b;
  int prev = numerical_nullity(p, rel_tol);
  for (long k = 2; k <= a.rows(); ++k) {
    p = p * b;
    const int cur = numerical_nullity(p, rel_tol);
    if (cur == prev) break;
    prev = cur;
  }
  return prev;
}

Spectrum operator_spectrum(const Mat& a) {
  Spectrum sp;
  Eigen::EigenSolver<Mat> es(a, false);
  const auto& ev = es.eigenvalues();
  sp.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(sp.eigenvalues.begin(), sp.eigenvalues.end(),
            [](auto x, auto y) { return std::abs(x) < std::abs(y); });
  sp.scale = a.cwiseAbs().rowwise().sum().maxCoeff();
  sp.zero_modes = generalized_nullity(a);
  sp.min_real = sp.eigenvalues.empty() ? 0.0 : sp.eigenvalues[0].real();
  for (const auto& z : sp.eigenvalues) sp.min_real = std::min(sp.min_real, z.real());
  sp.min_modulus = sp.eigenvalues.empty() ? 0.0 : std::abs(sp.eigenvalues[0]);
  for (std::size_t i = sp.zero_modes; i < sp.eigenvalues.size(); ++i)
    sp.max_real_nonzero = std::max(sp.max_real_nonzero, std::abs(sp.eigenvalues[i].real()) / sp.scale);
  return sp;
}

double min_singular_value(const Mat& a) {
  Eigen::BDCSVD<Mat> svd(a);
  return svd.singularValues().minCoeff();
}

Mat regularized_1d(const SbpPair& pair, double sigma0) {
  Mat d = Mat(pair.d_matrix);
  d(0, 0) += sigma0 / pair.h_diag[0];
  return d;
}

Mat affine_extension(const Mat& linear, const Vec& offset) {
  const long n = linear.rows();
  Mat out = Mat::Zero(n + 1, n + 1);
  out.topLeftCorner(n, n) = linear;
  out.topRightCorner(n, 1) = offset;
  out(n, n) = 1.0;
  return out;
}

}  // namespace nibvp
