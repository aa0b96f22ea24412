#include <cmath>

#include "nibvp/error.hpp"
#include "nibvp/oracle.hpp"

namespace nibvp {

double l2_error(const Vec& a, const Vec& b, const Vec& quadrature) {
  if (a.size() != b.size()) throw_dimension("l2_error", a.size(), b.size());
  if (quadrature.size() != a.size()) throw_dimension("l2_error(quadrature)", a.size(), quadrature.size());
  const Vec d = a - b;
  return std::sqrt(d.dot(quadrature.cwiseProduct(d)));
}

PowerLawFit fit_convergence(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw Error("fit_convergence: need at least 3 points");
  const int n = static_cast<int>(points.size());
  Mat A(n, 2);
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    const auto [s, e] = points[i];
    if (!(s > 0.0) || !(e > 0.0) || !std::isfinite(s) || !std::isfinite(e))
      throw Error("fit_convergence: spacings and errors must be positive and finite");
    A(i, 0) = 1.0;
    A(i, 1) = std::log(s);
    y[i] = std::log(e);
  }
  const Vec c = A.colPivHouseholderQr().solve(y);
  return {std::exp(c[0]), c[1]};
}

ErrorNorms error_norms(const Discretization& disc, const StateVector& st, const MolReference& ref) {
  const ProblemSpec& spec = disc.spec();
  ErrorNorms e;
  e.eps_t = l2_error(st.t1, ref.t, disc.h);
  e.eps_phi = l2_error(st.phi1, dalembert_on_map(spec, ref.t), disc.h);
  e.eps_phi_we = l2_error(st.phi1, dalembert_on_map(spec, st.t1), disc.h);
  e.eps_phi_mol = l2_error(st.phi1, ref.phi, disc.h);
  return e;
}

}  // namespace nibvp
