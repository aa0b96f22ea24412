#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nibvp/error.hpp"
#include "nibvp/oracle.hpp"

namespace nibvp {

namespace {

// Distance from the left wall after folding onto [0, L], and the sign of the odd extension.
std::pair<double, double> fold(double y, double a, double len) {
  double r = std::fmod(y - a, 2.0 * len);
  if (r < 0.0) r += 2.0 * len;
  if (r <= len) return {r, 1.0};
  return {2.0 * len - r, -1.0};
}

double odd_extension(const Profile& f, double y, double a, double len) {
  auto [u, sgn] = fold(y, a, len);
  return sgn * f(a + u);
}

// Antiderivative of the odd extension, based at the left wall; even and 2L-periodic.
double odd_antiderivative(const Profile& g, double y, double a, double len) {
  const double u = fold(y, a, len).first;
  if (u == 0.0) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate([&](double s) { return g(a + s); }, 0.0, u, 12, 1e-14);
}

void require_wall_zero(const Profile& f, std::array<double, 2> dom, const char* what) {
  const double l = f(dom[0]), r = f(dom[1]);
  if (std::abs(l) > 1e-12 || std::abs(r) > 1e-12) {
    std::ostringstream os;
    os << "dalembert: " << what << " must vanish at the walls (got " << l << ", " << r << ")";
    throw Error(os.str());
  }
}

}  // namespace

double dalembert(const Profile& phi_ic, const Profile& phi_dot_ic, double x, double t, double c,
                 std::array<double, 2> domain) {
  const double a = domain[0], len = domain[1] - domain[0];
  if (!(len > 0.0)) throw Error("dalembert: empty domain");
  if (!(c > 0.0)) throw Error("dalembert: wave speed must be positive");
  if (x < a - 1e-14 * len || x > domain[1] + 1e-14 * len) throw Error("dalembert: x outside the domain");
  if (!(t >= 0.0)) throw Error("dalembert: t must be non-negative");
  double out = 0.0;
  if (phi_ic) {
    require_wall_zero(phi_ic, domain, "phi_ic");
    if (t == 0.0) return phi_ic(x);
    out = 0.5 * (odd_extension(phi_ic, x - c * t, a, len) + odd_extension(phi_ic, x + c * t, a, len));
  }
  if (t == 0.0) return 0.0;
  if (phi_dot_ic) {
    require_wall_zero(phi_dot_ic, domain, "phi_dot_ic");
    out += (odd_antiderivative(phi_dot_ic, x + c * t, a, len) - odd_antiderivative(phi_dot_ic, x - c * t, a, len)) /
           (2.0 * c);
  }
  return out;
}

Vec dalembert_on_map(const ProblemSpec& spec, const Vec& time_map) {
  const GridSpec& g = spec.grid;
  if (time_map.size() != g.total_volume()) throw_dimension("dalembert_on_map", g.total_volume(), time_map.size());
  if (!spec.profiles.phi) throw Error("dalembert_on_map: the problem carries no closed-form initial data");
  Profile vel;
  if (spec.profiles.phi_dot) {
    const Profile pd = spec.profiles.phi_dot, td = spec.profiles.t_dot;
    vel = [pd, td](double s) { return pd(s) / td(s); };
  }
  Vec out(g.total_volume());
  for (int i = 0; i < g.n_tau; ++i)
    for (int j = 0; j < g.n_sigma; ++j) {
      const int k = g.index(i, j);
      const double dt = std::max(0.0, time_map[k] - spec.t_ic[j]);
      out[k] = dalembert(spec.profiles.phi, vel, g.sigma(j), dt, spec.wave_speed, g.sigma_interval);
    }
  return out;
}

}  // namespace nibvp
