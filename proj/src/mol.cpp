#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>
#include <nlohmann/json.hpp>

#include "nibvp/error.hpp"
#include "nibvp/oracle.hpp"

namespace nibvp {

namespace {

using State = std::vector<double>;

constexpr int kHalf = 4;
constexpr std::array<double, kHalf> kD8{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};

// Eighth-order centered first derivative on nodes 0..m with mirror ghosts:
// parity +1 extends evenly about both walls, -1 oddly.
void derivative(const double* u, int m, double parity, double dx, double* out) {
  auto at = [&](int k) {
    if (k < 0) return parity * u[-k];
    if (k > m) return parity * u[2 * m - k];
    return u[k];
  };
  for (int j = 0; j <= m; ++j) {
    double s = 0.0;
    for (int k = 1; k <= kHalf; ++k) s += kD8[k - 1] * (at(j + k) - at(j - k));
    out[j] = s / dx;
  }
}

struct Coupled {
  int m;            // last fine node index
  double dx;
  double inv_t;     // 1/T
  double c2;
  bool frozen_t;
  std::vector<double> tp_frozen, tdp_frozen, td_frozen;  // used when frozen_t
  double tau0;
  mutable std::vector<double> tp, pp, td, pd, es, teq, tmp;

  Coupled(int m_, double dx_, double inv_t_, double c2_, bool frozen)
      : m(m_), dx(dx_), inv_t(inv_t_), c2(c2_), frozen_t(frozen), tau0(0.0),
        tp(m_ + 1), pp(m_ + 1), td(m_ + 1), pd(m_ + 1), es(m_ + 1), teq(m_ + 1), tmp(m_ + 1) {}

  // Velocities from the conjugate fluxes.
  void velocities(const State& y, double tau) const {
    const int n = m + 1;
    const double* t = y.data();
    const double* phi = t + n;
    const double* pit = phi + n;
    const double* piphi = pit + n;
    derivative(phi, m, -1.0, dx, pp.data());
    if (frozen_t) {
      for (int j = 0; j < n; ++j) {
        tp[j] = tp_frozen[j] + tdp_frozen[j] * (tau - tau0);
        td[j] = td_frozen[j];
        const double a22 = c2 * tp[j] * tp[j] - 1.0;
        if (std::abs(a22) < 1e-12) throw Error("mol_reference: degenerate flux system (|det| < 1e-12)");
        pd[j] = (piphi[j] + c2 * pp[j] * td[j] * tp[j]) / a22;
      }
      return;
    }
    derivative(t, m, 1.0, dx, tp.data());
    for (int j = 0; j < n; ++j) {
      const double a11 = c2 * (1.0 + inv_t * pp[j] * pp[j]);
      const double a12 = -c2 * inv_t * pp[j] * tp[j];
      const double a21 = -c2 * pp[j] * tp[j];
      const double a22 = c2 * tp[j] * tp[j] - 1.0;
      const double det = a11 * a22 - a12 * a21;
      if (std::abs(det) < 1e-12) throw Error("mol_reference: degenerate flux system (|det| < 1e-12)");
      td[j] = (a22 * pit[j] - a12 * piphi[j]) / det;
      pd[j] = (a11 * piphi[j] - a21 * pit[j]) / det;
    }
  }

  void operator()(const State& y, State& dy, double tau) const {
    const int n = m + 1;
    velocities(y, tau);
    for (int j = 0; j < n; ++j) {
      es[j] = c2 * inv_t * (pd[j] * pd[j] * tp[j] - pd[j] * pp[j] * td[j]);
      teq[j] = c2 * (pp[j] * td[j] * td[j] - pd[j] * td[j] * tp[j]);
    }
    double* dt = dy.data();
    double* dphi = dt + n;
    double* dpit = dphi + n;
    double* dpiphi = dpit + n;
    for (int j = 0; j < n; ++j) {
      dt[j] = frozen_t ? 0.0 : td[j];
      dphi[j] = pd[j];
    }
    if (frozen_t) {
      std::fill(dpit, dpit + n, 0.0);
    } else {
      derivative(es.data(), m, -1.0, dx, tmp.data());
      for (int j = 0; j < n; ++j) dpit[j] = -tmp[j];
    }
    derivative(teq.data(), m, 1.0, dx, tmp.data());
    for (int j = 0; j < n; ++j) dpiphi[j] = -tmp[j];
  }
};

std::string cache_key(const ProblemSpec& spec, const MolOptions& opt, const std::vector<double>& fine_ic) {
  std::ostringstream os;
  os.precision(17);
  os << "mol-v1|" << spec.grid.n_tau << '|' << spec.grid.n_sigma << '|' << spec.grid.tau_interval[0] << '|'
     << spec.grid.tau_interval[1] << '|' << spec.grid.sigma_interval[0] << '|' << spec.grid.sigma_interval[1] << '|'
     << spec.tension << '|' << spec.wave_speed << '|' << opt.refinement << '|' << opt.cfl << '|'
     << opt.trivial_time_map;
  const std::string head = os.str();
  std::uint64_t h = fnv1a(head.data(), head.size());
  h = fnv1a(fine_ic.data(), fine_ic.size() * sizeof(double), h);
  return hex64(h);
}

bool load_cache(const std::filesystem::path& dir, const std::string& key, int nv, MolReference& ref) {
  const auto bin = dir / ("mol_" + key + ".bin");
  const auto side = dir / ("mol_" + key + ".json");
  if (!std::filesystem::exists(bin) || !std::filesystem::exists(side)) return false;
  try {
    std::ifstream js(side);
    const nlohmann::json meta = nlohmann::json::parse(js);
    if (meta.at("key").get<std::string>() != key || meta.at("total_volume").get<int>() != nv) return false;
    std::ifstream in(bin, std::ios::binary);
    std::vector<double> buf(4 * static_cast<std::size_t>(nv));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!in) return false;
    Vec* outs[] = {&ref.t, &ref.phi, &ref.t_dot, &ref.phi_dot};
    for (int b = 0; b < 4; ++b) *outs[b] = Eigen::Map<const Vec>(buf.data() + b * nv, nv);
    ref.fine_n_sigma = meta.at("fine_n_sigma").get<int>();
    ref.substeps = meta.at("substeps").get<int>();
    ref.from_cache = true;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void store_cache(const std::filesystem::path& dir, const std::string& key, const ProblemSpec& spec,
                 const MolOptions& opt, const MolReference& ref) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return;
  const int nv = spec.grid.total_volume();
  std::vector<double> buf(4 * static_cast<std::size_t>(nv));
  const Vec* ins[] = {&ref.t, &ref.phi, &ref.t_dot, &ref.phi_dot};
  for (int b = 0; b < 4; ++b) std::memcpy(buf.data() + b * nv, ins[b]->data(), nv * sizeof(double));
  const auto tmp_bin = dir / ("mol_" + key + ".bin.tmp");
  {
    std::ofstream out(tmp_bin, std::ios::binary);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
  }
  std::filesystem::rename(tmp_bin, dir / ("mol_" + key + ".bin"), ec);
  nlohmann::json meta = {{"key", key},
                         {"n_tau", spec.grid.n_tau},
                         {"n_sigma", spec.grid.n_sigma},
                         {"tau_interval", spec.grid.tau_interval},
                         {"sigma_interval", spec.grid.sigma_interval},
                         {"total_volume", nv},
                         {"tension", spec.tension},
                         {"wave_speed", spec.wave_speed},
                         {"refinement", opt.refinement},
                         {"cfl", opt.cfl},
                         {"trivial_time_map", opt.trivial_time_map},
                         {"fine_n_sigma", ref.fine_n_sigma},
                         {"substeps", ref.substeps},
                         {"layout", "t, phi, t_dot, phi_dot; float64 little-endian; flat index tau-major"}};
  std::ofstream(dir / ("mol_" + key + ".json")) << meta.dump(2) << '\n';
}

}  // namespace

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

MolReference mol_reference(const ProblemSpec& spec, const MolOptions& opt) {
  spec.validate();
  if (opt.refinement < 4) throw Error("mol_reference: refinement must be at least 4");
  if (!(opt.cfl > 0.0)) throw Error("mol_reference: cfl must be positive");
  const InitialProfiles& pr = spec.profiles;
  if (!pr.phi || !pr.t || !pr.t_dot) throw Error("mol_reference: the problem carries no closed-form initial data");

  const GridSpec& g = spec.grid;
  const int m = opt.refinement * (g.n_sigma - 1);
  const int n = m + 1;
  const double dx = g.d_sigma() / opt.refinement;
  const double c2 = spec.wave_speed * spec.wave_speed;
  const double inv_t = spec.inv_tension();

  std::vector<double> fine_ic(4 * static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double s = g.sigma_interval[0] + j * dx;
    fine_ic[j] = pr.t(s);
    fine_ic[n + j] = pr.phi(s);
    fine_ic[2 * n + j] = pr.t_dot(s);
    fine_ic[3 * n + j] = pr.phi_dot ? pr.phi_dot(s) : 0.0;
  }
  MolReference ref;
  ref.key = cache_key(spec, opt, fine_ic);
  if (!opt.cache_dir.empty() && load_cache(opt.cache_dir, ref.key, g.total_volume(), ref)) return ref;

  double td_max = 0.0;
  for (int j = 0; j < n; ++j) td_max = std::max(td_max, std::abs(fine_ic[2 * n + j]));
  td_max = std::max(1.25 * td_max, 1e-3);
  const int sub = std::max(1, static_cast<int>(std::ceil(spec.wave_speed * td_max * g.d_tau() / (opt.cfl * dx))));
  const double dtau = g.d_tau() / sub;
  ref.substeps = sub;
  ref.fine_n_sigma = n;

  Coupled sys(m, dx, inv_t, c2, opt.trivial_time_map);
  State y(4 * static_cast<std::size_t>(n));
  std::vector<double> tp(n), pp(n);
  derivative(fine_ic.data(), m, 1.0, dx, tp.data());
  derivative(fine_ic.data() + n, m, -1.0, dx, pp.data());
  for (int j = 0; j < n; ++j) {
    const double t = fine_ic[j], phi = fine_ic[n + j], td = fine_ic[2 * n + j], pd = fine_ic[3 * n + j];
    y[j] = t;
    y[n + j] = phi;
    y[2 * n + j] = c2 * td + c2 * inv_t * (pp[j] * pp[j] * td - pd * pp[j] * tp[j]);
    y[3 * n + j] = pd * (c2 * tp[j] * tp[j] - 1.0) - c2 * pp[j] * td * tp[j];
  }
  if (opt.trivial_time_map) {
    sys.tp_frozen = tp;
    sys.td_frozen.assign(fine_ic.begin() + 2 * n, fine_ic.begin() + 3 * n);
    sys.tdp_frozen.resize(n);
    derivative(sys.td_frozen.data(), m, 1.0, dx, sys.tdp_frozen.data());
    sys.tau0 = g.tau_interval[0];
  }

  const int nv = g.total_volume();
  ref.t.resize(nv);
  ref.phi.resize(nv);
  ref.t_dot.resize(nv);
  ref.phi_dot.resize(nv);
  double scale0 = 0.0;
  for (double v : y) scale0 = std::max(scale0, std::abs(v));
  scale0 = std::max(scale0, 1.0);

  auto record = [&](int slice, double tau) {
    sys.velocities(y, tau);
    for (int j = 0; j < g.n_sigma; ++j) {
      const int f = j * opt.refinement;
      const int k = g.index(slice, j);
      if (opt.trivial_time_map) {
        ref.t[k] = fine_ic[f] + fine_ic[2 * n + f] * (tau - g.tau_interval[0]);
      } else {
        ref.t[k] = y[f];
      }
      ref.phi[k] = y[n + f];
      ref.t_dot[k] = sys.td[f];
      ref.phi_dot[k] = sys.pd[f];
    }
  };

  boost::numeric::odeint::runge_kutta_fehlberg78<State> stepper;
  double tau = g.tau_interval[0];
  record(0, tau);
  for (int i = 1; i < g.n_tau; ++i) {
    for (int s = 0; s < sub; ++s) {
      stepper.do_step(sys, y, tau, dtau);
      tau = g.tau_interval[0] + ((i - 1) * sub + s + 1) * dtau;
    }
    double mx = 0.0;
    bool finite = true;
    for (double v : y) {
      finite = finite && std::isfinite(v);
      mx = std::max(mx, std::abs(v));
    }
    if (!finite || mx > opt.blowup_factor * scale0)
      throw Error("mol_reference: solution blew up near tau = " + std::to_string(tau) +
                  "; reduce the reference step (smaller cfl)");
    record(i, g.tau(i));
  }
  if (!opt.cache_dir.empty()) store_cache(opt.cache_dir, ref.key, spec, opt, ref);
  return ref;
}

}  // namespace nibvp
