#include "nibvp/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "nibvp/error.hpp"
#include "nibvp/oracle.hpp"

namespace nibvp {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = unquote(raw);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("config: '" + key + "' expects a number, got '" + s + "'");
  return v;
}

int to_int(const std::string& key, const std::string& raw) {
  const double v = to_double(key, raw);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("config: '" + key + "' expects an integer");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string s = unquote(raw);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("config: '" + key + "' expects true or false");
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw ConfigError("config: '" + key + "' expects a list like [1, 2]");
  s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double(key, item));
  }
  return out;
}

std::array<double, 2> to_interval(const std::string& key, const std::string& raw) {
  const auto v = to_list(key, raw);
  if (v.size() != 2) throw ConfigError("config: '" + key + "' expects two values [lo, hi]");
  return {v[0], v[1]};
}

std::vector<int> to_int_list(const std::string& key, const std::string& raw) {
  std::vector<int> out;
  for (double v : to_list(key, raw)) {
    if (v != std::floor(v)) throw ConfigError("config: '" + key + "' expects integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string strip_comments(const std::string& text) {
  std::stringstream in(text), out;
  std::string line;
  while (std::getline(in, line)) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::stringstream ss(strip_comments(text));
  try {
    boost::property_tree::ini_parser::read_ini(ss, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config: key '" + section + "' must live inside a section");
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      const std::string v = node.data();
      if (key == "grid.n_tau") c.n_tau = to_int(key, v);
      else if (key == "grid.n_sigma") c.n_sigma = to_int(key, v);
      else if (key == "grid.tau_interval") c.tau_interval = to_interval(key, v);
      else if (key == "grid.sigma_interval") c.sigma_interval = to_interval(key, v);
      else if (key == "grid.order") {
        try {
          c.order = parse_order(unquote(v));
        } catch (const Error& e) {
          throw ConfigError(std::string("config: ") + e.what());
        }
      }
      else if (key == "physics.tension") c.tension = to_double(key, v);
      else if (key == "physics.wave_speed") c.wave_speed = to_double(key, v);
      else if (key == "physics.sigma0") c.sigma0 = to_double(key, v);
      else if (key == "initial.profile") c.profile = unquote(v);
      else if (key == "initial.amplitude") c.amplitude = to_double(key, v);
      else if (key == "initial.width") c.width = to_double(key, v);
      else if (key == "initial.center") c.center = to_double(key, v);
      else if (key == "initial.phi_dot_amplitude") c.phi_dot_amplitude = to_double(key, v);
      else if (key == "initial.t0") c.t0 = to_double(key, v);
      else if (key == "initial.t_dot") c.t_dot = to_double(key, v);
      else if (key == "solver.tolerance") c.solver.tolerance = to_double(key, v);
      else if (key == "solver.step_tolerance") c.solver.step_tolerance = to_double(key, v);
      else if (key == "solver.max_iterations") c.solver.max_iterations = to_int(key, v);
      else if (key == "solver.max_backtracks") c.solver.max_backtracks = to_int(key, v);
      else if (key == "solver.levenberg_initial") c.solver.levenberg_initial = to_double(key, v);
      else if (key == "solver.verbosity") c.solver.verbosity = to_int(key, v);
      else if (key == "sweep.n_sigma") c.sweep_n_sigma = to_int_list(key, v);
      else if (key == "sweep.n_tau") c.sweep_n_tau = to_int_list(key, v);
      else if (key == "sweep.ratio") c.sweep_ratio = to_double(key, v);
      else if (key == "sweep.t_dot") c.sweep_t_dot = to_list(key, v);
      else if (key == "sweep.mol_refinement") c.mol_refinement = to_int(key, v);
      else if (key == "sweep.mol_cfl") c.mol_cfl = to_double(key, v);
      else if (key == "output.gnuplot") c.gnuplot = to_bool(key, v);
      else throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  const int nmin = min_points(c.order);
  for (auto [name, n] : {std::pair<const char*, int>{"n_tau", c.n_tau}, {"n_sigma", c.n_sigma}})
    if (n < nmin)
      throw ConfigError(std::string("config: ") + name + " = " + std::to_string(n) + " violates the SBP minimum-size rule (" +
                        to_string(c.order) + " needs at least " + std::to_string(nmin) + " points)");
  if (!(c.tau_interval[1] > c.tau_interval[0])) throw ConfigError("config: tau_interval must be increasing");
  if (!(c.sigma_interval[1] > c.sigma_interval[0])) throw ConfigError("config: sigma_interval must be increasing");
  if (!(c.tension > 0.0)) throw ConfigError("config: tension must be positive");
  if (!(c.wave_speed > 0.0)) throw ConfigError("config: wave_speed must be positive");
  if (!(c.sigma0 > 0.0)) throw ConfigError("config: sigma0 must be positive");
  if (c.profile != "bump" && c.profile != "mode" && c.profile != "vacuum")
    throw ConfigError("config: initial.profile must be bump, mode or vacuum");
  if (!(c.t_dot > 0.0)) throw ConfigError("config: initial.t_dot must be positive");
  if (!(c.solver.tolerance > 0.0)) throw ConfigError("config: solver.tolerance must be positive");
  if (c.solver.max_iterations < 0) throw ConfigError("config: solver.max_iterations must be non-negative");
  if (!c.sweep_n_tau.empty() && c.sweep_n_tau.size() != c.sweep_n_sigma.size())
    throw ConfigError("config: sweep.n_tau and sweep.n_sigma must have equal length");
  if (!(c.sweep_ratio > 0.0)) throw ConfigError("config: sweep.ratio must be positive");
  std::set<std::array<int, 2>> seen;
  for (const auto& g : sweep_grids(c)) {
    if (g[0] < nmin || g[1] < nmin)
      throw ConfigError("config: sweep grid " + std::to_string(g[0]) + "x" + std::to_string(g[1]) +
                        " violates the SBP minimum-size rule");
    if (!seen.insert(g).second)
      throw ConfigError("config: duplicate sweep grid " + std::to_string(g[0]) + "x" + std::to_string(g[1]));
  }
  for (double td : c.sweep_t_dot)
    if (!(td > 0.0)) throw ConfigError("config: sweep.t_dot entries must be positive");
  if (c.mol_refinement < 4) throw ConfigError("config: sweep.mol_refinement must be at least 4");
  if (!(c.mol_cfl > 0.0)) throw ConfigError("config: sweep.mol_cfl must be positive");
}

nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  return json{
      {"grid",
       {{"n_tau", c.n_tau}, {"n_sigma", c.n_sigma}, {"tau_interval", c.tau_interval},
        {"sigma_interval", c.sigma_interval}, {"order", to_string(c.order)}}},
      {"physics", {{"tension", c.tension}, {"wave_speed", c.wave_speed}, {"sigma0", c.sigma0}}},
      {"initial",
       {{"profile", c.profile}, {"amplitude", c.amplitude}, {"width", c.width}, {"center", c.center},
        {"phi_dot_amplitude", c.phi_dot_amplitude}, {"t0", c.t0}, {"t_dot", c.t_dot}}},
      {"solver",
       {{"tolerance", c.solver.tolerance}, {"step_tolerance", c.solver.step_tolerance},
        {"max_iterations", c.solver.max_iterations}, {"max_backtracks", c.solver.max_backtracks},
        {"levenberg_initial", c.solver.levenberg_initial}, {"verbosity", c.solver.verbosity}}},
      {"sweep",
       {{"n_sigma", c.sweep_n_sigma}, {"n_tau", c.sweep_n_tau}, {"ratio", c.sweep_ratio}, {"t_dot", c.sweep_t_dot},
        {"mol_refinement", c.mol_refinement}, {"mol_cfl", c.mol_cfl}}},
      {"output", {{"gnuplot", c.gnuplot}}},
  };
}

std::string config_hash(const RunConfig& c, const std::string& salt) {
  nlohmann::json j = to_json(c);
  j["solver"].erase("verbosity");
  const std::string s = salt + "|" + j.dump();
  return hex64(fnv1a(s.data(), s.size()));
}

InitialProfiles make_profiles(const RunConfig& c) {
  const double a = c.sigma_interval[0], len = c.sigma_interval[1] - c.sigma_interval[0];
  Profile shape;
  if (c.profile == "bump") {
    shape = [=](double s) {
      const double u = (s - a) / len;
      return std::sin(std::numbers::pi * u) * std::exp(-c.width * (u - c.center) * (u - c.center));
    };
  } else if (c.profile == "mode") {
    shape = [=](double s) { return std::sin(std::numbers::pi * (s - a) / len); };
  } else {
    shape = [](double) { return 0.0; };
  }
  InitialProfiles p;
  const double amp = c.amplitude, vamp = c.phi_dot_amplitude;
  p.phi = [shape, amp](double s) { return amp * shape(s); };
  p.phi_dot = [shape, vamp](double s) { return vamp * shape(s); };
  p.t = [t0 = c.t0](double) { return t0; };
  p.t_dot = [td = c.t_dot](double) { return td; };
  return p;
}

ProblemSpec build_spec(const RunConfig& c) {
  validate(c);
  const GridSpec g = GridSpec::make(c.n_tau, c.n_sigma, c.tau_interval, c.sigma_interval);
  return make_problem(g, c.order, c.tension, c.wave_speed, make_profiles(c), c.sigma0);
}

double marching_ratio(const RunConfig& c) {
  const double dt = (c.tau_interval[1] - c.tau_interval[0]) / (c.n_tau - 1);
  const double ds = (c.sigma_interval[1] - c.sigma_interval[0]) / (c.n_sigma - 1);
  return c.wave_speed * c.t_dot * dt / ds;
}

std::vector<std::array<int, 2>> sweep_grids(const RunConfig& c) {
  std::vector<std::array<int, 2>> out;
  for (std::size_t k = 0; k < c.sweep_n_sigma.size(); ++k) {
    const int ns = c.sweep_n_sigma[k];
    int nt;
    if (!c.sweep_n_tau.empty()) {
      nt = c.sweep_n_tau[k];
    } else {
      const double len_t = c.tau_interval[1] - c.tau_interval[0], len_s = c.sigma_interval[1] - c.sigma_interval[0];
      nt = 1 + static_cast<int>(std::ceil(c.wave_speed * c.t_dot * len_t * (ns - 1) / (len_s * c.sweep_ratio) - 1e-9));
    }
    out.push_back({nt, ns});
  }
  return out;
}

int scaled_n_tau(const RunConfig& c, double t_dot) {
  return 1 + static_cast<int>(std::ceil((c.n_tau - 1) * t_dot / c.t_dot - 1e-9));
}

}  // namespace nibvp
