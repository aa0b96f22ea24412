#include "nibvp/grid.hpp"

#include <cmath>
#include <string>

#include "nibvp/error.hpp"

namespace nibvp {

void throw_dimension(const std::string& where, long expected, long got) {
  throw DimensionError(where + ": expected size " + std::to_string(expected) + ", got " +
                       std::to_string(got));
}

GridSpec GridSpec::make(int n_tau, int n_sigma, std::array<double, 2> tau_interval,
                        std::array<double, 2> sigma_interval) {
  GridSpec g{n_tau, n_sigma, tau_interval, sigma_interval};
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (n_tau < 4 || n_sigma < 4)
    throw Error("grid needs at least 4 points per direction (got n_tau=" + std::to_string(n_tau) +
                ", n_sigma=" + std::to_string(n_sigma) + ")");
  auto finite = [](std::array<double, 2> iv) { return std::isfinite(iv[0]) && std::isfinite(iv[1]); };
  if (!finite(tau_interval) || !finite(sigma_interval))
    throw Error("grid intervals must be finite");
  if (!(tau_interval[1] > tau_interval[0]))
    throw Error("tau interval must be increasing");
  if (!(sigma_interval[1] > sigma_interval[0]))
    throw Error("sigma interval must be increasing");
}

}  // namespace nibvp
