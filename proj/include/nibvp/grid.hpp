#pragma once

#include <array>

namespace nibvp {

// Uniform tensor grid on the parameter rectangle [tau_i, tau_f] x [sigma_i, sigma_f].
// Flat index runs sigma fastest: index(i, j) = i * n_sigma + j.
struct GridSpec {
  int n_tau = 0;
  int n_sigma = 0;
  std::array<double, 2> tau_interval{0.0, 0.5};
  std::array<double, 2> sigma_interval{0.0, 1.0};

  static GridSpec make(int n_tau, int n_sigma, std::array<double, 2> tau_interval,
                       std::array<double, 2> sigma_interval);

  void validate() const;

  double d_tau() const { return (tau_interval[1] - tau_interval[0]) / (n_tau - 1); }
  double d_sigma() const { return (sigma_interval[1] - sigma_interval[0]) / (n_sigma - 1); }
  int total_volume() const { return n_tau * n_sigma; }
  int index(int i, int j) const { return i * n_sigma + j; }
  double tau(int i) const { return tau_interval[0] + i * d_tau(); }
  double sigma(int j) const { return sigma_interval[0] + j * d_sigma(); }
  double tau_length() const { return tau_interval[1] - tau_interval[0]; }
  double sigma_length() const { return sigma_interval[1] - sigma_interval[0]; }
};

}  // namespace nibvp
