#pragma once

// Independent reference values for the tests: closed forms derived by hand,
// never routed through the library code they check.

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "gyrodiff/grid.hpp"

namespace oracle {

// D^eta for sigma = 1/tau.
inline Eigen::Matrix3d relaxation_matrix(double tau, double eta) {
  const double e2 = eta * eta, den = tau * tau + e2 * e2;
  Eigen::Matrix3d d;
  d << e2 / den, tau / den, 0.0, -tau / den, e2 / den, 0.0, 0.0, 0.0, 1.0;
  return tau * d;
}

// int_0^S s^k e^{-s} ds, by I_k = k I_{k-1} - S^k e^{-S}.
inline double incomplete_gamma(int k, double s_max) {
  double v = 1.0 - std::exp(-s_max);
  for (int j = 1; j <= k; ++j) v = j * v - std::pow(s_max, j) * std::exp(-s_max);
  return v;
}

// (2 pi)^{-1/2} int_{-Z}^{Z} e^{-z^2/2} dz and the same with z^2.
inline double gauss_mass(double z) { return std::erf(z / std::numbers::sqrt2); }
inline double gauss_second(double z) {
  return gauss_mass(z) - 2.0 * z * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Truncated cylinder: int M, int v_z^2 M, int v_x^2 M.
inline double maxwellian_mass(double vperp, double vpar) {
  return (1.0 - std::exp(-0.5 * vperp * vperp)) * gauss_mass(vpar);
}
inline double vz2_moment(double vperp, double vpar) {
  return (1.0 - std::exp(-0.5 * vperp * vperp)) * gauss_second(vpar);
}
inline double vx2_moment(double vperp, double vpar) {
  return incomplete_gamma(1, 0.5 * vperp * vperp) * gauss_mass(vpar);
}

// Least-squares slope of log y on log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

// Random f = xi M with standard normal xi, normalized to ||f||_M = 1.
inline gyrodiff::Distribution random_distribution(const gyrodiff::GridPtr& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::VectorXd v(static_cast<Eigen::Index>(g->size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = n(rng) * g->maxwellian_values()(i);
  gyrodiff::Distribution f(g, v);
  return (1.0 / gyrodiff::weighted_norm(f)) * f;
}

inline std::string scratch_dir(const std::string& name) {
  const char* base = std::getenv("GYRODIFF_TMP");
  auto p = std::filesystem::path(base ? base : std::filesystem::temp_directory_path().string()) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace oracle
