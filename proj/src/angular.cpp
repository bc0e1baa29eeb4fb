#include "gyrodiff/angular.hpp"

#include <cmath>
#include <numbers>

namespace gyrodiff::angular {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
using cplx = std::complex<double>;
}  // namespace

Eigen::MatrixXd fourier_multiplier(int n, const std::function<cplx(int)>& mu) {
  // Op(k, j) = (1/n) sum_m mu(m) exp(i m (theta_k - theta_j)), real by symmetry.
  const int half = n / 2;
  std::vector<double> kernel(n, 0.0);
  for (int d = 0; d < n; ++d) {
    const double phase = kTwoPi * d / n;
    double acc = std::real(mu(0));
    for (int m = 1; m < (n + 1) / 2; ++m) {
      const cplx e = std::polar(1.0, m * phase);
      acc += 2.0 * std::real(mu(m) * e);
    }
    if (n % 2 == 0) acc += std::real(mu(half)) * ((d % 2 == 0) ? 1.0 : -1.0);
    kernel[d] = acc / n;
  }
  Eigen::MatrixXd op(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) op(k, j) = kernel[((k - j) % n + n) % n];
  return op;
}

Eigen::MatrixXd rotation(int n, double tau) {
  const double step = kTwoPi / n;
  const double shifts = tau / step;
  const double nearest = std::round(shifts);
  if (std::abs(shifts - nearest) < 1e-12) {
    const int k = static_cast<int>(((static_cast<long long>(nearest) % n) + n) % n);
    Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) perm(j, ((j - k) % n + n) % n) = 1.0;
    return perm;
  }
  return fourier_multiplier(n, [tau](int m) { return std::polar(1.0, -m * tau); });
}

Eigen::MatrixXd gyration(int n) {
  const Eigen::MatrixXd g =
      fourier_multiplier(n, [](int m) { return cplx(0.0, -static_cast<double>(m)); });
  return 0.5 * (g - g.transpose());
}

Eigen::MatrixXd gyration_pseudo_inverse(int n) {
  return fourier_multiplier(n, [](int m) {
    return m == 0 ? cplx(0.0) : cplx(0.0, 1.0 / static_cast<double>(m));
  });
}

Eigen::MatrixXd partial_average(int n, double tau) {
  return fourier_multiplier(n, [tau](int m) {
    if (m == 0) return cplx(tau / kTwoPi);
    const cplx im(0.0, static_cast<double>(m));
    return (1.0 - std::exp(-im * tau)) / (kTwoPi * im);
  });
}

Eigen::MatrixXd characteristics_inverse(int n, double nu, double eta) {
  const double inv_eta2 = 1.0 / (eta * eta);
  const int nyquist = (n % 2 == 0) ? n / 2 : -1;
  return fourier_multiplier(n, [=](int m) {
    if (m == nyquist) return cplx(1.0 / nu);
    return 1.0 / cplx(nu, -m * inv_eta2);
  });
}

}  // namespace gyrodiff::angular
