#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace gyrodiff::angular {

// Real n x n operator acting on samples f(theta_j), theta_j = 2*pi*j/n, by
// multiplying the discrete Fourier coefficient of mode m by mu(m), m >= 0.
// Negative modes use conj(mu(m)). For even n the Nyquist mode m = n/2 is
// real on the grid; it is scaled by Re(mu(n/2)).
Eigen::MatrixXd fourier_multiplier(int n, const std::function<std::complex<double>(int)>& mu);

// f(theta) -> f(theta - tau): samples of the rotated distribution f(R(tau)v).
Eigen::MatrixXd rotation(int n, double tau);

// d/dtau f(R(tau) v) at tau = 0, i.e. -d/dtheta. Exactly skew-symmetric;
// the Nyquist mode (even n) lies in its kernel.
Eigen::MatrixXd gyration(int n);

// Zero-mean inverse of gyration on modes 0 < |m| < n/2.
Eigen::MatrixXd gyration_pseudo_inverse(int n);

// (1/2pi) int_0^tau f(theta - s) ds, integrated exactly mode by mode.
Eigen::MatrixXd partial_average(int n, double tau);

// Inverse of nu + gyration/eta^2 for a ring-constant nu.
Eigen::MatrixXd characteristics_inverse(int n, double nu, double eta);

}  // namespace gyrodiff::angular
