#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gyrodiff/angular.hpp"
#include "gyrodiff/quadrature.hpp"
#include "oracles.hpp"

using namespace gyrodiff;
constexpr double kPi = std::numbers::pi;

TEST_CASE("gauss_legendre integrates polynomials of degree 2n-1") {
  const auto r = quadrature::gauss_legendre(5, 0.0, 2.0);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 9);
  CHECK(s == doctest::Approx(std::pow(2.0, 10) / 10.0).epsilon(1e-13));
}

TEST_CASE("truncated_exponential reproduces incomplete gamma moments") {
  const double smax = 18.0;
  const auto r = quadrature::truncated_exponential(8, smax);
  for (int k = 0; k < 16; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
    CHECK(s == doctest::Approx(oracle::incomplete_gamma(k, smax)).epsilon(1e-11));
  }
}

TEST_CASE("truncated_gaussian reproduces Gaussian moments") {
  const auto r = quadrature::truncated_gaussian(16, 6.0);
  double m0 = 0.0, m2 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    m0 += r.weights[i];
    m1 += r.weights[i] * r.nodes[i];
    m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
  }
  const double root = std::sqrt(2.0 * kPi);
  CHECK(m0 / root == doctest::Approx(oracle::gauss_mass(6.0)).epsilon(1e-13));
  CHECK(std::abs(m1) < 1e-13);
  CHECK(m2 / root == doctest::Approx(oracle::gauss_second(6.0)).epsilon(1e-13));
}

TEST_CASE("lagrange_differentiation is exact on polynomials") {
  const auto r = quadrature::gauss_legendre(6, -1.0, 2.0);
  const auto d = quadrature::lagrange_differentiation(r.nodes);
  const int n = static_cast<int>(r.nodes.size());
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += d[i * n + j] * std::pow(r.nodes[j], 5);
    CHECK(s == doctest::Approx(5.0 * std::pow(r.nodes[i], 4)).epsilon(1e-10));
  }
}

TEST_CASE("angular rotation and gyration act exactly on low modes") {
  for (int n : {7, 8, 15}) {
    Eigen::VectorXd c(n), s(n);
    for (int k = 0; k < n; ++k) {
      c(k) = std::cos(2.0 * kPi * k / n);
      s(k) = std::sin(2.0 * kPi * k / n);
    }
    // f(theta - tau) for f = cos
    const double tau = 0.37;
    Eigen::VectorXd shifted(n);
    for (int k = 0; k < n; ++k) shifted(k) = std::cos(2.0 * kPi * k / n - tau);
    CHECK((angular::rotation(n, tau) * c - shifted).norm() < 1e-13);
    // G = -d/dtheta
    CHECK((angular::gyration(n) * c - s).norm() < 1e-13);
    CHECK((angular::gyration(n) * s + c).norm() < 1e-13);
    // G is antisymmetric
    CHECK((angular::gyration(n) + angular::gyration(n).transpose()).norm() < 1e-13);
    // full-period partial average is the mean
    CHECK(angular::partial_average(n, 2.0 * kPi).row(0).sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("gyration pseudo-inverse inverts G off the mean for odd n") {
  const int n = 9;
  const Eigen::MatrixXd g = angular::gyration(n), k = angular::gyration_pseudo_inverse(n);
  Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0).array().square();
  const Eigen::VectorXd zero_mean = f.array() - f.mean();
  CHECK((g * (k * zero_mean) - zero_mean).norm() < 1e-12);
  CHECK(std::abs((k * f).sum()) < 1e-12);
}

TEST_CASE("characteristics_inverse matches the hand solution on the first mode") {
  // (G / eta^2 + nu) X = cos theta  =>  X = A cos + B sin
  const int n = 11;
  const double nu = 0.7, eta = 0.6;
  const double a = 1.0 / (nu + 1.0 / (nu * std::pow(eta, 4))), b = -a / (nu * eta * eta);
  Eigen::VectorXd c(n), x(n);
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * k / n;
    c(k) = std::cos(th);
    x(k) = a * std::cos(th) + b * std::sin(th);
  }
  CHECK((angular::characteristics_inverse(n, nu, eta) * c - x).norm() < 1e-13);
}
