#include "gyrodiff/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "gyrodiff/errors.hpp"

namespace gyrodiff::quadrature {

Rule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ValidationError("gauss_legendre: n must be positive");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

Rule gauss_for_weight(int n, const std::function<double(double)>& weight, double a, double b,
                      int discretization) {
  if (n < 1) throw ValidationError("gauss_for_weight: n must be positive");
  if (!(b > a)) throw ValidationError("gauss_for_weight: empty interval");
  const int k = discretization > 0 ? discretization : std::max(400, 8 * n);
  const Rule fine = gauss_legendre(k, a, b);
  std::vector<double> w(k);
  for (int i = 0; i < k; ++i) w[i] = fine.weights[i] * weight(fine.nodes[i]);

  // Stieltjes with orthonormal polynomials evaluated on the fine nodes.
  std::vector<double> alpha(n), beta(n);
  std::vector<double> p_prev(k, 0.0), p(k), p_next(k);
  double mu0 = 0.0;
  for (double wi : w) mu0 += wi;
  const double norm0 = std::sqrt(mu0);
  for (int i = 0; i < k; ++i) p[i] = 1.0 / norm0;
  double b_prev = 0.0;
  for (int j = 0; j < n; ++j) {
    double aj = 0.0;
    for (int i = 0; i < k; ++i) aj += w[i] * fine.nodes[i] * p[i] * p[i];
    alpha[j] = aj;
    if (j == n - 1) break;
    double nrm = 0.0;
    for (int i = 0; i < k; ++i) {
      p_next[i] = (fine.nodes[i] - aj) * p[i] - b_prev * p_prev[i];
      nrm += w[i] * p_next[i] * p_next[i];
    }
    const double bj = std::sqrt(nrm);
    beta[j + 1] = bj;
    for (int i = 0; i < k; ++i) {
      p_prev[i] = p[i];
      p[i] = p_next[i] / bj;
    }
    b_prev = bj;
  }

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    jacobi(j, j) = alpha[j];
    if (j + 1 < n) jacobi(j, j + 1) = jacobi(j + 1, j) = beta[j + 1];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    rule.nodes[j] = eig.eigenvalues()(j);
    const double v0 = eig.eigenvectors()(0, j);
    rule.weights[j] = mu0 * v0 * v0;
  }
  return rule;
}

Rule truncated_exponential(int n, double s_max) {
  return gauss_for_weight(n, [](double s) { return std::exp(-s); }, 0.0, s_max);
}

Rule truncated_gaussian(int n, double z_max) {
  Rule rule = gauss_for_weight(n, [](double z) { return std::exp(-0.5 * z * z); }, -z_max, z_max);
  // enforce exact mirror symmetry of the rule
  for (int j = 0; j < n / 2; ++j) {
    const int m = n - 1 - j;
    const double x = 0.5 * (rule.nodes[m] - rule.nodes[j]);
    const double w = 0.5 * (rule.weights[m] + rule.weights[j]);
    rule.nodes[j] = -x;
    rule.nodes[m] = x;
    rule.weights[j] = rule.weights[m] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

std::vector<double> lagrange_differentiation(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> bary(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) bary[j] /= (nodes[j] - nodes[k]);
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dij = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
      d[i * n + j] = dij;
      diag -= dij;
    }
    d[i * n + i] = diag;
  }
  return d;
}

}  // namespace gyrodiff::quadrature
