#pragma once

#include <functional>
#include <vector>

namespace gyrodiff::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b].
Rule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Gauss rule for a positive weight function on [a, b]. Recurrence
// coefficients come from a discretized Stieltjes procedure on a fine
// Gauss-Legendre rule, nodes and weights from the Jacobi matrix.
Rule gauss_for_weight(int n, const std::function<double(double)>& weight, double a, double b,
                      int discretization = 0);

// Weight exp(-s) on [0, s_max].
Rule truncated_exponential(int n, double s_max);

// Weight exp(-z^2/2) on [-z_max, z_max].
Rule truncated_gaussian(int n, double z_max);

// Barycentric Lagrange differentiation matrix on arbitrary distinct nodes
// (row-major n x n).
std::vector<double> lagrange_differentiation(const std::vector<double>& nodes);

}  // namespace gyrodiff::quadrature
