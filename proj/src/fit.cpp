#include "gyrodiff/fit.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "gyrodiff/errors.hpp"

namespace gyrodiff {

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("fit: x and y differ in length");
  if (x.size() < 2) throw ValidationError("fit: need at least two points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("fit: log-log data must be positive");
    a(i, 0) = std::log(x[i]);
    a(i, 1) = 1.0;
    b(i) = std::log(y[i]);
  }
  if (a.col(0).maxCoeff() - a.col(0).minCoeff() <= 0.0) throw ValidationError("fit: x values are all equal");
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  LogLogFit fit;
  fit.slope = c(0);
  fit.intercept = c(1);
  fit.residual = std::sqrt((a * c - b).squaredNorm() / static_cast<double>(n));
  fit.points = static_cast<int>(n);
  return fit;
}

}  // namespace gyrodiff
