#pragma once

#include <vector>

namespace gyrodiff {

// Least-squares line through (log x, log y). residual is the rms of the log
// residuals, reported alongside the slope so poor fits are visible.
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  int points = 0;
};

// Needs at least two points, all x, y > 0 and at least two distinct x.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gyrodiff
