#pragma once

#include <vector>

namespace bsop {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least-squares line through (x_i, y_i).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Slope of log y against log x; entries with nonpositive values are skipped.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bsop
