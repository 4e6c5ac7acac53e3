#pragma once

#include <utility>
#include <vector>

namespace bicutan::stats {

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double slope_p = 1.0;      // two-tailed t-test against zero
  double intercept_p = 1.0;  // two-tailed t-test against zero
  int residual_df = 0;
};

/// Ordinary least squares fit of y = slope * x + intercept.
///
/// Requires at least three points and two distinct x values. With a perfect
/// fit the standard errors are zero; a nonzero coefficient then gets p = 0 and
/// a zero coefficient p = 1.
RegressionFit linear_regression(const std::vector<std::pair<double, double>>& points);

}  // namespace bicutan::stats
