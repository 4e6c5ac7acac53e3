#include "bicutan/stats/regression.hpp"

#include <algorithm>
#include <cmath>

#include "bicutan/errors.hpp"
#include "bicutan/stats/distributions.hpp"

namespace bicutan::stats {
namespace {

double coefficient_pvalue(double coefficient, double se, int df) {
  if (se > 0.0) return t_pvalue(coefficient / se, df);
  return coefficient == 0.0 ? 1.0 : 0.0;
}

}  // namespace

RegressionFit linear_regression(const std::vector<std::pair<double, double>>& points) {
  const std::size_t n = points.size();
  if (n < 3) throw StatsError("linear_regression: need at least three points");

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& [x, y] : points) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mean_x) * (x - mean_x);
    sxy += (x - mean_x) * (y - mean_y);
    syy += (y - mean_y) * (y - mean_y);
  }
  if (sxx == 0.0) throw StatsError("linear_regression: all x values are identical");

  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  fit.residual_df = static_cast<int>(n) - 2;

  double sse = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - (fit.slope * x + fit.intercept);
    sse += r * r;
  }
  // Rounding can leave a perfect fit with sse ~ 1e-30; measure it against syy.
  if (sse <= 1e-24 * syy) sse = 0.0;
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;

  const double mse = sse / fit.residual_df;
  fit.slope_se = std::sqrt(mse / sxx);
  fit.intercept_se = std::sqrt(mse * (1.0 / static_cast<double>(n) + mean_x * mean_x / sxx));
  fit.slope_p = coefficient_pvalue(fit.slope, fit.slope_se, fit.residual_df);
  fit.intercept_p = coefficient_pvalue(fit.intercept, fit.intercept_se, fit.residual_df);
  return fit;
}

}  // namespace bicutan::stats
