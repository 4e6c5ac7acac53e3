#pragma once

#include <string>

#include "bicutan/stats/anova.hpp"
#include "bicutan/stats/dmrt.hpp"
#include "bicutan/stats/regression.hpp"

namespace bicutan::stats {

/// "< 0.0001" below 1e-4, otherwise four decimals.
std::string format_p(double p);

/// Aligned SOV / DF / Sum of Squares / Mean Square / F / alpha_F layout.
std::string render_anova(const AnovaTable& table, const std::string& title);

/// One line per mean: rank, label, mean, letters.
std::string render_dmrt(const DmrtGrouping& grouping, const std::string& title);

/// "y = 0.47* V(+) + 21.92*, r^2 = 0.94"; '*' marks p < alpha, "ns" otherwise.
std::string render_equation(const RegressionFit& fit, const std::string& lhs, const std::string& regressor,
                            double alpha = 0.05);

}  // namespace bicutan::stats
