#pragma once

namespace bicutan::stats {

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and x in [0, 1].
///
/// Evaluated with the modified Lentz continued fraction, switching to
/// 1 - I_{1-x}(b, a) when x lies beyond the mean of the beta density so the
/// fraction converges quickly. Relative accuracy is about 1e-14.
double incomplete_beta(double a, double b, double x);

/// Upper-tail probability P(F' >= f) of Snedecor's F with (df1, df2) degrees of freedom.
/// Throws StatsError for f < 0 or df < 1.
double f_pvalue(double f, double df1, double df2);

/// Two-tailed p-value of Student's t with df degrees of freedom.
double t_pvalue(double t, double df);

}  // namespace bicutan::stats
