#include "bicutan/stats/distributions.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bicutan/errors.hpp"

namespace bicutan::stats {
namespace {

constexpr int kMaxIterations = 500;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b); converges for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) return h;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw StatsError(fmt::format("incomplete_beta: shape parameters must be positive (a={}, b={})", a, b));
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw StatsError(fmt::format("incomplete_beta: x={} outside [0, 1]", x));
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_pvalue(double f, double df1, double df2) {
  if (std::isnan(f) || f < 0.0) throw StatsError(fmt::format("f_pvalue: F must be >= 0, got {}", f));
  if (df1 < 1.0 || df2 < 1.0) {
    throw StatsError(fmt::format("f_pvalue: degrees of freedom must be >= 1 (got {}, {})", df1, df2));
  }
  if (f == 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double x = df2 / (df2 + df1 * f);
  return incomplete_beta(0.5 * df2, 0.5 * df1, x);
}

double t_pvalue(double t, double df) {
  if (df < 1.0) throw StatsError(fmt::format("t_pvalue: df must be >= 1, got {}", df));
  if (std::isnan(t)) throw StatsError("t_pvalue: t is NaN");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  return incomplete_beta(0.5 * df, 0.5, x);
}

}  // namespace bicutan::stats
