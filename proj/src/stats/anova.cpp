#include "bicutan/stats/anova.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bicutan/errors.hpp"
#include "bicutan/stats/distributions.hpp"

namespace bicutan::stats {

const AnovaRow& AnovaTable::row(const std::string& source) const {
  for (const auto& r : rows) {
    if (r.source == source) return r;
  }
  throw StatsError(fmt::format("ANOVA table has no row '{}'", source));
}

AnovaTable anova_from_sums(const std::vector<std::pair<std::string, std::pair<int, double>>>& effects,
                           int df_error, double ss_error) {
  if (df_error < 1) throw StatsError("ANOVA: error degrees of freedom must be >= 1");
  AnovaTable table;
  const double ms_error = ss_error / df_error;
  int df_total = df_error;
  double ss_total = ss_error;
  for (const auto& [name, dfss] : effects) {
    const auto [df, ss] = dfss;
    if (df < 1) throw StatsError(fmt::format("ANOVA: effect '{}' has df < 1", name));
    AnovaRow r{name, df, ss, ss / df, std::nullopt, std::nullopt};
    const double ms = ss / df;
    if (ms_error > 0.0) {
      r.f = ms / ms_error;
      r.p = f_pvalue(*r.f, df, df_error);
    } else if (ms > 0.0) {
      // No residual variation: any effect is infinitely significant.
      table.degenerate = true;
      r.f = std::numeric_limits<double>::infinity();
      r.p = 0.0;
    } else {
      r.f = 0.0;
      r.p = 1.0;
    }
    df_total += df;
    ss_total += ss;
    table.rows.push_back(std::move(r));
  }
  table.rows.push_back(AnovaRow{"Error", df_error, ss_error, ms_error, std::nullopt, std::nullopt});
  table.rows.push_back(AnovaRow{"Total", df_total, ss_total, std::nullopt, std::nullopt, std::nullopt});
  return table;
}

AnovaTable one_way_anova(const std::vector<Group>& groups, const std::string& treatment_label) {
  if (groups.size() < 2) throw StatsError("one_way_anova: need at least two groups");
  for (const auto& g : groups) {
    if (g.values.size() < 2) {
      throw StatsError(fmt::format("one_way_anova: group '{}' has fewer than two values", g.label));
    }
  }
  // Work on values shifted by the first observation; constant data then stay exactly zero.
  const double shift = groups.front().values.front();
  std::size_t n_total = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    n_total += g.values.size();
    for (double y : g.values) grand_sum += y - shift;
  }
  const double grand_mean = grand_sum / static_cast<double>(n_total);

  double ss_treat = 0.0;
  double ss_error = 0.0;
  double ss_total = 0.0;
  for (const auto& g : groups) {
    const double n = static_cast<double>(g.values.size());
    double sum = 0.0;
    for (double y : g.values) sum += y - shift;
    const double mean = sum / n;
    ss_treat += n * (mean - grand_mean) * (mean - grand_mean);
    for (double y : g.values) {
      ss_error += (y - shift - mean) * (y - shift - mean);
      ss_total += (y - shift - grand_mean) * (y - shift - grand_mean);
    }
  }
  const int k = static_cast<int>(groups.size());
  const int df_error = static_cast<int>(n_total) - k;
  auto out = anova_from_sums({{treatment_label, {k - 1, ss_treat}}}, df_error, ss_error);
  out.rows.back().ss = ss_total;
  return out;
}

AnovaTable rcbd_anova(const std::vector<std::vector<double>>& table, const std::string& block_label,
                      const std::string& treatment_label) {
  const std::size_t b = table.size();
  if (b < 2) throw StatsError("rcbd_anova: need at least two blocks");
  const std::size_t t = table.front().size();
  if (t < 2) throw StatsError("rcbd_anova: need at least two treatments");
  for (std::size_t i = 0; i < b; ++i) {
    if (table[i].size() != t) {
      throw StatsError(fmt::format("rcbd_anova: ragged table, block {} has {} treatments, expected {}", i,
                                   table[i].size(), t));
    }
  }

  const double shift = table[0][0];
  std::vector<std::vector<double>> z(b, std::vector<double>(t));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < t; ++j) z[i][j] = table[i][j] - shift;
  }

  std::vector<double> block_mean(b, 0.0);
  std::vector<double> treat_mean(t, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      block_mean[i] += z[i][j];
      treat_mean[j] += z[i][j];
      grand += z[i][j];
    }
  }
  for (auto& m : block_mean) m /= static_cast<double>(t);
  for (auto& m : treat_mean) m /= static_cast<double>(b);
  grand /= static_cast<double>(b * t);

  double ss_block = 0.0;
  for (double m : block_mean) ss_block += (m - grand) * (m - grand);
  ss_block *= static_cast<double>(t);
  double ss_treat = 0.0;
  for (double m : treat_mean) ss_treat += (m - grand) * (m - grand);
  ss_treat *= static_cast<double>(b);
  double ss_error = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      const double r = z[i][j] - block_mean[i] - treat_mean[j] + grand;
      ss_error += r * r;
    }
  }

  double ss_total = 0.0;
  for (const auto& row : z) {
    for (double y : row) ss_total += (y - grand) * (y - grand);
  }

  const int bi = static_cast<int>(b);
  const int ti = static_cast<int>(t);
  auto out = anova_from_sums({{block_label, {bi - 1, ss_block}}, {treatment_label, {ti - 1, ss_treat}}},
                             (bi - 1) * (ti - 1), ss_error);
  out.rows.back().ss = ss_total;
  return out;
}

}  // namespace bicutan::stats
