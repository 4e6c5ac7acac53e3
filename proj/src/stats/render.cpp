#include "bicutan/stats/render.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <vector>

#include <fmt/format.h>

namespace bicutan::stats {
namespace {

std::string with_thousands(double value, int decimals) {
  std::string digits = fmt::format("{:.{}f}", std::fabs(value), decimals);
  const auto dot = digits.find('.');
  std::string whole = digits.substr(0, dot);
  const std::string frac = dot == std::string::npos ? "" : digits.substr(dot);
  std::string grouped;
  for (std::size_t i = 0; i < whole.size(); ++i) {
    if (i > 0 && (whole.size() - i) % 3 == 0) grouped += ',';
    grouped += whole[i];
  }
  return (value < 0 ? "-" : "") + grouped + frac;
}

std::string significance(double p, double alpha) { return p < alpha ? "*" : "ns"; }

}  // namespace

std::string format_p(double p) {
  if (p < 1e-4) return "< 0.0001";
  return fmt::format("{:.4f}", p);
}

std::string render_anova(const AnovaTable& table, const std::string& title) {
  std::vector<std::array<std::string, 6>> cells;
  cells.push_back({"SOV", "DF", "Sum of Squares", "Mean Square", "F", "alpha_F"});
  for (const auto& r : table.rows) {
    std::array<std::string, 6> row{r.source, std::to_string(r.df), with_thousands(r.ss, 2), "", "", ""};
    if (r.ms) row[3] = with_thousands(*r.ms, 2);
    if (r.f) row[4] = std::isinf(*r.f) ? "inf" : fmt::format("{:.2f}", *r.f);
    if (r.p) row[5] = format_p(*r.p);
    cells.push_back(row);
  }
  std::array<std::size_t, 6> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out = title + "\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& row = cells[i];
    out += fmt::format("{:<{}}", row[0], width[0]);
    for (std::size_t c = 1; c < row.size(); ++c) out += fmt::format("  {:>{}}", row[c], width[c]);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    if (i == 0) {
      std::size_t total = width[0];
      for (std::size_t c = 1; c < width.size(); ++c) total += 2 + width[c];
      out += std::string(total, '-') + '\n';
    }
  }
  if (table.degenerate) out += "(degenerate: zero residual variation)\n";
  return out;
}

std::string render_dmrt(const DmrtGrouping& grouping, const std::string& title) {
  std::size_t label_width = 5;
  for (const auto& e : grouping.entries) label_width = std::max(label_width, e.label.size());
  std::string out = title + "\n";
  out += fmt::format("{:>4}  {:<{}}  {:>12}  {}\n", "Rank", "Label", label_width, "Mean", "Group");
  int rank = 1;
  for (const auto& e : grouping.entries) {
    out += fmt::format("{:>4}  {:<{}}  {:>12.4f}  {}\n", rank++, e.label, label_width, e.mean, e.letters);
  }
  out += fmt::format("DMRT alpha = {:.2f}, n = {}, df_error = {:g}, MS_error = {:.4f}\n", grouping.alpha,
                     grouping.n, grouping.df_error, grouping.ms_error);
  return out;
}

std::string render_equation(const RegressionFit& fit, const std::string& lhs, const std::string& regressor,
                            double alpha) {
  const char sign = fit.intercept < 0 ? '-' : '+';
  return fmt::format("{} = {:.2f}{} {} {} {:.2f}{}, r^2 = {:.2f}", lhs, fit.slope,
                     significance(fit.slope_p, alpha), regressor, sign, std::fabs(fit.intercept),
                     significance(fit.intercept_p, alpha), fit.r_squared);
}

}  // namespace bicutan::stats
