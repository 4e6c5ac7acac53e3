#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bicutan::stats {

struct AnovaRow {
  std::string source;
  int df = 0;
  double ss = 0.0;
  std::optional<double> ms;  // absent on the Total row
  std::optional<double> f;   // present on effect rows only
  std::optional<double> p;
};

/// Analysis-of-variance table. Rows are ordered effects..., "Error", "Total".
struct AnovaTable {
  std::vector<AnovaRow> rows;
  /// Set when SS_error == 0 while an effect has nonzero SS; F is then infinite and p is 0.
  bool degenerate = false;

  const AnovaRow& row(const std::string& source) const;
  const AnovaRow& error() const { return row("Error"); }
  const AnovaRow& total() const { return row("Total"); }
};

struct Group {
  std::string label;
  std::vector<double> values;
};

/// One-way ANOVA over k groups. Requires k >= 2 and at least two values per group.
/// The treatment row is labelled `treatment_label`.
AnovaTable one_way_anova(const std::vector<Group>& groups, const std::string& treatment_label = "Treatment");

/// Randomized complete block ANOVA. `table[i][j]` is block i, treatment j.
/// Requires a rectangular table with >= 2 blocks and >= 2 treatments.
AnovaTable rcbd_anova(const std::vector<std::vector<double>>& table,
                      const std::string& block_label = "Replication",
                      const std::string& treatment_label = "Treatment");

/// Builds the table for a balanced design straight from sums of squares and
/// degrees of freedom. Used to check printed tables whose raw data are unknown.
AnovaTable anova_from_sums(const std::vector<std::pair<std::string, std::pair<int, double>>>& effects,
                           int df_error, double ss_error);

}  // namespace bicutan::stats
