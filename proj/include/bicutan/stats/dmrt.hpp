#pragma once

#include <string>
#include <vector>

namespace bicutan::stats {

/// Duncan's significant studentized range r_alpha(p, df) at alpha = 0.05.
///
/// Tabulated for p in [2, 10] and df in {1..30, 40, 60, 120, inf}; intermediate
/// df are interpolated linearly in 1/df. Throws StatsError for other alpha or p.
double duncan_range(double alpha, int p, double df);

struct LabelledMean {
  std::string label;
  double mean = 0.0;
};

struct DmrtEntry {
  std::string label;
  double mean = 0.0;
  std::string letters;  // e.g. "a", "ab", "c"
};

/// Letter grouping produced by Duncan's multiple range test. Entries are
/// sorted by mean, descending; letters are assigned in that order starting at 'a'.
struct DmrtGrouping {
  std::vector<DmrtEntry> entries;
  double alpha = 0.05;
  double df_error = 0.0;
  double ms_error = 0.0;
  int n = 0;
  /// Critical ranges R_p for p = 2..k, indexed by p - 2.
  std::vector<double> critical_ranges;

  bool share_letter(const std::string& a, const std::string& b) const;
  const DmrtEntry& entry(const std::string& label) const;
  /// Labels of every mean carrying `letter`.
  std::vector<std::string> group_of(char letter) const;
};

/// Duncan's multiple range test for k means of n replicates each.
///
/// Means are sorted descending and a contiguous range i..j of p = j - i + 1
/// means is declared significant only when mean_i - mean_j exceeds R_p, with
/// R_p = r_alpha(p, df_error) * sqrt(ms_error / n). Ranges nested inside a
/// non-significant range are non-significant as well. Each maximal
/// non-significant range receives one letter. Ties in the sort keep input order.
DmrtGrouping dmrt(const std::vector<LabelledMean>& means, int n, double ms_error, double df_error,
                  double alpha = 0.05);

}  // namespace bicutan::stats
