#include "bicutan/stats/dmrt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "bicutan/errors.hpp"

namespace bicutan::stats {
namespace {

constexpr int kMinSpan = 2;
constexpr int kMaxSpan = 10;
constexpr std::size_t kSpans = kMaxSpan - kMinSpan + 1;

// Significant studentized ranges for alpha = 0.05: the upper (1 - 0.95^(p-1))
// quantile of the studentized range distribution, made nondecreasing in p as
// Duncan's procedure requires.
constexpr std::array<double, 34> kTableDf = {1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12,
                                             13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24,
                                             25, 26, 27, 28, 29, 30, 40, 60, 120,
                                             std::numeric_limits<double>::infinity()};

constexpr std::array<std::array<double, kSpans>, 34> kTable05 = {{
    {17.9693, 17.9693, 17.9693, 17.9693, 17.9693, 17.9693, 17.9693, 17.9693, 17.9693},  // df = 1
    {6.0849, 6.0849, 6.0849, 6.0849, 6.0849, 6.0849, 6.0849, 6.0849, 6.0849},  // df = 2
    {4.5007, 4.5156, 4.5156, 4.5156, 4.5156, 4.5156, 4.5156, 4.5156, 4.5156},  // df = 3
    {3.9265, 4.0125, 4.0331, 4.0331, 4.0331, 4.0331, 4.0331, 4.0331, 4.0331},  // df = 4
    {3.6354, 3.7485, 3.7965, 3.8137, 3.8144, 3.8144, 3.8144, 3.8144, 3.8144},  // df = 5
    {3.4605, 3.5865, 3.6489, 3.6802, 3.6941, 3.6973, 3.6973, 3.6973, 3.6973},  // df = 6
    {3.3441, 3.4772, 3.5483, 3.5883, 3.6106, 3.6217, 3.6255, 3.6255, 3.6255},  // df = 7
    {3.2612, 3.3985, 3.4752, 3.5212, 3.5493, 3.5660, 3.5750, 3.5787, 3.5787},  // df = 8
    {3.1992, 3.3391, 3.4198, 3.4700, 3.5023, 3.5231, 3.5361, 3.5436, 3.5470},  // df = 9
    {3.1511, 3.2928, 3.3763, 3.4297, 3.4652, 3.4891, 3.5052, 3.5156, 3.5218},  // df = 10
    {3.1127, 3.2557, 3.3413, 3.3971, 3.4351, 3.4615, 3.4800, 3.4927, 3.5012},  // df = 11
    {3.0813, 3.2252, 3.3125, 3.3702, 3.4102, 3.4387, 3.4591, 3.4737, 3.4840},  // df = 12
    {3.0552, 3.1998, 3.2883, 3.3476, 3.3893, 3.4194, 3.4415, 3.4577, 3.4695},  // df = 13
    {3.0332, 3.1783, 3.2679, 3.3284, 3.3714, 3.4029, 3.4264, 3.4440, 3.4571},  // df = 14
    {3.0143, 3.1598, 3.2502, 3.3118, 3.3560, 3.3887, 3.4133, 3.4321, 3.4464},  // df = 15
    {2.9980, 3.1438, 3.2349, 3.2974, 3.3426, 3.3763, 3.4019, 3.4217, 3.4369},  // df = 16
    {2.9837, 3.1298, 3.2215, 3.2848, 3.3308, 3.3654, 3.3919, 3.4125, 3.4286},  // df = 17
    {2.9712, 3.1174, 3.2097, 3.2736, 3.3203, 3.3557, 3.3829, 3.4043, 3.4212},  // df = 18
    {2.9600, 3.1064, 3.1991, 3.2636, 3.3110, 3.3470, 3.3750, 3.3970, 3.4146},  // df = 19
    {2.9500, 3.0965, 3.1896, 3.2546, 3.3026, 3.3392, 3.3678, 3.3905, 3.4086},  // df = 20
    {2.9410, 3.0876, 3.1811, 3.2466, 3.2950, 3.3322, 3.3613, 3.3845, 3.4033},  // df = 21
    {2.9329, 3.0796, 3.1733, 3.2392, 3.2882, 3.3258, 3.3554, 3.3791, 3.3983},  // df = 22
    {2.9255, 3.0723, 3.1663, 3.2326, 3.2819, 3.3199, 3.3500, 3.3742, 3.3939},  // df = 23
    {2.9188, 3.0656, 3.1599, 3.2265, 3.2762, 3.3146, 3.3451, 3.3697, 3.3898},  // df = 24
    {2.9126, 3.0595, 3.1540, 3.2208, 3.2709, 3.3097, 3.3405, 3.3655, 3.3860},  // df = 25
    {2.9070, 3.0539, 3.1485, 3.2157, 3.2660, 3.3052, 3.3364, 3.3617, 3.3825},  // df = 26
    {2.9017, 3.0487, 3.1435, 3.2109, 3.2615, 3.3010, 3.3325, 3.3581, 3.3792},  // df = 27
    {2.8969, 3.0438, 3.1389, 3.2065, 3.2574, 3.2971, 3.3289, 3.3548, 3.3762},  // df = 28
    {2.8924, 3.0394, 3.1345, 3.2024, 3.2535, 3.2935, 3.3255, 3.3517, 3.3734},  // df = 29
    {2.8882, 3.0352, 3.1305, 3.1985, 3.2499, 3.2901, 3.3224, 3.3489, 3.3708},  // df = 30
    {2.8582, 3.0053, 3.1015, 3.1709, 3.2238, 3.2657, 3.2998, 3.3280, 3.3518},  // df = 40
    {2.8288, 2.9759, 3.0729, 3.1434, 3.1978, 3.2413, 3.2771, 3.3071, 3.3327},  // df = 60
    {2.8000, 2.9469, 3.0446, 3.1163, 3.1720, 3.2170, 3.2544, 3.2862, 3.3135},  // df = 120
    {2.7718, 2.9184, 3.0167, 3.0893, 3.1463, 3.1928, 3.2317, 3.2651, 3.2941},  // df = inf
}};

}  // namespace

double duncan_range(double alpha, int p, double df) {
  if (std::fabs(alpha - 0.05) > 1e-12) {
    throw StatsError(fmt::format("DMRT: only alpha = 0.05 is tabulated (got {})", alpha));
  }
  if (p < kMinSpan || p > kMaxSpan) {
    throw StatsError(fmt::format("DMRT: rank span p = {} outside the tabulated range [2, 10]", p));
  }
  if (!(df >= 1.0)) throw StatsError(fmt::format("DMRT: df_error must be >= 1 (got {})", df));
  const std::size_t col = static_cast<std::size_t>(p - kMinSpan);

  const auto upper = std::lower_bound(kTableDf.begin(), kTableDf.end(), df);
  const auto hi = static_cast<std::size_t>(upper - kTableDf.begin());
  if (kTableDf[hi] == df) return kTable05[hi][col];
  const std::size_t lo = hi - 1;
  // Linear in 1/df; 1/inf == 0.
  const double x = 1.0 / df;
  const double x_lo = 1.0 / kTableDf[lo];
  const double x_hi = 1.0 / kTableDf[hi];
  const double w = (x - x_lo) / (x_hi - x_lo);
  return kTable05[lo][col] + w * (kTable05[hi][col] - kTable05[lo][col]);
}

bool DmrtGrouping::share_letter(const std::string& a, const std::string& b) const {
  const auto& la = entry(a).letters;
  const auto& lb = entry(b).letters;
  return std::any_of(la.begin(), la.end(), [&](char c) { return lb.find(c) != std::string::npos; });
}

const DmrtEntry& DmrtGrouping::entry(const std::string& label) const {
  for (const auto& e : entries) {
    if (e.label == label) return e;
  }
  throw StatsError(fmt::format("DMRT grouping has no mean labelled '{}'", label));
}

std::vector<std::string> DmrtGrouping::group_of(char letter) const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (e.letters.find(letter) != std::string::npos) out.push_back(e.label);
  }
  return out;
}

DmrtGrouping dmrt(const std::vector<LabelledMean>& means, int n, double ms_error, double df_error,
                  double alpha) {
  if (means.empty()) throw StatsError("DMRT: no means supplied");
  if (n < 1) throw StatsError("DMRT: replicates per mean must be >= 1");
  if (ms_error < 0.0) throw StatsError("DMRT: MS_error must be >= 0");
  const std::size_t k = means.size();
  if (k > static_cast<std::size_t>(kMaxSpan)) {
    throw StatsError(fmt::format("DMRT: at most {} means are supported (got {})", kMaxSpan, k));
  }

  DmrtGrouping out;
  out.alpha = alpha;
  out.df_error = df_error;
  out.ms_error = ms_error;
  out.n = n;

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return means[a].mean > means[b].mean; });
  std::vector<double> sorted(k);
  for (std::size_t i = 0; i < k; ++i) sorted[i] = means[order[i]].mean;

  const double se = std::sqrt(ms_error / n);
  for (std::size_t p = 2; p <= k; ++p) {
    out.critical_ranges.push_back(duncan_range(alpha, static_cast<int>(p), df_error) * se);
  }

  // nonsig[i][j]: means i..j are not significantly different.
  std::vector<std::vector<bool>> nonsig(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i) nonsig[i][i] = true;
  for (std::size_t span = k; span >= 2; --span) {
    for (std::size_t i = 0; i + span <= k; ++i) {
      const std::size_t j = i + span - 1;
      const bool inside_nonsig = (i > 0 && nonsig[i - 1][j]) || (j + 1 < k && nonsig[i][j + 1]);
      nonsig[i][j] = inside_nonsig || !(sorted[i] - sorted[j] > out.critical_ranges[span - 2]);
    }
  }

  // Maximal non-significant ranges, in order of their first mean.
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i;
    while (j + 1 < k && nonsig[i][j + 1]) ++j;
    const bool covered = !ranges.empty() && ranges.back().second >= j;
    if (!covered) ranges.emplace_back(i, j);
  }

  out.entries.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.entries[i].label = means[order[i]].label;
    out.entries[i].mean = sorted[i];
  }
  for (std::size_t r = 0; r < ranges.size(); ++r) {
    const char letter = static_cast<char>('a' + r);
    for (std::size_t i = ranges[r].first; i <= ranges[r].second; ++i) out.entries[i].letters += letter;
  }
  return out;
}

}  // namespace bicutan::stats
