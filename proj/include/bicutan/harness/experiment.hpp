#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bicutan/errors.hpp"
#include "bicutan/harness/config.hpp"
#include "bicutan/metrics.hpp"
#include "bicutan/stats/anova.hpp"
#include "bicutan/stats/dmrt.hpp"
#include "bicutan/stats/regression.hpp"

namespace bicutan::harness {

/// Kernel abort tagged with what is needed to replay it.
class ReplicationAbort : public SimulationAbort {
 public:
  ReplicationAbort(SchemeId scheme, double vplus, int replicate, std::uint64_t seed, const SimulationAbort& cause);

  SchemeId scheme() const noexcept { return scheme_; }
  double vplus() const noexcept { return vplus_; }
  int replicate() const noexcept { return replicate_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  SchemeId scheme_;
  double vplus_;
  int replicate_;
  std::uint64_t seed_;
};

std::uint64_t replicate_seed(const ScenarioConfig& config, int replicate);

/// Runs replicate `replicate` of `scheme` at volume increase `vplus` (fraction).
/// Completed trips are appended to `trips` when given.
ReplicationResult run_replication(const Scenario& scenario, SchemeId scheme, double vplus, int replicate,
                                  std::vector<TripRecord>* trips = nullptr);

struct ReplicationBatch {
  SchemeId scheme = SchemeId::T0;
  double vplus = 0.0;
  std::vector<ReplicationResult> results;  // ordered by replicate index
  bool insufficient_for_anova = false;      // fewer than two replications
};

/// `replications` = 0 uses the config's count.
ReplicationBatch run_replications(const Scenario& scenario, SchemeId scheme, double vplus, int replications = 0);

struct Verdict {
  std::string metric;       // "delta" or "sigma"
  std::string null_id;      // e.g. "H2"
  std::string alternative_id;
  double p = 1.0;
  double alpha = 0.05;
  bool accept_null = true;

  std::string decision() const;  // "accept H2" / "reject H2 (accept H3)"
};

/// Δ and Σ of one block of observed trips.
struct ObservedSample {
  double delta_s = 0.0;
  double sigma_kph = 0.0;
  int trips = 0;
};

/// Splits observed trips into `blocks` equal windows of entry time and
/// summarizes each like a replication. Throws DataError when a window is empty.
std::vector<ObservedSample> observed_samples(const std::vector<ObservationRecord>& records, const RoadNetwork& network,
                                             const VehicleCatalog& catalog, int blocks);

struct ValidationReport {
  int blocks = 0;
  stats::AnovaTable delta;
  stats::AnovaTable sigma;
  Verdict delta_verdict;
  Verdict sigma_verdict;
  double observed_delta_mean = 0.0, simulated_delta_mean = 0.0;
  double observed_sigma_mean = 0.0, simulated_sigma_mean = 0.0;
};

/// Blocks are paired with replicates by index. Throws StatsError on unequal counts.
ValidationReport validate_against_observed(const std::vector<ObservedSample>& observed,
                                           const std::vector<ReplicationResult>& simulated, double alpha = 0.05);

struct SchemeComparison {
  std::vector<ReplicationBatch> batches;
  int n = 0;
  stats::AnovaTable anova_delta;
  stats::AnovaTable anova_sigma;
  stats::DmrtGrouping dmrt_delta;
  stats::DmrtGrouping dmrt_sigma;
  Verdict delta_verdict;
  Verdict sigma_verdict;
  std::vector<std::string> lowest_delta_group;
  std::vector<std::string> highest_sigma_group;
  std::vector<std::string> candidates;  // intersection, or the fallback pool
  std::string best;
  std::string rule;  // which branch of the decision rule fired
};

/// Best = the lowest-Δ DMRT group intersected with the highest-Σ group, lower
/// mean Δ breaking ties. An empty intersection falls back to the lowest-Δ group.
/// Throws StatsError when the batches have unequal sizes or fewer than two schemes.
SchemeComparison compare_schemes(std::vector<ReplicationBatch> batches, double alpha = 0.05);

struct SweepLevel {
  double vplus_pct = 0.0;
  std::vector<ReplicationResult> results;
  double mean_delta = 0.0;
  double mean_sigma = 0.0;
};

struct SweepResult {
  SchemeId scheme = SchemeId::T0;
  std::vector<SweepLevel> levels;
  stats::RegressionFit delta_fit;  // Δ against V+ in percent
  stats::RegressionFit sigma_fit;
  std::optional<stats::AnovaTable> anova_delta;  // across levels; sources the plot stderr
  std::optional<stats::AnovaTable> anova_sigma;
  bool delta_nondecreasing = false;
  bool sigma_nonincreasing = false;
};

/// Fits the sweep from per-level results. Throws ConfigError for fewer than two levels.
SweepResult fit_sweep(SchemeId scheme, std::vector<SweepLevel> levels);

/// Runs every level in `volumes_pct` with the config's replication count.
SweepResult volume_sweep(const Scenario& scenario, SchemeId scheme, const std::vector<double>& volumes_pct);

}  // namespace bicutan::harness
