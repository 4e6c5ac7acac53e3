#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bicutan/harness/config.hpp"
#include "bicutan/harness/experiment.hpp"

namespace bicutan::harness {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr std::string_view kResultsHeader = "scheme,vplus,replicate,seed,delta_s,sigma_kph,trips,unfinished";

struct ExperimentReport {
  std::string command;  // simulate, compare, sweep, validate
  ScenarioConfig config;
  std::vector<ReplicationResult> results;
  std::optional<ValidationReport> validation;
  std::optional<SchemeComparison> comparison;
  std::vector<SweepResult> sweeps;
  std::vector<std::string> notes;
};

void write_results_csv(std::ostream& out, const std::vector<ReplicationResult>& results);
/// Throws DataError on a malformed file.
std::vector<ReplicationResult> read_results_csv(std::istream& in);

void write_anova_csv(std::ostream& out, const stats::AnovaTable& table);
void write_dmrt_csv(std::ostream& out, const stats::DmrtGrouping& grouping);
void write_regression_csv(std::ostream& out, const std::vector<std::pair<std::string, stats::RegressionFit>>& fits);

/// Human-readable summary: ANOVA tables, DMRT letters and verdicts.
std::string render_report(const ExperimentReport& report);

/// Writes every artifact of `report` into `dir`, creating it when needed.
/// Everything except provenance.json is a pure function of the report.
/// Returns the files written. Throws std::runtime_error naming the path on I/O failure.
std::vector<std::filesystem::path> export_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Writes `text` to `path`, throwing with the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace bicutan::harness
