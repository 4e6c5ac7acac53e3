#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "bicutan/errors.hpp"
#include "bicutan/harness/config.hpp"
#include "bicutan/harness/experiment.hpp"
#include "bicutan/harness/report.hpp"
#include "bicutan/stats/anova.hpp"
#include "bicutan/stats/dmrt.hpp"
#include "bicutan/stats/regression.hpp"
#include "bicutan/stats/render.hpp"

namespace fs = std::filesystem;
using namespace bicutan;
using namespace bicutan::harness;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;

std::vector<SchemeId> parse_scheme_list(const std::string& text) {
  std::vector<SchemeId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_scheme_id(item));
  }
  if (out.empty()) throw ConfigError(fmt::format("no schemes in '{}'", text));
  return out;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("'{}' is not a number in list '{}'", item, text));
    }
  }
  return out;
}

void finish(const ExperimentReport& report, const fs::path& out) {
  export_report(report, out);
  std::cout << render_report(report);
  fmt::print("outputs written to {}\n", out.string());
}

struct Common {
  std::string config;
  std::string out = "bicutan_out";
  int reps = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "scenario JSON")->required();
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--reps", c.reps, "replications (default: from config)")->check(CLI::PositiveNumber);
}

ScenarioConfig load_with_overrides(const Common& c) {
  ScenarioConfig cfg = load_config(c.config);
  if (c.reps > 0) cfg.replications = c.reps;
  return cfg;
}

int cmd_simulate(const Common& c, const std::string& scheme, std::optional<std::uint64_t> seed,
                 std::optional<double> vplus) {
  ScenarioConfig cfg = load_with_overrides(c);
  if (!scheme.empty()) cfg.scheme = parse_scheme_id(scheme);
  if (seed) cfg.base_seed = *seed;
  if (vplus) cfg.vplus = *vplus;
  cfg.validate();
  const Scenario scenario = load_scenario(cfg);
  ExperimentReport report{"simulate", cfg, {}, {}, {}, {}, {}};
  const fs::path out(c.out);
  fs::create_directories(out / "trips");
  for (int i = 0; i < cfg.replications; ++i) {
    std::vector<TripRecord> trips;
    report.results.push_back(run_replication(scenario, cfg.scheme, cfg.vplus, i, &trips));
    std::ofstream f(out / "trips" / fmt::format("{}_r{:02}.csv", to_string(cfg.scheme), i));
    write_trip_csv(f, trips);
    if (!f) throw std::runtime_error(fmt::format("cannot write trip file in {}", (out / "trips").string()));
  }
  if (cfg.replications < 2) report.notes.push_back("a single replication is insufficient for ANOVA");
  finish(report, out);
  return kExitOk;
}

int cmd_compare(const Common& c, const std::string& schemes) {
  ScenarioConfig cfg = load_with_overrides(c);
  if (!schemes.empty()) cfg.schemes = parse_scheme_list(schemes);
  const Scenario scenario = load_scenario(cfg);
  const auto ids = cfg.compared_schemes();
  if (ids.size() < 2) throw ConfigError("compare needs at least two schemes");
  if (cfg.replications < 2) throw ConfigError("compare needs at least two replications per scheme for ANOVA");
  std::vector<ReplicationBatch> batches;
  for (SchemeId id : ids) batches.push_back(run_replications(scenario, id, cfg.vplus));
  ExperimentReport report{"compare", cfg, {}, {}, compare_schemes(std::move(batches), cfg.alpha), {}, {}};
  finish(report, c.out);
  return kExitOk;
}

int cmd_sweep(const Common& c, const std::string& schemes, const std::string& volumes) {
  ScenarioConfig cfg = load_with_overrides(c);
  const auto ids = schemes.empty() ? std::vector<SchemeId>{cfg.scheme} : parse_scheme_list(schemes);
  if (!volumes.empty()) cfg.volumes = parse_number_list(volumes);
  cfg.validate();
  const Scenario scenario = load_scenario(cfg);
  ExperimentReport report{"sweep", cfg, {}, {}, {}, {}, {}};
  for (SchemeId id : ids) report.sweeps.push_back(volume_sweep(scenario, id, cfg.volumes));
  if (cfg.replications < 2) report.notes.push_back("a single replication is insufficient for ANOVA; stderr omitted");
  finish(report, c.out);
  return kExitOk;
}

int cmd_validate(const Common& c, const std::string& observed, const std::string& scheme) {
  ScenarioConfig cfg = load_with_overrides(c);
  if (!scheme.empty()) cfg.scheme = parse_scheme_id(scheme);
  if (cfg.replications < 2) throw ConfigError("validate needs at least two replications");
  const Scenario scenario = load_scenario(cfg);
  std::vector<ObservedSample> samples;
  try {
    samples = observed_samples(ingest_observations(fs::path(observed)), scenario.network, scenario.catalog,
                               cfg.replications);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  ReplicationBatch sim = run_replications(scenario, cfg.scheme, cfg.vplus);
  ExperimentReport report{"validate", cfg, sim.results, validate_against_observed(samples, sim.results, cfg.alpha),
                          {}, {}, {}};
  finish(report, c.out);
  return kExitOk;
}

// Standalone statistics on external CSV data.

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(fmt::format("input has no '{}' column", name));
    return static_cast<std::size_t>(it - header.begin());
  }
  bool has(const std::string& name) const { return std::find(header.begin(), header.end(), name) != header.end(); }
};

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path));
  Csv csv;
  std::string line;
  const auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  if (!std::getline(in, line)) throw DataError(fmt::format("{}: empty file", path));
  csv.header = split(line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
    auto cells = split(line);
    if (cells.size() != csv.header.size()) {
      throw DataError(fmt::format("{}:{}: expected {} fields, got {}", path, line_no, csv.header.size(), cells.size()));
    }
    csv.rows.push_back(std::move(cells));
  }
  return csv;
}

double to_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError(fmt::format("'{}' is not a number", s));
}

struct Design {
  std::vector<stats::Group> groups;                    // treatments, first-seen order
  std::vector<std::vector<double>> table;              // blocks x treatments when blocked
  bool blocked = false;
};

Design read_design(const Csv& csv) {
  Design d;
  const std::size_t tcol = csv.column("treatment");
  const std::size_t vcol = csv.column("value");
  std::map<std::string, std::size_t> tindex;
  for (const auto& r : csv.rows) {
    if (!tindex.count(r[tcol])) {
      tindex[r[tcol]] = d.groups.size();
      d.groups.push_back({r[tcol], {}});
    }
    d.groups[tindex[r[tcol]]].values.push_back(to_number(r[vcol]));
  }
  if (csv.has("block")) {
    d.blocked = true;
    const std::size_t bcol = csv.column("block");
    std::map<std::string, std::size_t> bindex;
    std::vector<std::vector<std::optional<double>>> cells;
    for (const auto& r : csv.rows) {
      if (!bindex.count(r[bcol])) {
        bindex[r[bcol]] = cells.size();
        cells.emplace_back(d.groups.size());
      }
      auto& cell = cells[bindex[r[bcol]]][tindex[r[tcol]]];
      if (cell) throw DataError(fmt::format("duplicate cell block '{}' treatment '{}'", r[bcol], r[tcol]));
      cell = to_number(r[vcol]);
    }
    for (const auto& row : cells) {
      std::vector<double> values;
      for (const auto& cell : row) {
        if (!cell) throw DataError("blocked design is incomplete: every block needs every treatment");
        values.push_back(*cell);
      }
      d.table.push_back(std::move(values));
    }
  }
  return d;
}

stats::AnovaTable design_anova(const Design& d) {
  return d.blocked ? stats::rcbd_anova(d.table, "Block", "Treatment") : stats::one_way_anova(d.groups, "Treatment");
}

int cmd_stats(const std::string& which, const std::string& input, const std::string& out, double alpha) {
  const Csv csv = read_csv(input);
  fs::create_directories(out);
  std::ostringstream machine;
  std::string text;
  std::string file;
  if (which == "anova") {
    const auto table = design_anova(read_design(csv));
    write_anova_csv(machine, table);
    text = stats::render_anova(table, "ANOVA");
    file = "anova.csv";
  } else if (which == "dmrt") {
    const Design d = read_design(csv);
    const auto table = design_anova(d);
    const std::size_t n = d.groups.front().values.size();
    std::vector<stats::LabelledMean> means;
    for (const auto& g : d.groups) {
      if (g.values.size() != n) throw StatsError("DMRT needs the same number of values in every treatment");
      double s = 0.0;
      for (double v : g.values) s += v;
      means.push_back({g.label, s / static_cast<double>(n)});
    }
    const auto grouping = stats::dmrt(means, static_cast<int>(n), *table.error().ms, table.error().df, alpha);
    write_dmrt_csv(machine, grouping);
    text = stats::render_anova(table, "ANOVA") + "\n" + stats::render_dmrt(grouping, "DMRT");
    file = "dmrt.csv";
  } else {
    const std::size_t xcol = csv.column("x");
    const std::size_t ycol = csv.column("y");
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : csv.rows) pts.emplace_back(to_number(r[xcol]), to_number(r[ycol]));
    const auto fit = stats::linear_regression(pts);
    write_regression_csv(machine, {{"y", fit}});
    text = stats::render_equation(fit, "y", "x", alpha) + "\n" +
           fmt::format("slope p = {}, intercept p = {}, residual df = {}\n", stats::format_p(fit.slope_p),
                       stats::format_p(fit.intercept_p), fit.residual_df);
    file = "regression.csv";
  }
  write_text_file(fs::path(out) / file, machine.str());
  write_text_file(fs::path(out) / "report.txt", text);
  std::cout << text;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bicutan roundabout microsimulation and experiment statistics"};
  app.require_subcommand(1);

  Common sim_opts, cmp_opts, sweep_opts, val_opts;
  std::string sim_scheme, cmp_schemes, sweep_schemes, sweep_volumes, observed, val_scheme;
  std::optional<std::uint64_t> sim_seed;
  std::optional<double> sim_vplus;

  auto* simulate = app.add_subcommand("simulate", "run replications of one scheme");
  add_common(simulate, sim_opts);
  simulate->add_option("--scheme", sim_scheme, "scheme id, e.g. t3_s15");
  simulate->add_option("--seed", sim_seed, "base seed");
  simulate->add_option("--vplus", sim_vplus, "volume increase as a fraction")->check(CLI::NonNegativeNumber);

  auto* compare = app.add_subcommand("compare", "ANOVA and DMRT across schemes");
  add_common(compare, cmp_opts);
  compare->add_option("--schemes", cmp_schemes, "comma-separated scheme ids");

  auto* sweep = app.add_subcommand("sweep", "volume sweep with regressions");
  add_common(sweep, sweep_opts);
  sweep->add_option("--scheme", sweep_schemes, "scheme id (comma-separated for several)");
  sweep->add_option("--volumes", sweep_volumes, "V+ levels in percent, e.g. 0,10,50,100");

  auto* validate = app.add_subcommand("validate", "compare observed trips against simulated replications");
  add_common(validate, val_opts);
  validate->add_option("--observed", observed, "observation CSV")->required();
  validate->add_option("--scheme", val_scheme, "simulated scheme (default: config scheme)");

  auto* stats_cmd = app.add_subcommand("stats", "statistics on external CSV data");
  std::string stats_which, stats_input, stats_out = "bicutan_out";
  double stats_alpha = 0.05;
  stats_cmd->add_option("analysis", stats_which, "anova, dmrt or regress")
      ->required()
      ->check(CLI::IsMember({"anova", "dmrt", "regress"}));
  stats_cmd->add_option("--input", stats_input, "CSV: treatment,value [block] or x,y")->required();
  stats_cmd->add_option("--out", stats_out, "output directory");
  stats_cmd->add_option("--alpha", stats_alpha, "significance level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim_opts, sim_scheme, sim_seed, sim_vplus);
    if (*compare) return cmd_compare(cmp_opts, cmp_schemes);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_schemes, sweep_volumes);
    if (*validate) return cmd_validate(val_opts, observed, val_scheme);
    return cmd_stats(stats_which, stats_input, stats_out, stats_alpha);
  } catch (const SimulationAbort& e) {
    fmt::print(std::cerr, "simulation aborted at t = {:.1f} s: {}\n", e.sim_time(), e.what());
    return kExitAbort;
  } catch (const ConfigError& e) {
    fmt::print(std::cerr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    fmt::print(std::cerr, "input error: {}\n", e.what());
    return kExitConfig;
  } catch (const StatsError& e) {
    fmt::print(std::cerr, "statistics error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 1;
  }
}
