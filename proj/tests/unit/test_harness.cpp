#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bicutan/errors.hpp"
#include "bicutan/harness/config.hpp"
#include "bicutan/harness/experiment.hpp"
#include "bicutan/harness/report.hpp"

using namespace bicutan;
using namespace bicutan::harness;

namespace {

const std::filesystem::path kSource = BICUTAN_SOURCE_DIR;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A short scenario so that replications run in well under a second.
Scenario short_scenario(int reps = 3) {
  ScenarioConfig cfg = load_config(kSource / "config/reference.json");
  cfg.duration_s = 900.0;
  cfg.replications = reps;
  return load_scenario(cfg);
}

ReplicationResult result(SchemeId s, int r, double delta, double sigma) {
  ReplicationResult x;
  x.scheme = s;
  x.replicate = r;
  x.seed = 100 + r;
  x.delta_s = delta;
  x.sigma_kph = sigma;
  x.trips = 50;
  return x;
}

// Ten blocks and two treatments with SS_block 1633.05, SS_treat 0.80 and
// SS_error 41.65: y = b_i +/- (0.2 + e_i). b follows the centred ramp
// k = i - 4.5 and e a permutation of it; both have squares summing to 82.5.
std::pair<std::vector<ObservedSample>, std::vector<ReplicationResult>> blocked_layout() {
  const double e_scale = std::sqrt(41.65 / 2 / 82.5);
  const double b_scale = std::sqrt(1633.05 / 2 / 82.5);
  std::vector<ObservedSample> obs;
  std::vector<ReplicationResult> sim;
  for (int i = 0; i < 10; ++i) {
    const double k = i - 4.5;
    const double ek = e_scale * ((i * 7) % 10 - 4.5);
    const double b = 40.0 + b_scale * k;
    obs.push_back({b + 0.2 + ek, 20.0, 30});
    sim.push_back(result(SchemeId::T0, i, b - 0.2 - ek, 20.0));
  }
  return {obs, sim};
}

}  // namespace

TEST_CASE("config round-trips through its rendering") {
  const ScenarioConfig a = load_config(kSource / "config/reference.json");
  CHECK(a.scheme == SchemeId::T0);
  CHECK(a.replications == 10);
  CHECK(a.base_seed == 20131213u);
  CHECK(a.schemes.size() == 6);
  const ScenarioConfig b = parse_config(render_config(a), a.base_dir);
  CHECK(a == b);
  CHECK(render_config(a) == render_config(b));

  ScenarioConfig c;
  c.demand = "demand.json";
  c.scheme = SchemeId::T3S45;
  c.vplus = 0.5;
  c.peak_window = TimeWindow{600.0, 1800.0};
  c.volumes = {0, 25};
  CHECK(parse_config(render_config(c)) == c);
  CHECK(c.compared_schemes().size() == 6);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config(R"({"replication": 10})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"replications": "ten"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scheme": "t9"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"duration_s": 200, "warmup_s": 300})"), ConfigError);
  CHECK_THROWS_AS(load_config(kSource / "config/missing.json"), ConfigError);
  try {
    load_config(kSource / "config/missing.json");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("missing.json") != std::string::npos);
  }
  ScenarioConfig bad;
  bad.demand = "nowhere.json";
  CHECK_THROWS_AS(load_scenario(bad), ConfigError);
}

TEST_CASE("paths resolve against the config directory") {
  const ScenarioConfig cfg = load_config(kSource / "config/observed_demand.json");
  CHECK(std::filesystem::equivalent(cfg.resolve(cfg.observations), kSource / "data/observed_peak_hour.csv"));
  const Scenario s = load_scenario(cfg);
  CHECK_NOTHROW(s.demand.validate());
}

TEST_CASE("the reference scenario loads") {
  const Scenario s = load_scenario(load_config(kSource / "config/reference.json"));
  CHECK(s.demand.rate_per_s[0] == doctest::Approx(0.10));
  CHECK(s.demand.od_split[2][0] == doctest::Approx(0.6));
  CHECK(s.kernel.dt_s == doctest::Approx(0.1));
  CHECK(s.network.route(Approach::A, Approach::B).length_m > 0.0);
}

TEST_CASE("geometry, demand and vehicle type files") {
  const Scenario s = load_scenario(load_config(kSource / "config/reference.json"));
  CHECK(parse_demand(render_demand(s.demand)).rate_per_s == s.demand.rate_per_s);
  CHECK(render_geometry(parse_geometry(render_geometry(s.geometry))) == render_geometry(s.geometry));
  const VehicleCatalog cat = parse_vehicle_types(R"({"bus": {"v_goal_kph": 30}})");
  CHECK(cat[VehicleKind::Bus].v_goal_kph == 30.0);
  CHECK(cat[VehicleKind::Jeepney].v_goal_kph == VehicleCatalog{}[VehicleKind::Jeepney].v_goal_kph);
  CHECK_THROWS_AS(parse_vehicle_types(R"({"hovercraft": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_vehicle_types(R"({"bus": {"wings": 2}})"), ConfigError);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("replications use consecutive seeds and are reproducible") {
  const Scenario s = short_scenario();
  const ReplicationBatch a = run_replications(s, SchemeId::T0, 0.0);
  REQUIRE(a.results.size() == 3);
  CHECK_FALSE(a.insufficient_for_anova);
  std::set<std::uint64_t> seeds;
  for (int r = 0; r < 3; ++r) {
    CHECK(a.results[r].replicate == r);
    CHECK(a.results[r].seed == s.config.base_seed + r);
    CHECK(a.results[r].trips > 0);
    seeds.insert(a.results[r].seed);
  }
  CHECK(seeds.size() == 3);
  CHECK(run_replications(s, SchemeId::T0, 0.0).results == a.results);

  const ReplicationBatch one = run_replications(s, SchemeId::T1, 0.0, 1);
  CHECK(one.results.size() == 1);
  CHECK(one.insufficient_for_anova);

  std::vector<TripRecord> trips;
  const ReplicationResult r0 = run_replication(s, SchemeId::T0, 0.0, 0, &trips);
  CHECK(r0 == a.results[0]);
  CHECK(static_cast<int>(trips.size()) >= r0.trips);
}

TEST_CASE("validation against observed samples") {
  std::vector<ReplicationResult> sim;
  std::vector<ObservedSample> copies;
  for (int i = 0; i < 10; ++i) {
    sim.push_back(result(SchemeId::T0, i, 30.0 + i * 1.7 + (i % 3), 20.0 + (i % 4)));
    copies.push_back({sim.back().delta_s, sim.back().sigma_kph, 10});
  }
  const ValidationReport same = validate_against_observed(copies, sim);
  CHECK(*same.delta.rows[1].f == 0.0);
  CHECK(*same.delta.rows[1].p == 1.0);
  CHECK(same.delta_verdict.accept_null);
  CHECK(same.delta_verdict.decision() == "accept H2");

  auto [obs, sim1] = blocked_layout();
  const ValidationReport t1 = validate_against_observed(obs, sim1);
  CHECK(t1.delta.rows[0].ss == doctest::Approx(1633.05).epsilon(1e-9));
  CHECK(t1.delta.rows[1].ss == doctest::Approx(0.80).epsilon(1e-9));
  CHECK(t1.delta.error().ss == doctest::Approx(41.65).epsilon(1e-9));
  CHECK(*t1.delta.rows[1].p == doctest::Approx(0.6873).epsilon(0.0005 / 0.6873));
  CHECK(t1.delta_verdict.accept_null);

  auto shifted = copies;
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i].delta_s += 100.0 + (i % 2 ? 1.0 : -1.0);
  const ValidationReport far = validate_against_observed(shifted, sim);
  CHECK(*far.delta.rows[1].p < 0.05);
  CHECK_FALSE(far.delta_verdict.accept_null);
  CHECK(far.delta_verdict.decision() == "reject H2 (accept H3)");

  copies.pop_back();
  CHECK_THROWS_AS(validate_against_observed(copies, sim), StatsError);
}

TEST_CASE("observed records are blocked by entry time") {
  const Scenario s = short_scenario();
  std::vector<ObservationRecord> recs;
  for (int i = 0; i < 40; ++i) recs.push_back({"p", VehicleKind::Jeepney, Approach::A, Approach::C, i * 10.0, i * 10.0 + 60.0});
  const auto blocks = observed_samples(recs, s.network, s.catalog, 4);
  REQUIRE(blocks.size() == 4);
  for (const auto& b : blocks) CHECK(b.trips == 10);
  CHECK(blocks[0].delta_s == doctest::Approx(blocks[3].delta_s));
  recs.resize(5);
  recs.push_back({"q", VehicleKind::Bus, Approach::B, Approach::A, 390.0, 420.0});
  CHECK_THROWS_AS(observed_samples(recs, s.network, s.catalog, 4), DataError);
}

TEST_CASE("scheme comparison with indistinguishable schemes") {
  std::vector<ReplicationBatch> batches;
  const std::array<SchemeId, 6> ids{SchemeId::T0, SchemeId::T1, SchemeId::T2, SchemeId::T3, SchemeId::T4, SchemeId::T5};
  for (SchemeId id : ids) {
    ReplicationBatch b;
    b.scheme = id;
    for (int r = 0; r < 10; ++r) b.results.push_back(result(id, r, 40.0 + r, 20.0 + 0.5 * r));
    batches.push_back(b);
  }
  const SchemeComparison c = compare_schemes(batches);
  CHECK(c.n == 10);
  for (const auto& e : c.dmrt_delta.entries) CHECK(e.letters == "a");
  CHECK(c.delta_verdict.accept_null);
  CHECK(c.candidates.size() == 6);
  CHECK(c.rule.find("tie") != std::string::npos);
  CHECK(std::find(c.candidates.begin(), c.candidates.end(), c.best) != c.candidates.end());
}

TEST_CASE("a scheme far below the rest on delay is selected") {
  std::vector<ReplicationBatch> batches;
  for (SchemeId id : {SchemeId::T0, SchemeId::T1, SchemeId::T2, SchemeId::T3}) {
    ReplicationBatch b;
    b.scheme = id;
    const bool good = id == SchemeId::T2;
    for (int r = 0; r < 10; ++r)
      b.results.push_back(result(id, r, (good ? 10.0 : 60.0) + (r % 3), (good ? 30.0 : 15.0) + (r % 2)));
    batches.push_back(b);
  }
  const SchemeComparison c = compare_schemes(batches);
  CHECK(c.best == "t2");
  CHECK(c.candidates == std::vector<std::string>{"t2"});
  CHECK(c.rule.find("unique") != std::string::npos);
  CHECK_FALSE(c.delta_verdict.accept_null);

  batches[1].results.pop_back();
  CHECK_THROWS_AS(compare_schemes(batches), StatsError);
  batches.resize(1);
  CHECK_THROWS_AS(compare_schemes(batches), StatsError);
}

TEST_CASE("sweep fit recovers a generating line") {
  std::vector<SweepLevel> levels;
  for (double v : {100.0, 0.0, 50.0, 10.0}) {
    SweepLevel l;
    l.vplus_pct = v;
    for (int r = 0; r < 10; ++r) {
      const double d = 0.47 * v + 21.92;
      l.results.push_back(result(SchemeId::T3S15, r, d, -0.08 * v + 21.02));
    }
    levels.push_back(l);
  }
  const SweepResult s = fit_sweep(SchemeId::T3S15, levels);
  CHECK(s.levels.front().vplus_pct == 0.0);
  CHECK(s.sigma_fit.slope == doctest::Approx(-0.08).epsilon(1e-9));
  CHECK(s.sigma_fit.intercept == doctest::Approx(21.02).epsilon(1e-9));
  CHECK(s.delta_fit.slope == doctest::Approx(0.47).epsilon(1e-9));
  CHECK(s.delta_nondecreasing);
  CHECK(s.sigma_nonincreasing);
  levels.resize(1);
  CHECK_THROWS_AS(fit_sweep(SchemeId::T3S15, levels), ConfigError);
}

TEST_CASE("report export") {
  std::vector<ReplicationBatch> batches;
  for (SchemeId id : {SchemeId::T0, SchemeId::T1, SchemeId::T2, SchemeId::T3, SchemeId::T4, SchemeId::T5}) {
    ReplicationBatch b;
    b.scheme = id;
    const double shift = id == SchemeId::T1 ? 80.0 : 0.0;
    for (int r = 0; r < 10; ++r) b.results.push_back(result(id, r, 20.0 + shift + r * 0.37, 25.0 - shift / 10 + r * 0.11));
    batches.push_back(b);
  }
  ExperimentReport report;
  report.command = "compare";
  report.comparison = compare_schemes(batches);
  std::vector<ReplicationResult> all;
  for (const auto& b : batches) all.insert(all.end(), b.results.begin(), b.results.end());

  const auto dir = std::filesystem::temp_directory_path() / "bicutan_unit_export";
  std::filesystem::remove_all(dir);
  const auto files = export_report(report, dir);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));
  for (const char* name : {"results.csv", "anova_delta.csv", "dmrt_delta.csv", "verdicts.csv", "best_scheme.csv",
                           "plot_schemes.csv", "report.txt", "provenance.json"})
    CHECK(std::filesystem::exists(dir / name));

  std::ifstream in(dir / "results.csv");
  CHECK(read_results_csv(in) == all);

  CHECK(read_file(dir / "report.txt").find("< 0.0001") != std::string::npos);

  // One x-category per scheme and metric, stderr from the ANOVA error mean square.
  std::istringstream plot(read_file(dir / "plot_schemes.csv"));
  std::string line;
  std::getline(plot, line);
  CHECK(line == "scheme,metric,mean,stderr,letters");
  std::set<std::string> schemes;
  const double se = std::sqrt(*report.comparison->anova_delta.error().ms / 10);
  int rows = 0;
  while (std::getline(plot, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    REQUIRE(f.size() == 5);
    schemes.insert(f[0]);
    if (f[1] == "delta") CHECK(std::stod(f[3]) == doctest::Approx(se).epsilon(1e-9));
  }
  CHECK(rows == 12);
  CHECK(schemes.size() == 6);

  std::istringstream bad("scheme,vplus\n");
  CHECK_THROWS_AS(read_results_csv(bad), DataError);
  std::filesystem::remove_all(dir);
}
