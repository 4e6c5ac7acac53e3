#include "bicutan/harness/experiment.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "bicutan/kernel/engine.hpp"

namespace bicutan::harness {

namespace {

double mean_of(const std::vector<ReplicationResult>& rs, double ReplicationResult::*field) {
  double s = 0.0;
  for (const auto& r : rs) s += r.*field;
  return rs.empty() ? 0.0 : s / static_cast<double>(rs.size());
}

Verdict make_verdict(std::string metric, std::string null_id, std::string alt_id, double p, double alpha) {
  return Verdict{std::move(metric), std::move(null_id), std::move(alt_id), p, alpha, p > alpha};
}

std::vector<std::string> sharing_with(const stats::DmrtGrouping& g, const std::string& label) {
  std::vector<std::string> out;
  for (const auto& e : g.entries) {
    if (g.share_letter(e.label, label)) out.push_back(e.label);
  }
  return out;
}

}  // namespace

ReplicationAbort::ReplicationAbort(SchemeId scheme, double vplus, int replicate, std::uint64_t seed,
                                   const SimulationAbort& cause)
    : SimulationAbort(fmt::format("scheme {} vplus {} replicate {} seed {}: {}", to_string(scheme), vplus, replicate,
                                  seed, cause.what()),
                      cause.sim_time()),
      scheme_(scheme),
      vplus_(vplus),
      replicate_(replicate),
      seed_(seed) {}

std::uint64_t replicate_seed(const ScenarioConfig& config, int replicate) {
  return config.base_seed + static_cast<std::uint64_t>(replicate);
}

ReplicationResult run_replication(const Scenario& scenario, SchemeId scheme, double vplus, int replicate,
                                  std::vector<TripRecord>* trips) {
  const ScenarioConfig& cfg = scenario.config;
  const std::uint64_t seed = replicate_seed(cfg, replicate);
  DemandProfile demand = scenario.demand;
  demand.volume_scale = vplus;
  kernel::Engine engine(scenario.network, make_scheme(scheme, cfg.peak_window), scenario.catalog, scenario.kernel);
  engine.schedule(generate_arrivals(demand, seed, cfg.duration_s));
  try {
    engine.run_until(cfg.duration_s);
  } catch (const SimulationAbort& e) {
    throw ReplicationAbort(scheme, vplus, replicate, seed, e);
  }
  ReplicationResult r = replication_summary(engine.trips(), cfg.warmup_s);
  r.scheme = scheme;
  r.vplus = vplus;
  r.replicate = replicate;
  r.seed = seed;
  r.unfinished = engine.unfinished(cfg.warmup_s);
  if (trips) trips->insert(trips->end(), engine.trips().begin(), engine.trips().end());
  return r;
}

ReplicationBatch run_replications(const Scenario& scenario, SchemeId scheme, double vplus, int replications) {
  const int n = replications > 0 ? replications : scenario.config.replications;
  ReplicationBatch batch;
  batch.scheme = scheme;
  batch.vplus = vplus;
  batch.insufficient_for_anova = n < 2;
  batch.results.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) batch.results.push_back(run_replication(scenario, scheme, vplus, i));
  return batch;
}

std::string Verdict::decision() const {
  return accept_null ? fmt::format("accept {}", null_id) : fmt::format("reject {} (accept {})", null_id, alternative_id);
}

std::vector<ObservedSample> observed_samples(const std::vector<ObservationRecord>& records, const RoadNetwork& network,
                                             const VehicleCatalog& catalog, int blocks) {
  if (blocks < 1) throw DataError("observed data: block count must be >= 1");
  if (records.empty()) throw DataError("observed data: no records");
  const auto [lo_it, hi_it] = std::minmax_element(
      records.begin(), records.end(),
      [](const ObservationRecord& a, const ObservationRecord& b) { return a.entry_time_s < b.entry_time_s; });
  const double lo = lo_it->entry_time_s;
  const double width = (hi_it->entry_time_s - lo) / blocks;
  std::vector<ObservedSample> out(static_cast<std::size_t>(blocks));
  for (const auto& rec : records) {
    int b = width > 0.0 ? static_cast<int>((rec.entry_time_s - lo) / width) : 0;
    b = std::clamp(b, 0, blocks - 1);
    TripRecord trip;
    trip.vtype = rec.vtype;
    trip.origin = rec.entry;
    trip.destination = rec.exit;
    trip.entry_time_s = rec.entry_time_s;
    trip.exit_time_s = rec.exit_time_s;
    const Route& route = network.route(rec.entry, rec.exit);
    trip.distance_m = route.length_m;
    trip.free_flow_s = free_flow_time(network, route, catalog[rec.vtype]);
    ObservedSample& s = out[static_cast<std::size_t>(b)];
    s.delta_s += vehicle_delay(trip);
    s.sigma_kph += vehicle_speed(trip);
    ++s.trips;
  }
  for (std::size_t b = 0; b < out.size(); ++b) {
    if (out[b].trips == 0) throw DataError(fmt::format("observed data: block {} of {} holds no trips", b + 1, blocks));
    out[b].delta_s /= out[b].trips;
    out[b].sigma_kph /= out[b].trips;
  }
  return out;
}

ValidationReport validate_against_observed(const std::vector<ObservedSample>& observed,
                                           const std::vector<ReplicationResult>& simulated, double alpha) {
  if (observed.size() != simulated.size()) {
    throw StatsError(fmt::format("validation needs paired samples: {} observed vs {} simulated", observed.size(),
                                 simulated.size()));
  }
  std::vector<std::vector<double>> delta, sigma;
  ValidationReport rep;
  rep.blocks = static_cast<int>(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    delta.push_back({observed[i].delta_s, simulated[i].delta_s});
    sigma.push_back({observed[i].sigma_kph, simulated[i].sigma_kph});
    rep.observed_delta_mean += observed[i].delta_s;
    rep.observed_sigma_mean += observed[i].sigma_kph;
  }
  rep.observed_delta_mean /= rep.blocks;
  rep.observed_sigma_mean /= rep.blocks;
  rep.simulated_delta_mean = mean_of(simulated, &ReplicationResult::delta_s);
  rep.simulated_sigma_mean = mean_of(simulated, &ReplicationResult::sigma_kph);
  rep.delta = stats::rcbd_anova(delta, "Replication", "C vs. t0");
  rep.sigma = stats::rcbd_anova(sigma, "Replication", "C vs. t0");
  rep.delta_verdict = make_verdict("delta", "H2", "H3", *rep.delta.row("C vs. t0").p, alpha);
  rep.sigma_verdict = make_verdict("sigma", "H2", "H3", *rep.sigma.row("C vs. t0").p, alpha);
  return rep;
}

SchemeComparison compare_schemes(std::vector<ReplicationBatch> batches, double alpha) {
  if (batches.size() < 2) throw StatsError("scheme comparison needs at least two schemes");
  SchemeComparison c;
  c.n = static_cast<int>(batches.front().results.size());
  std::vector<stats::Group> delta_groups, sigma_groups;
  std::vector<stats::LabelledMean> delta_means, sigma_means;
  for (const auto& b : batches) {
    if (static_cast<int>(b.results.size()) != c.n) {
      throw StatsError(fmt::format("scheme comparison needs equal replication counts: {} has {}, expected {}",
                                   to_string(b.scheme), b.results.size(), c.n));
    }
    const std::string label(to_string(b.scheme));
    stats::Group d{label, {}}, s{label, {}};
    for (const auto& r : b.results) {
      d.values.push_back(r.delta_s);
      s.values.push_back(r.sigma_kph);
    }
    delta_groups.push_back(d);
    sigma_groups.push_back(s);
    delta_means.push_back({label, mean_of(b.results, &ReplicationResult::delta_s)});
    sigma_means.push_back({label, mean_of(b.results, &ReplicationResult::sigma_kph)});
  }
  c.anova_delta = stats::one_way_anova(delta_groups, "Scheme");
  c.anova_sigma = stats::one_way_anova(sigma_groups, "Scheme");
  const auto& ed = c.anova_delta.error();
  const auto& es = c.anova_sigma.error();
  c.dmrt_delta = stats::dmrt(delta_means, c.n, *ed.ms, ed.df, alpha);
  c.dmrt_sigma = stats::dmrt(sigma_means, c.n, *es.ms, es.df, alpha);
  c.delta_verdict = make_verdict("delta", "H4", "H5", *c.anova_delta.row("Scheme").p, alpha);
  c.sigma_verdict = make_verdict("sigma", "H6", "H7", *c.anova_sigma.row("Scheme").p, alpha);

  // Entries are sorted descending: the last Δ entry is the lowest, the first Σ entry the highest.
  c.lowest_delta_group = sharing_with(c.dmrt_delta, c.dmrt_delta.entries.back().label);
  c.highest_sigma_group = sharing_with(c.dmrt_sigma, c.dmrt_sigma.entries.front().label);
  for (const auto& label : c.lowest_delta_group) {
    if (std::find(c.highest_sigma_group.begin(), c.highest_sigma_group.end(), label) != c.highest_sigma_group.end()) {
      c.candidates.push_back(label);
    }
  }
  const bool fallback = c.candidates.empty();
  if (fallback) c.candidates = c.lowest_delta_group;
  const auto mean_delta = [&](const std::string& label) { return c.dmrt_delta.entry(label).mean; };
  c.best = *std::min_element(c.candidates.begin(), c.candidates.end(), [&](const auto& a, const auto& b) {
    return mean_delta(a) < mean_delta(b);
  });
  const std::string pool = fmt::format("{{{}}}", fmt::join(c.candidates, ", "));
  if (fallback) {
    c.rule = fmt::format("fallback: lowest-delta and highest-sigma DMRT groups are disjoint; {} chosen from the "
                         "lowest-delta group {} by lowest mean delta",
                         c.best, pool);
  } else if (c.candidates.size() == 1) {
    c.rule = fmt::format("unique: {} is the only scheme in both the lowest-delta and highest-sigma DMRT groups", c.best);
  } else {
    c.rule = fmt::format("tie: {} share the lowest-delta and highest-sigma DMRT groups; {} chosen by lowest mean delta",
                         pool, c.best);
  }
  c.batches = std::move(batches);
  return c;
}

SweepResult fit_sweep(SchemeId scheme, std::vector<SweepLevel> levels) {
  if (levels.size() < 2) throw ConfigError("a volume sweep needs at least two V+ levels");
  std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.vplus_pct < b.vplus_pct; });
  SweepResult out;
  out.scheme = scheme;
  std::vector<std::pair<double, double>> dpts, spts;
  std::vector<stats::Group> dg, sg;
  bool anova_ok = true;
  for (auto& lv : levels) {
    lv.mean_delta = mean_of(lv.results, &ReplicationResult::delta_s);
    lv.mean_sigma = mean_of(lv.results, &ReplicationResult::sigma_kph);
    stats::Group d{fmt::format("{}", lv.vplus_pct), {}}, s{d.label, {}};
    for (const auto& r : lv.results) {
      dpts.emplace_back(lv.vplus_pct, r.delta_s);
      spts.emplace_back(lv.vplus_pct, r.sigma_kph);
      d.values.push_back(r.delta_s);
      s.values.push_back(r.sigma_kph);
    }
    anova_ok = anova_ok && lv.results.size() >= 2 && lv.results.size() == levels.front().results.size();
    dg.push_back(std::move(d));
    sg.push_back(std::move(s));
  }
  out.delta_fit = stats::linear_regression(dpts);
  out.sigma_fit = stats::linear_regression(spts);
  if (anova_ok) {
    out.anova_delta = stats::one_way_anova(dg, "V+");
    out.anova_sigma = stats::one_way_anova(sg, "V+");
  }
  out.delta_nondecreasing = out.sigma_nonincreasing = true;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    out.delta_nondecreasing = out.delta_nondecreasing && levels[i].mean_delta >= levels[i - 1].mean_delta;
    out.sigma_nonincreasing = out.sigma_nonincreasing && levels[i].mean_sigma <= levels[i - 1].mean_sigma;
  }
  out.levels = std::move(levels);
  return out;
}

SweepResult volume_sweep(const Scenario& scenario, SchemeId scheme, const std::vector<double>& volumes_pct) {
  if (volumes_pct.size() < 2) throw ConfigError("a volume sweep needs at least two V+ levels");
  std::vector<SweepLevel> levels;
  for (double pct : volumes_pct) {
    if (!(pct >= 0.0)) throw ConfigError(fmt::format("V+ level {} must be >= 0 percent", pct));
    SweepLevel lv;
    lv.vplus_pct = pct;
    lv.results = run_replications(scenario, scheme, pct / 100.0).results;
    levels.push_back(std::move(lv));
  }
  return fit_sweep(scheme, std::move(levels));
}

}  // namespace bicutan::harness
