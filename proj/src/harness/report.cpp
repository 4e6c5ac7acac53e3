#include "bicutan/harness/report.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "bicutan/stats/render.hpp"

namespace bicutan::harness {

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }
std::string opt(const std::optional<double>& x) { return x ? num(*x) : ""; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double stderr_of(const stats::AnovaTable& t, int n) { return std::sqrt(*t.error().ms / n); }

std::string verdict_line(const Verdict& v) {
  return fmt::format("{}: p = {} vs alpha = {:.2f} -> {}", v.metric == "delta" ? "Delta" : "Sigma",
                     stats::format_p(v.p), v.alpha, v.decision());
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ReplicationResult>& results) {
  fmt::print(out, "{}\n", kResultsHeader);
  for (const auto& r : results) {
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", to_string(r.scheme), num(r.vplus), r.replicate, r.seed, num(r.delta_s),
               num(r.sigma_kph), r.trips, r.unfinished);
  }
}

std::vector<ReplicationResult> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) throw DataError("results: missing or unexpected header");
  std::vector<ReplicationResult> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) throw DataError(fmt::format("results:{}: expected 8 fields, got {}", line_no, f.size()));
    try {
      ReplicationResult r;
      r.scheme = parse_scheme_id(f[0]);
      r.vplus = std::stod(f[1]);
      r.replicate = std::stoi(f[2]);
      r.seed = std::stoull(f[3]);
      r.delta_s = std::stod(f[4]);
      r.sigma_kph = std::stod(f[5]);
      r.trips = std::stoi(f[6]);
      r.unfinished = std::stoi(f[7]);
      out.push_back(r);
    } catch (const std::exception& e) {
      throw DataError(fmt::format("results:{}: {}", line_no, e.what()));
    }
  }
  return out;
}

void write_anova_csv(std::ostream& out, const stats::AnovaTable& table) {
  fmt::print(out, "source,df,ss,ms,f,p\n");
  for (const auto& r : table.rows) {
    fmt::print(out, "{},{},{},{},{},{}\n", r.source, r.df, num(r.ss), opt(r.ms), opt(r.f), opt(r.p));
  }
}

void write_dmrt_csv(std::ostream& out, const stats::DmrtGrouping& g) {
  fmt::print(out, "rank,label,mean,letters\n");
  int rank = 1;
  for (const auto& e : g.entries) fmt::print(out, "{},{},{},{}\n", rank++, e.label, num(e.mean), e.letters);
}

void write_regression_csv(std::ostream& out, const std::vector<std::pair<std::string, stats::RegressionFit>>& fits) {
  fmt::print(out, "series,slope,intercept,r2,slope_p,intercept_p,residual_df\n");
  for (const auto& [name, f] : fits) {
    fmt::print(out, "{},{},{},{},{},{},{}\n", name, num(f.slope), num(f.intercept), num(f.r_squared), num(f.slope_p),
               num(f.intercept_p), f.residual_df);
  }
}

std::string render_report(const ExperimentReport& rep) {
  std::string out = fmt::format("Bicutan roundabout experiment: {}\n", rep.command);
  const auto& c = rep.config;
  out += fmt::format("replications {}, base seed {}, duration {} s, warm-up {} s, dt {} s, alpha {}\n\n", c.replications,
                     c.base_seed, c.duration_s, c.warmup_s, c.dt_s, c.alpha);
  for (const auto& note : rep.notes) out += fmt::format("NOTE: {}\n", note);
  if (!rep.notes.empty()) out += "\n";

  if (!rep.results.empty() && !rep.comparison && rep.sweeps.empty()) {
    out += "Replications\n";
    out += fmt::format("{:<8} {:>6} {:>4} {:>12} {:>10} {:>10} {:>6} {:>10}\n", "scheme", "V+", "rep", "seed",
                       "delta_s", "sigma_kph", "trips", "unfinished");
    for (const auto& r : rep.results) {
      out += fmt::format("{:<8} {:>6.2f} {:>4} {:>12} {:>10.2f} {:>10.2f} {:>6} {:>10}\n", to_string(r.scheme), r.vplus,
                         r.replicate, r.seed, r.delta_s, r.sigma_kph, r.trips, r.unfinished);
    }
    out += "\n";
  }

  if (rep.validation) {
    const auto& v = *rep.validation;
    out += fmt::format("Validation: observed C vs simulated t0, {} paired blocks\n", v.blocks);
    out += fmt::format("Delta mean: C {:.2f} s, t0 {:.2f} s; Sigma mean: C {:.2f} kph, t0 {:.2f} kph\n\n",
                       v.observed_delta_mean, v.simulated_delta_mean, v.observed_sigma_mean, v.simulated_sigma_mean);
    out += stats::render_anova(v.delta, "ANOVA of Delta, C vs. t0 (replications as blocks)") + "\n";
    out += stats::render_anova(v.sigma, "ANOVA of Sigma, C vs. t0 (replications as blocks)") + "\n";
    out += verdict_line(v.delta_verdict) + "\n" + verdict_line(v.sigma_verdict) + "\n\n";
  }

  if (rep.comparison) {
    const auto& cmp = *rep.comparison;
    out += stats::render_anova(cmp.anova_delta, "ANOVA of Delta across schemes") + "\n";
    out += stats::render_anova(cmp.anova_sigma, "ANOVA of Sigma across schemes") + "\n";
    out += stats::render_dmrt(cmp.dmrt_delta, "DMRT of Delta (s)") + "\n";
    out += stats::render_dmrt(cmp.dmrt_sigma, "DMRT of Sigma (kph)") + "\n";
    out += verdict_line(cmp.delta_verdict) + "\n" + verdict_line(cmp.sigma_verdict) + "\n";
    if (cmp.delta_verdict.accept_null && cmp.sigma_verdict.accept_null) {
      out += "No significant difference among schemes on either metric.\n";
    }
    out += fmt::format("Lowest-Delta group: {}\n", fmt::join(cmp.lowest_delta_group, ", "));
    out += fmt::format("Highest-Sigma group: {}\n", fmt::join(cmp.highest_sigma_group, ", "));
    out += fmt::format("Best scheme: {}\nDecision rule: {}\n\n", cmp.best, cmp.rule);
  }

  for (const auto& s : rep.sweeps) {
    const std::string id(to_string(s.scheme));
    out += fmt::format("Volume sweep, scheme {}\n", id);
    out += fmt::format("{:>8} {:>12} {:>12}\n", "V+ (%)", "mean delta", "mean sigma");
    for (const auto& lv : s.levels) {
      out += fmt::format("{:>8g} {:>12.2f} {:>12.2f}\n", lv.vplus_pct, lv.mean_delta, lv.mean_sigma);
    }
    out += stats::render_equation(s.delta_fit, fmt::format("Delta({})", id), "V(+)", c.alpha) + "\n";
    out += stats::render_equation(s.sigma_fit, fmt::format("Sigma({})", id), "V(+)", c.alpha) + "\n";
    out += fmt::format("Delta nondecreasing in V+: {}; Sigma nonincreasing in V+: {}\n\n",
                       s.delta_nondecreasing ? "yes" : "no", s.sigma_nonincreasing ? "yes" : "no");
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("write failed for {}", path.string()));
}

std::vector<std::filesystem::path> export_report(const ExperimentReport& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& name, const std::string& text) {
    write_text_file(dir / name, text);
    written.push_back(dir / name);
  };
  const auto to_text = [](auto&& fn) {
    std::ostringstream ss;
    fn(ss);
    return ss.str();
  };

  std::vector<ReplicationResult> all = rep.results;
  if (rep.comparison) {
    for (const auto& b : rep.comparison->batches) all.insert(all.end(), b.results.begin(), b.results.end());
  }
  for (const auto& s : rep.sweeps) {
    for (const auto& lv : s.levels) all.insert(all.end(), lv.results.begin(), lv.results.end());
  }
  emit("results.csv", to_text([&](std::ostream& o) { write_results_csv(o, all); }));

  std::string verdicts;
  if (rep.validation || rep.comparison) verdicts = "analysis,metric,hypothesis,p,alpha,decision\n";
  const auto verdict_row = [](const std::string& analysis, const Verdict& v) {
    return fmt::format("{},{},{},{},{},{}\n", analysis, v.metric, v.null_id, num(v.p), num(v.alpha), v.decision());
  };

  if (rep.validation) {
    const auto& v = *rep.validation;
    emit("validation_anova_delta.csv", to_text([&](std::ostream& o) { write_anova_csv(o, v.delta); }));
    emit("validation_anova_sigma.csv", to_text([&](std::ostream& o) { write_anova_csv(o, v.sigma); }));
    verdicts += verdict_row("validation", v.delta_verdict) + verdict_row("validation", v.sigma_verdict);
  }

  if (rep.comparison) {
    const auto& cmp = *rep.comparison;
    emit("anova_delta.csv", to_text([&](std::ostream& o) { write_anova_csv(o, cmp.anova_delta); }));
    emit("anova_sigma.csv", to_text([&](std::ostream& o) { write_anova_csv(o, cmp.anova_sigma); }));
    emit("dmrt_delta.csv", to_text([&](std::ostream& o) { write_dmrt_csv(o, cmp.dmrt_delta); }));
    emit("dmrt_sigma.csv", to_text([&](std::ostream& o) { write_dmrt_csv(o, cmp.dmrt_sigma); }));
    verdicts += verdict_row("compare", cmp.delta_verdict) + verdict_row("compare", cmp.sigma_verdict);
    emit("best_scheme.csv", fmt::format("best,candidates,rule\n{},{},\"{}\"\n", cmp.best, fmt::join(cmp.candidates, ";"),
                                        cmp.rule));
    // Figure 3/4 analogs: one row per scheme in the order compared.
    std::string plot = "scheme,metric,mean,stderr,letters\n";
    for (const auto* metric : {"delta", "sigma"}) {
      const bool d = std::string_view(metric) == "delta";
      const auto& g = d ? cmp.dmrt_delta : cmp.dmrt_sigma;
      const double se = stderr_of(d ? cmp.anova_delta : cmp.anova_sigma, cmp.n);
      for (const auto& b : cmp.batches) {
        const auto& e = g.entry(std::string(to_string(b.scheme)));
        plot += fmt::format("{},{},{},{},{}\n", e.label, metric, num(e.mean), num(se), e.letters);
      }
    }
    emit("plot_schemes.csv", plot);
  }
  if (!verdicts.empty()) emit("verdicts.csv", verdicts);

  if (!rep.sweeps.empty()) {
    std::vector<std::pair<std::string, stats::RegressionFit>> fits;
    std::string plot = "scheme,vplus_pct,metric,mean,stderr\n";
    for (const auto& s : rep.sweeps) {
      const std::string id(to_string(s.scheme));
      fits.emplace_back(id + ":delta", s.delta_fit);
      fits.emplace_back(id + ":sigma", s.sigma_fit);
      for (const auto* metric : {"delta", "sigma"}) {
        const bool d = std::string_view(metric) == "delta";
        const auto& table = d ? s.anova_delta : s.anova_sigma;
        for (const auto& lv : s.levels) {
          const std::string se = table ? num(stderr_of(*table, static_cast<int>(lv.results.size()))) : "";
          plot += fmt::format("{},{},{},{},{}\n", id, num(lv.vplus_pct), metric, num(d ? lv.mean_delta : lv.mean_sigma),
                              se);
        }
      }
    }
    emit("regression.csv", to_text([&](std::ostream& o) { write_regression_csv(o, fits); }));
    emit("plot_sweep.csv", plot);
  }

  emit("report.txt", render_report(rep));

  const std::string config_text = render_config(rep.config);
  std::set<std::uint64_t> seeds;
  for (const auto& r : all) seeds.insert(r.seed);
  nlohmann::json prov = {
      {"version", kVersion},
      {"command", rep.command},
      {"timestamp", fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                                std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()))},
      {"config_fnv1a", fmt::format("{:016x}", fnv1a(config_text))},
      {"seeds", std::vector<std::uint64_t>(seeds.begin(), seeds.end())},
      {"config", nlohmann::json::parse(config_text)}};
  emit("provenance.json", prov.dump(2) + "\n");
  return written;
}

}  // namespace bicutan::harness
