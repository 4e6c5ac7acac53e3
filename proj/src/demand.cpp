#include "bicutan/demand.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <random>

#include <fmt/format.h>

#include "bicutan/errors.hpp"

namespace bicutan {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_time(std::string_view text, std::string_view source, int line, std::string_view column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw DataError(fmt::format("{}:{}: malformed {} '{}'", source, line, column, text));
  }
  return value;
}

}  // namespace

std::vector<ObservationRecord> ingest_observations(std::istream& in, std::string_view source_name) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw DataError(fmt::format("{}: empty input, expected header", source_name));
  ++line_no;
  std::string_view header = trim(line);
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  if (header != kObservationHeader) {
    throw DataError(fmt::format("{}:1: expected header '{}', got '{}'", source_name, kObservationHeader, header));
  }
  std::vector<ObservationRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != 6) {
      throw DataError(fmt::format("{}:{}: expected 6 fields, got {}", source_name, line_no, fields.size()));
    }
    ObservationRecord r;
    r.plate = std::string(fields[0]);
    try {
      r.vtype = parse_vehicle_kind(fields[1]);
      r.entry = parse_approach(fields[2]);
      r.exit = parse_approach(fields[3]);
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", source_name, line_no, e.what()));
    }
    r.entry_time_s = parse_time(fields[4], source_name, line_no, "entry_time_s");
    r.exit_time_s = parse_time(fields[5], source_name, line_no, "exit_time_s");
    if (r.entry == r.exit) {
      throw DataError(fmt::format("{}:{}: exit point equals entry point {}", source_name, line_no, to_string(r.entry)));
    }
    if (!(r.exit_time_s > r.entry_time_s)) {
      throw DataError(fmt::format("{}:{}: exit time {} is not after entry time {}", source_name, line_no,
                                  r.exit_time_s, r.entry_time_s));
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ObservationRecord> ingest_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open observation file {}", path.string()));
  return ingest_observations(in, path.string());
}

void DemandProfile::validate() const {
  for (Approach o : kAllApproaches) {
    const std::size_t i = index_of(o);
    if (!(rate_per_s[i] > 0.0) || !std::isfinite(rate_per_s[i])) {
      throw ConfigError(fmt::format("arrival rate of origin {} must be > 0 (got {})", to_string(o), rate_per_s[i]));
    }
    double sum = 0.0;
    for (Approach d : kAllApproaches) {
      const double p = od_split[i][index_of(d)];
      if (p < 0.0) throw ConfigError(fmt::format("negative OD split {}->{}", to_string(o), to_string(d)));
      if (o == d && p != 0.0) throw ConfigError(fmt::format("OD split {}->{} must be 0", to_string(o), to_string(d)));
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw ConfigError(fmt::format("OD splits from {} sum to {} instead of 1", to_string(o), sum));
    }
  }
  double sum = 0.0;
  for (double p : type_share) {
    if (p < 0.0) throw ConfigError("negative vehicle type share");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError(fmt::format("vehicle type shares sum to {} instead of 1", sum));
  if (!(volume_scale >= 0.0)) throw ConfigError(fmt::format("volume scale must be >= 0 (got {})", volume_scale));
}

DemandProfile estimate_demand(const std::vector<ObservationRecord>& records, double horizon_s) {
  if (records.empty()) throw DataError("cannot estimate demand from zero observations");
  if (!(horizon_s > 0.0)) throw DataError(fmt::format("observation horizon must be > 0 (got {})", horizon_s));
  std::array<int, 3> by_origin{};
  std::array<std::array<int, 3>, 3> od{};
  std::array<int, 8> by_type{};
  for (const auto& r : records) {
    ++by_origin[index_of(r.entry)];
    ++od[index_of(r.entry)][index_of(r.exit)];
    ++by_type[static_cast<std::size_t>(r.vtype)];
  }
  DemandProfile p;
  for (Approach o : kAllApproaches) {
    const std::size_t i = index_of(o);
    if (by_origin[i] == 0) throw DataError(fmt::format("no observations enter at {}", to_string(o)));
    p.rate_per_s[i] = by_origin[i] / horizon_s;
    for (std::size_t j = 0; j < 3; ++j) p.od_split[i][j] = static_cast<double>(od[i][j]) / by_origin[i];
  }
  for (std::size_t k = 0; k < 8; ++k) p.type_share[k] = static_cast<double>(by_type[k]) / records.size();
  return p;
}

double uniform01(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

namespace {

template <std::size_t N>
std::size_t draw(const std::array<double, N>& probs, double u) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace

std::vector<Arrival> generate_arrivals(const DemandProfile& profile, std::uint64_t seed, double duration_s) {
  profile.validate();
  if (!(duration_s > 0.0)) throw ConfigError(fmt::format("arrival duration must be > 0 (got {})", duration_s));
  std::mt19937_64 rng(seed);
  std::vector<Arrival> out;
  for (Approach o : kAllApproaches) {
    const double rate = profile.effective_rate(o);
    double t = 0.0;
    while (true) {
      t += -std::log1p(-uniform01(rng())) / rate;
      if (t >= duration_s) break;
      Arrival a;
      a.time_s = t;
      a.origin = o;
      a.destination = kAllApproaches[draw(profile.od_split[index_of(o)], uniform01(rng()))];
      a.kind = kAllVehicleKinds[draw(profile.type_share, uniform01(rng()))];
      out.push_back(a);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Arrival& x, const Arrival& y) { return x.time_s < y.time_s; });
  return out;
}

}  // namespace bicutan
