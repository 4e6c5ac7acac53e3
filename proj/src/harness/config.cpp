#include "bicutan/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "bicutan/errors.hpp"

namespace bicutan::harness {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open {} file {}", what, path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", what, e.what()));
  }
}

void expect_object(const json& j, std::string_view where) {
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected a JSON object", where));
}

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <typename T>
T get(const json& j, std::string_view where, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}: key '{}' is missing or has the wrong type", where, key));
  }
}

template <typename T>
void get_opt(const json& j, std::string_view where, const std::string& key, T& out) {
  if (j.contains(key)) out = get<T>(j, where, key);
}

Approach approach_key(const std::string& key, std::string_view where) {
  try {
    return parse_approach(key);
  } catch (const DataError& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
}

VehicleKind kind_key(const std::string& key, std::string_view where) {
  try {
    return parse_vehicle_kind(key);
  } catch (const DataError& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(demand.empty() || observations.empty(), "config: give either 'demand' or 'observations', not both");
  require(!demand.empty() || !observations.empty(), "config: one of 'demand' or 'observations' is required");
  require(observation_horizon_s > 0.0, "config: observation_horizon_s must be > 0");
  require(vplus >= 0.0 && std::isfinite(vplus), "config: vplus must be >= 0");
  for (double v : volumes) require(v >= 0.0 && std::isfinite(v), "config: volumes must be >= 0 percent");
  require(dt_s > 0.0 && dt_s <= 1.0, "config: dt_s must lie in (0, 1]");
  require(warmup_s >= 0.0, "config: warmup_s must be >= 0");
  require(duration_s > warmup_s, "config: duration_s must exceed warmup_s");
  require(replications >= 1, "config: replications must be >= 1");
  require(peak_window.end_s > peak_window.start_s, "config: peak_window must have end_s > start_s");
  require(alpha > 0.0 && alpha < 1.0, "config: alpha must lie in (0, 1)");
}

std::filesystem::path ScenarioConfig::resolve(const std::string& relative) const {
  const std::filesystem::path p(relative);
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<SchemeId> ScenarioConfig::compared_schemes() const {
  if (!schemes.empty()) return schemes;
  return {SchemeId::T0, SchemeId::T1, SchemeId::T2, SchemeId::T3, SchemeId::T4, SchemeId::T5};
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return a.network == b.network && a.scheme == b.scheme && a.schemes == b.schemes && a.demand == b.demand &&
         a.observations == b.observations && a.observation_horizon_s == b.observation_horizon_s &&
         a.vehicle_types == b.vehicle_types && a.vplus == b.vplus && a.volumes == b.volumes &&
         a.duration_s == b.duration_s && a.warmup_s == b.warmup_s && a.dt_s == b.dt_s &&
         a.replications == b.replications && a.base_seed == b.base_seed && a.peak_window == b.peak_window &&
         a.alpha == b.alpha;
}

ScenarioConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  constexpr std::string_view where = "config";
  const json j = parse_json(json_text, where);
  expect_object(j, where);
  reject_unknown(j, where,
                 {"network", "scheme", "schemes", "demand", "observations", "observation_horizon_s", "vehicle_types",
                  "vplus", "volumes", "duration_s", "warmup_s", "dt_s", "replications", "base_seed", "peak_window",
                  "alpha"});
  ScenarioConfig c;
  c.base_dir = base_dir;
  get_opt(j, where, "network", c.network);
  if (j.contains("scheme")) c.scheme = parse_scheme_id(get<std::string>(j, where, "scheme"));
  if (j.contains("schemes")) {
    for (const auto& s : get<std::vector<std::string>>(j, where, "schemes")) c.schemes.push_back(parse_scheme_id(s));
  }
  get_opt(j, where, "demand", c.demand);
  get_opt(j, where, "observations", c.observations);
  get_opt(j, where, "observation_horizon_s", c.observation_horizon_s);
  get_opt(j, where, "vehicle_types", c.vehicle_types);
  get_opt(j, where, "vplus", c.vplus);
  get_opt(j, where, "volumes", c.volumes);
  get_opt(j, where, "duration_s", c.duration_s);
  get_opt(j, where, "warmup_s", c.warmup_s);
  get_opt(j, where, "dt_s", c.dt_s);
  get_opt(j, where, "replications", c.replications);
  get_opt(j, where, "base_seed", c.base_seed);
  get_opt(j, where, "alpha", c.alpha);
  if (j.contains("peak_window")) {
    const json& w = j["peak_window"];
    expect_object(w, "config.peak_window");
    reject_unknown(w, "config.peak_window", {"start_s", "end_s"});
    get_opt(w, "config.peak_window", "start_s", c.peak_window.start_s);
    if (w.contains("end_s") && !w["end_s"].is_null()) c.peak_window.end_s = get<double>(w, "config.peak_window", "end_s");
  }
  c.validate();
  return c;
}

std::string render_config(const ScenarioConfig& c) {
  json j = json::object();
  j["network"] = c.network;
  j["scheme"] = std::string(to_string(c.scheme));
  json schemes = json::array();
  for (SchemeId s : c.schemes) schemes.push_back(std::string(to_string(s)));
  j["schemes"] = schemes;
  j["demand"] = c.demand;
  j["observations"] = c.observations;
  j["observation_horizon_s"] = c.observation_horizon_s;
  j["vehicle_types"] = c.vehicle_types;
  j["vplus"] = c.vplus;
  j["volumes"] = c.volumes;
  j["duration_s"] = c.duration_s;
  j["warmup_s"] = c.warmup_s;
  j["dt_s"] = c.dt_s;
  j["replications"] = c.replications;
  j["base_seed"] = c.base_seed;
  json window = {{"start_s", c.peak_window.start_s}};
  window["end_s"] = std::isfinite(c.peak_window.end_s) ? json(c.peak_window.end_s) : json(nullptr);
  j["peak_window"] = window;
  j["alpha"] = c.alpha;
  return j.dump(2) + "\n";
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path, "config");
  try {
    return parse_config(text, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

NetworkGeometryConfig parse_geometry(const std::string& json_text) {
  constexpr std::string_view where = "network";
  const json j = parse_json(json_text, where);
  expect_object(j, where);
  reject_unknown(j, where, {"ring_diameter_m", "ring_speed_limit_kph", "stop_line_offset_m", "approaches"});
  NetworkGeometryConfig g = default_geometry();
  get_opt(j, where, "ring_diameter_m", g.ring_diameter_m);
  get_opt(j, where, "ring_speed_limit_kph", g.ring_speed_limit_kph);
  get_opt(j, where, "stop_line_offset_m", g.stop_line_offset_m);
  if (j.contains("approaches")) {
    const json& arr = j["approaches"];
    if (!arr.is_array() || arr.size() != 3) throw ConfigError("network: 'approaches' must list exactly 3 approaches");
    for (std::size_t i = 0; i < 3; ++i) {
      const std::string w = fmt::format("network.approaches[{}]", i);
      const json& a = arr[i];
      expect_object(a, w);
      reject_unknown(a, w, {"id", "name", "azimuth_deg", "distance_from_center_m", "lanes_in", "lanes_out",
                            "speed_limit_kph"});
      ApproachGeometry& g_a = g.approaches[i];
      g_a.id = approach_key(get<std::string>(a, w, "id"), w);
      get_opt(a, w, "name", g_a.name);
      get_opt(a, w, "azimuth_deg", g_a.azimuth_deg);
      get_opt(a, w, "distance_from_center_m", g_a.distance_from_center_m);
      get_opt(a, w, "lanes_in", g_a.lanes_in);
      get_opt(a, w, "lanes_out", g_a.lanes_out);
      get_opt(a, w, "speed_limit_kph", g_a.speed_limit_kph);
    }
  }
  return g;
}

std::string render_geometry(const NetworkGeometryConfig& g) {
  json arr = json::array();
  for (const auto& a : g.approaches) {
    arr.push_back({{"id", std::string(to_string(a.id))},
                   {"name", a.name},
                   {"azimuth_deg", a.azimuth_deg},
                   {"distance_from_center_m", a.distance_from_center_m},
                   {"lanes_in", a.lanes_in},
                   {"lanes_out", a.lanes_out},
                   {"speed_limit_kph", a.speed_limit_kph}});
  }
  json j = {{"ring_diameter_m", g.ring_diameter_m},
            {"ring_speed_limit_kph", g.ring_speed_limit_kph},
            {"stop_line_offset_m", g.stop_line_offset_m},
            {"approaches", arr}};
  return j.dump(2) + "\n";
}

DemandProfile parse_demand(const std::string& json_text) {
  constexpr std::string_view where = "demand";
  const json j = parse_json(json_text, where);
  expect_object(j, where);
  reject_unknown(j, where, {"rate_per_s", "od_split", "type_share"});
  DemandProfile p;
  const auto rates = get<std::map<std::string, double>>(j, where, "rate_per_s");
  for (const auto& [k, v] : rates) p.rate_per_s[index_of(approach_key(k, "demand.rate_per_s"))] = v;
  const auto od = get<std::map<std::string, std::map<std::string, double>>>(j, where, "od_split");
  for (const auto& [o, row] : od) {
    for (const auto& [d, v] : row) {
      p.od_split[index_of(approach_key(o, "demand.od_split"))][index_of(approach_key(d, "demand.od_split"))] = v;
    }
  }
  const auto shares = get<std::map<std::string, double>>(j, where, "type_share");
  for (const auto& [k, v] : shares) p.type_share[static_cast<std::size_t>(kind_key(k, "demand.type_share"))] = v;
  p.validate();
  return p;
}

std::string render_demand(const DemandProfile& p) {
  json rates = json::object();
  json od = json::object();
  for (Approach o : kAllApproaches) {
    rates[std::string(to_string(o))] = p.rate_per_s[index_of(o)];
    json row = json::object();
    for (Approach d : kAllApproaches) {
      if (d != o) row[std::string(to_string(d))] = p.od_split[index_of(o)][index_of(d)];
    }
    od[std::string(to_string(o))] = row;
  }
  json shares = json::object();
  for (VehicleKind k : kAllVehicleKinds) shares[std::string(to_string(k))] = p.type_share[static_cast<std::size_t>(k)];
  json j = {{"rate_per_s", rates}, {"od_split", od}, {"type_share", shares}};
  return j.dump(2) + "\n";
}

VehicleCatalog parse_vehicle_types(const std::string& json_text) {
  constexpr std::string_view where = "vehicle_types";
  const json j = parse_json(json_text, where);
  expect_object(j, where);
  VehicleCatalog catalog;
  auto params = catalog.all();
  for (const auto& [name, entry] : j.items()) {
    const std::string w = fmt::format("vehicle_types.{}", name);
    expect_object(entry, w);
    reject_unknown(entry, w,
                   {"length_m", "a_max", "a_norm", "b_emerg", "v_goal_kph", "reaction_time_s", "c_acc", "c_dec", "m_exp",
                    "l_exp", "critical_gap_s", "follow_up_s"});
    VehicleTypeParams& t = params[static_cast<std::size_t>(kind_key(name, where))];
    get_opt(entry, w, "length_m", t.length_m);
    get_opt(entry, w, "a_max", t.a_max);
    get_opt(entry, w, "a_norm", t.a_norm);
    get_opt(entry, w, "b_emerg", t.b_emerg);
    get_opt(entry, w, "v_goal_kph", t.v_goal_kph);
    get_opt(entry, w, "reaction_time_s", t.reaction_time_s);
    get_opt(entry, w, "c_acc", t.ghr.c_acc);
    get_opt(entry, w, "c_dec", t.ghr.c_dec);
    get_opt(entry, w, "m_exp", t.ghr.m_exp);
    get_opt(entry, w, "l_exp", t.ghr.l_exp);
    get_opt(entry, w, "critical_gap_s", t.critical_gap_s);
    get_opt(entry, w, "follow_up_s", t.follow_up_s);
  }
  return VehicleCatalog(params);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Scenario load_scenario(const ScenarioConfig& config) {
  config.validate();
  NetworkGeometryConfig geometry =
      config.network.empty() ? default_geometry() : parse_geometry(read_file(config.resolve(config.network), "network"));
  RoadNetwork network = build_bicutan_network(geometry);
  VehicleCatalog catalog = config.vehicle_types.empty()
                               ? VehicleCatalog{}
                               : parse_vehicle_types(read_file(config.resolve(config.vehicle_types), "vehicle_types"));
  DemandProfile demand;
  if (!config.demand.empty()) {
    demand = parse_demand(read_file(config.resolve(config.demand), "demand"));
  } else {
    try {
      demand = estimate_demand(ingest_observations(config.resolve(config.observations)), config.observation_horizon_s);
      demand.validate();
    } catch (const DataError& e) {
      throw ConfigError(fmt::format("observations: {}", e.what()));
    }
  }
  demand.volume_scale = config.vplus;
  kernel::KernelParams kp;
  kp.dt_s = config.dt_s;
  return Scenario{config, geometry, std::move(network), catalog, demand, kp};
}

}  // namespace bicutan::harness
