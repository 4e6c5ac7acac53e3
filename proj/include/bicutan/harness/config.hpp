#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bicutan/demand.hpp"
#include "bicutan/kernel/driver_model.hpp"
#include "bicutan/net.hpp"
#include "bicutan/schemes.hpp"
#include "bicutan/vehicle_types.hpp"

namespace bicutan::harness {

/// One experiment. JSON keys are the field names. Paths are kept as written
/// and resolved against `base_dir`, the directory of the config file.
struct ScenarioConfig {
  std::string network;       // geometry JSON; empty = built-in geometry
  SchemeId scheme = SchemeId::T0;
  std::vector<SchemeId> schemes;  // compared set; empty = t0..t5
  std::string demand;        // demand profile JSON
  std::string observations;  // observation CSV, used for demand when `demand` is empty
  double observation_horizon_s = 3600.0;
  std::string vehicle_types;  // per-type overrides JSON; empty = defaults
  double vplus = 0.0;
  std::vector<double> volumes{0.0, 10.0, 50.0, 100.0};  // sweep levels, percent
  double duration_s = 3900.0;  // whole horizon, warm-up included
  double warmup_s = 300.0;
  double dt_s = 0.1;
  int replications = 10;
  std::uint64_t base_seed = 20131213;
  TimeWindow peak_window;
  double alpha = 0.05;

  std::filesystem::path base_dir;  // not serialized

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  std::filesystem::path resolve(const std::string& relative) const;
  /// The scheme set compare uses when none is given on the command line.
  std::vector<SchemeId> compared_schemes() const;

  friend bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);
};

/// Throws ConfigError on malformed JSON, unknown keys or wrong types.
ScenarioConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
std::string render_config(const ScenarioConfig& config);
ScenarioConfig load_config(const std::filesystem::path& path);

NetworkGeometryConfig parse_geometry(const std::string& json_text);
std::string render_geometry(const NetworkGeometryConfig& geometry);

DemandProfile parse_demand(const std::string& json_text);
std::string render_demand(const DemandProfile& profile);

/// Overrides on top of the default catalog, keyed by type name.
VehicleCatalog parse_vehicle_types(const std::string& json_text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Everything a replication needs, resolved from a config.
struct Scenario {
  ScenarioConfig config;
  NetworkGeometryConfig geometry;
  RoadNetwork network;
  VehicleCatalog catalog;
  DemandProfile demand;
  kernel::KernelParams kernel;
};

/// Reads the referenced files. Missing or invalid inputs raise ConfigError.
Scenario load_scenario(const ScenarioConfig& config);

}  // namespace bicutan::harness
