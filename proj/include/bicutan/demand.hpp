#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bicutan/approach.hpp"
#include "bicutan/vehicle_types.hpp"

namespace bicutan {

struct ObservationRecord {
  std::string plate;
  VehicleKind vtype = VehicleKind::Jeepney;
  Approach entry = Approach::A;
  Approach exit = Approach::B;
  double entry_time_s = 0.0;
  double exit_time_s = 0.0;

  double travel_time_s() const { return exit_time_s - entry_time_s; }
  friend bool operator==(const ObservationRecord&, const ObservationRecord&) = default;
};

inline constexpr std::string_view kObservationHeader = "plate,vtype,entry,exit,entry_time_s,exit_time_s";

/// Parses the observation CSV. Errors name the source and the 1-based line number.
std::vector<ObservationRecord> ingest_observations(std::istream& in, std::string_view source_name = "<stream>");
std::vector<ObservationRecord> ingest_observations(const std::filesystem::path& path);

struct DemandProfile {
  std::array<double, 3> rate_per_s{};                   // indexed by origin
  std::array<std::array<double, 3>, 3> od_split{};      // [origin][destination], diagonal 0
  std::array<double, 8> type_share{};                   // indexed by VehicleKind
  double volume_scale = 0.0;                            // V+ as a fraction

  /// Throws ConfigError unless rates are positive, splits and shares sum to 1
  /// (within 1e-9) with no U-turns, and volume_scale >= 0.
  void validate() const;
  double effective_rate(Approach origin) const { return rate_per_s[index_of(origin)] * (1.0 + volume_scale); }

  friend bool operator==(const DemandProfile&, const DemandProfile&) = default;
};

/// Rates are counts per origin over `horizon_s`; splits and type mix are
/// empirical frequencies. Throws DataError on empty input or when an origin
/// has no records.
DemandProfile estimate_demand(const std::vector<ObservationRecord>& records, double horizon_s);

struct Arrival {
  double time_s = 0.0;
  Approach origin = Approach::A;
  Approach destination = Approach::B;
  VehicleKind kind = VehicleKind::Jeepney;

  friend bool operator==(const Arrival&, const Arrival&) = default;
};

/// Uniform on [0, 1) from the top 53 bits of one 64-bit draw.
double uniform01(std::uint64_t bits);

/// Independent Poisson streams per origin at rate lambda * (1 + V+), with
/// destination and vehicle type drawn from the profile, merged by time
/// (origin order breaks ties). All times lie in [0, duration_s).
std::vector<Arrival> generate_arrivals(const DemandProfile& profile, std::uint64_t seed, double duration_s);

}  // namespace bicutan
