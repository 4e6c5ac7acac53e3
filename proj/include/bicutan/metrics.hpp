#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bicutan/approach.hpp"
#include "bicutan/schemes.hpp"
#include "bicutan/vehicle_types.hpp"

namespace bicutan {

struct TripRecord {
  int agent_id = 0;
  VehicleKind vtype = VehicleKind::Jeepney;
  Approach origin = Approach::A;
  Approach destination = Approach::B;
  double entry_time_s = 0.0;  // arrival at the origin, so queueing counts as delay
  double exit_time_s = 0.0;
  double distance_m = 0.0;
  double free_flow_s = 0.0;

  double travel_time_s() const { return exit_time_s - entry_time_s; }
  friend bool operator==(const TripRecord&, const TripRecord&) = default;
};

/// max(0, travel time - free-flow time), seconds.
double vehicle_delay(const TripRecord& trip, double free_flow_s);
double vehicle_delay(const TripRecord& trip);
/// Journey speed distance / travel time, kph.
double vehicle_speed(const TripRecord& trip);

struct ReplicationResult {
  SchemeId scheme = SchemeId::T0;
  double vplus = 0.0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double delta_s = 0.0;    // mean delay
  double sigma_kph = 0.0;  // mean journey speed
  int trips = 0;           // completed trips counted
  int unfinished = 0;      // counted vehicles still queued or in the network at the horizon

  friend bool operator==(const ReplicationResult&, const ReplicationResult&) = default;
};

/// Means of delay and speed over trips that entered at or after `warmup_s`.
/// Throws DataError when no such trip exists.
ReplicationResult replication_summary(const std::vector<TripRecord>& trips, double warmup_s = 0.0);

inline constexpr std::string_view kTripCsvHeader = "agent_id,vtype,origin,destination,entry_s,exit_s,delay_s,speed_kph";

void write_trip_csv(std::ostream& out, const std::vector<TripRecord>& trips);

}  // namespace bicutan
