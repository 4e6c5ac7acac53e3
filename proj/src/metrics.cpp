#include "bicutan/metrics.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "bicutan/errors.hpp"

namespace bicutan {

double vehicle_delay(const TripRecord& trip, double free_flow_s) {
  return std::max(0.0, trip.travel_time_s() - free_flow_s);
}

double vehicle_delay(const TripRecord& trip) { return vehicle_delay(trip, trip.free_flow_s); }

double vehicle_speed(const TripRecord& trip) { return mps_to_kph(trip.distance_m / trip.travel_time_s()); }

ReplicationResult replication_summary(const std::vector<TripRecord>& trips, double warmup_s) {
  ReplicationResult r;
  double delay = 0.0;
  double speed = 0.0;
  for (const auto& t : trips) {
    if (t.entry_time_s < warmup_s) continue;
    delay += vehicle_delay(t);
    speed += vehicle_speed(t);
    ++r.trips;
  }
  if (r.trips == 0) throw DataError("empty replication: no completed trips after the warm-up period");
  r.delta_s = delay / r.trips;
  r.sigma_kph = speed / r.trips;
  return r;
}

void write_trip_csv(std::ostream& out, const std::vector<TripRecord>& trips) {
  fmt::print(out, "{}\n", kTripCsvHeader);
  for (const auto& t : trips) {
    fmt::print(out, "{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", t.agent_id, to_string(t.vtype), to_string(t.origin),
               to_string(t.destination), t.entry_time_s, t.exit_time_s, vehicle_delay(t), vehicle_speed(t));
  }
}

}  // namespace bicutan
