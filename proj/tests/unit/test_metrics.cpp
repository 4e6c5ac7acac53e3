#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "bicutan/errors.hpp"
#include "bicutan/kernel/engine.hpp"
#include "bicutan/metrics.hpp"

using namespace bicutan;

namespace {

TripRecord trip(double entry, double exit, double distance, double ff = 0.0) {
  TripRecord t;
  t.entry_time_s = entry;
  t.exit_time_s = exit;
  t.distance_m = distance;
  t.free_flow_s = ff;
  return t;
}

}  // namespace

TEST_CASE("per-vehicle delay") {
  CHECK(vehicle_delay(trip(0, 30, 100), 30.0) == 0.0);
  CHECK(vehicle_delay(trip(10, 59.08, 100), 19.08) == doctest::Approx(30.0));
  CHECK(vehicle_delay(trip(0, 18.9, 100), 19.08) == 0.0);
  CHECK(vehicle_delay(trip(0, 25, 100, 20)) == doctest::Approx(5.0));
}

TEST_CASE("journey speed in kph") {
  CHECK(vehicle_speed(trip(0, 19.08, 212)) == doctest::Approx(40.0).epsilon(1e-3));
  CHECK(vehicle_speed(trip(5, 41, 100)) == doctest::Approx(10.0));
}

TEST_CASE("replication summary") {
  std::vector<TripRecord> trips{trip(0, 30, 100, 20), trip(0, 40, 100, 20)};
  auto r = replication_summary(trips);
  CHECK(r.delta_s == doctest::Approx(15.0));
  CHECK(r.trips == 2);

  // Speeds 20 and 40 kph.
  std::vector<TripRecord> s{trip(0, 18, 100), trip(0, 9, 100)};
  CHECK(replication_summary(s).sigma_kph == doctest::Approx(30.0));

  // Warm-up entries are left out.
  trips.push_back(trip(-5, 100, 100, 20));
  r = replication_summary(trips, 0.0);
  CHECK(r.trips == 2);
  CHECK(r.delta_s == doctest::Approx(15.0));

  CHECK_THROWS_AS(replication_summary({}), DataError);
  CHECK_THROWS_AS(replication_summary({trip(10, 30, 100)}, 50.0), DataError);
  try {
    replication_summary({});
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("empty replication") != std::string::npos);
  }
}

TEST_CASE("summary is invariant under trip order") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  std::vector<TripRecord> trips;
  for (int i = 0; i < 200; ++i) {
    const double entry = u(rng);
    trips.push_back(trip(entry, entry + u(rng), 50.0 + u(rng), u(rng) / 4));
  }
  const auto a = replication_summary(trips);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(trips.begin(), trips.end(), rng);
    const auto b = replication_summary(trips);
    CHECK(b.delta_s == doctest::Approx(a.delta_s).epsilon(1e-12));
    CHECK(b.sigma_kph == doctest::Approx(a.sigma_kph).epsilon(1e-12));
  }
}

TEST_CASE("a lone free-flow trip has delay within one step and speed within the limit") {
  const RoadNetwork net = build_bicutan_network();
  for (VehicleKind kind : kAllVehicleKinds) {
    kernel::Engine e(net, make_scheme(SchemeId::T0));
    e.add_vehicle(Approach::C, Approach::A, kind, 0, 0.0, e.catalog()[kind].v_goal_mps());
    e.run_until(120.0);
    REQUIRE(e.trips().size() == 1);
    const TripRecord& t = e.trips().front();
    CHECK(vehicle_delay(t) <= e.params().dt_s);
    // Highest limit on any route is the 60 kph approach limit.
    CHECK(vehicle_speed(t) <= std::min(60.0, e.catalog()[kind].v_goal_kph) + 1e-6);
  }
}

TEST_CASE("trip CSV export") {
  TripRecord t = trip(1.5, 21.5, 200, 18);
  t.agent_id = 42;
  t.vtype = VehicleKind::Auv;
  t.origin = Approach::B;
  t.destination = Approach::C;
  std::ostringstream out;
  write_trip_csv(out, {t});
  CHECK(out.str() == "agent_id,vtype,origin,destination,entry_s,exit_s,delay_s,speed_kph\n"
                     "42,AUV,B,C,1.5,21.5,2,36\n");
}
