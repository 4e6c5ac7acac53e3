#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "bicutan/errors.hpp"
#include "bicutan/kernel/engine.hpp"

using namespace bicutan;
using namespace bicutan::kernel;

namespace {

const RoadNetwork& network() {
  static const RoadNetwork net = build_bicutan_network();
  return net;
}

DemandProfile reference_demand(double vplus = 0.0) {
  DemandProfile p;
  p.rate_per_s = {0.10, 0.08, 0.09};
  p.od_split = {{{0, .6, .4}, {.5, 0, .5}, {.6, .4, 0}}};
  p.type_share = {.30, .05, .05, .10, .15, .20, .10, .05};
  p.volume_scale = vplus;
  return p;
}

}  // namespace

TEST_CASE("lone vehicle from rest reaches its goal speed in v_goal / a_max") {
  Engine e(network(), make_scheme(SchemeId::T0));
  const auto& jeep = e.catalog()[VehicleKind::Jeepney];
  const int id = e.add_vehicle(Approach::B, Approach::A, VehicleKind::Jeepney, 0, 0.0, 0.0);
  const double t_min = jeep.v_goal_mps() / jeep.a_max;
  double reached = -1.0;
  while (e.time() < 20.0 && reached < 0.0) {
    e.step();
    const Vehicle* v = e.find(id);
    REQUIRE(v != nullptr);
    if (std::fabs(v->v - jeep.v_goal_mps()) <= e.params().speed_epsilon_mps) reached = e.time();
  }
  CHECK(reached >= t_min - e.params().dt_s);
  CHECK(reached <= t_min + e.params().dt_s);
}

TEST_CASE("a vehicle at goal speed on an empty road advances v dt per step") {
  Engine e(network(), make_scheme(SchemeId::T0));
  const double v0 = e.catalog()[VehicleKind::Jeepney].v_goal_mps();
  const int id = e.add_vehicle(Approach::B, Approach::C, VehicleKind::Jeepney, 0, 10.0, v0);
  e.step();
  const Vehicle* v = e.find(id);
  REQUIRE(v != nullptr);
  CHECK(v->s == doctest::Approx(10.0 + v0 * e.params().dt_s).epsilon(1e-12));
  CHECK(v->v == doctest::Approx(v0));
  CHECK(v->state == DriverState::FreeDriving);
}

TEST_CASE("a vehicle facing a red signal stops before the line") {
  Engine e(network(), make_scheme(SchemeId::T1));
  const double stop_line = network().approach(Approach::B).stop_line_m;
  const int id = e.add_vehicle(Approach::B, Approach::A, VehicleKind::Jeepney, 0, 0.0,
                               e.catalog()[VehicleKind::Jeepney].v_goal_mps());
  bool braked = false;
  while (e.time() < 29.9) {
    e.step();
    const Vehicle* v = e.find(id);
    REQUIRE(v != nullptr);
    CHECK(v->segment == Segment::Inbound);
    CHECK(v->s <= stop_line);
    braked = braked || v->a < 0.0;
  }
  CHECK(braked);
  CHECK(e.find(id)->v == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(e.counters().red_violations == 0);
  // Released at the phase change, it leaves the approach.
  e.run_until(60.0);
  CHECK(e.trips().size() == 1);
}

TEST_CASE("vehicles added by hand are validated") {
  Engine e(network(), make_scheme(SchemeId::T0));
  e.add_vehicle(Approach::A, Approach::C, VehicleKind::Bus, 0, 30.0, 5.0);
  CHECK_THROWS_AS(e.add_vehicle(Approach::A, Approach::C, VehicleKind::Bus, 0, 25.0, 5.0), ConfigError);
  CHECK_THROWS_AS(e.add_vehicle(Approach::A, Approach::C, VehicleKind::Bus, 0, 200.0, 5.0), ConfigError);
  CHECK_THROWS_AS(e.add_vehicle(Approach::A, Approach::A, VehicleKind::Bus, 0, 5.0, 5.0), ConfigError);
  CHECK_NOTHROW(e.add_vehicle(Approach::A, Approach::C, VehicleKind::Bus, 1, 30.0, 5.0));
}

TEST_CASE("scripted trips give hand-computed delay and speed") {
  // Three vehicles released one at a time at their goal speed on an empty
  // network: each trip runs at free flow, so delay is zero and journey speed
  // is the goal speed (40, 40 and 15 kph).
  Engine e(network(), make_scheme(SchemeId::T0));
  const auto& cat = e.catalog();
  e.add_vehicle(Approach::A, Approach::C, VehicleKind::Jeepney, 0, 0.0, cat[VehicleKind::Jeepney].v_goal_mps());
  e.run_until(40.0);
  e.add_vehicle(Approach::B, Approach::A, VehicleKind::Jeepney, 0, 0.0, cat[VehicleKind::Jeepney].v_goal_mps());
  e.run_until(80.0);
  e.add_vehicle(Approach::C, Approach::B, VehicleKind::Bicycle, 0, 0.0, cat[VehicleKind::Bicycle].v_goal_mps());
  e.run_until(140.0);
  REQUIRE(e.trips().size() == 3);
  for (const auto& t : e.trips()) {
    CHECK(t.distance_m == doctest::Approx(network().route(t.origin, t.destination).length_m));
    CHECK(t.free_flow_s == doctest::Approx(free_flow_time(network(), network().route(t.origin, t.destination),
                                                          cat[t.vtype])));
  }
  const auto r = replication_summary(e.trips());
  CHECK(r.delta_s <= e.params().dt_s);
  CHECK(r.sigma_kph == doctest::Approx((40.0 + 40.0 + 15.0) / 3.0).epsilon(1e-3));
  // A jeepney A->C: 89 m + half ring + 83 m at 40 kph.
  const auto& first = e.trips().front();
  CHECK(first.exit_time_s - first.entry_time_s ==
        doctest::Approx((89.0 + 17.0 * std::numbers::pi + 83.0) / (40.0 / 3.6)).epsilon(1e-3));
}

TEST_CASE("conservation holds every step under demand") {
  for (SchemeId id : {SchemeId::T0, SchemeId::T4}) {
    Engine e(network(), make_scheme(id));
    e.schedule(generate_arrivals(reference_demand(0.5), 7, 900.0));
    while (e.time() < 900.0) {
      e.step();
      CHECK(e.counters().generated ==
            e.counters().exited + static_cast<long>(e.vehicles().size()) + static_cast<long>(e.queued()));
      for (const auto& v : e.vehicles()) {
        CHECK(v.v >= 0.0);
      }
    }
    CHECK(e.counters().exited == static_cast<long>(e.trips().size()));
    CHECK(e.counters().red_violations == 0);
    CHECK(e.trips().size() > 200);  // about 364 arrivals
  }
}

TEST_CASE("positions never decrease along the route") {
  Engine e(network(), make_scheme(SchemeId::T2));
  e.schedule(generate_arrivals(reference_demand(), 11, 600.0));
  std::map<int, std::pair<int, double>> last;  // id -> (segment, s)
  while (e.time() < 600.0) {
    e.step();
    for (const auto& v : e.vehicles()) {
      const int seg = static_cast<int>(v.segment);
      auto it = last.find(v.id);
      if (it != last.end()) {
        CHECK(seg >= it->second.first);
        if (seg == it->second.first) CHECK(v.s >= it->second.second);
      }
      last[v.id] = {seg, v.s};
    }
  }
}

TEST_CASE("runs are deterministic") {
  const auto arrivals = generate_arrivals(reference_demand(), 99, 600.0);
  Engine a(network(), make_scheme(SchemeId::T3S15));
  Engine b(network(), make_scheme(SchemeId::T3S15));
  a.schedule(arrivals);
  b.schedule(arrivals);
  a.run_until(600.0);
  b.run_until(600.0);
  CHECK(a.trips() == b.trips());
  REQUIRE(a.vehicles().size() == b.vehicles().size());
  for (std::size_t i = 0; i < a.vehicles().size(); ++i) {
    CHECK(a.vehicles()[i].s == b.vehicles()[i].s);
    CHECK(a.vehicles()[i].v == b.vehicles()[i].v);
  }
}

TEST_CASE("scheduling rejects arrivals in the past") {
  Engine e(network(), make_scheme(SchemeId::T0));
  e.run_until(10.0);
  CHECK_THROWS(e.schedule({Arrival{5.0, Approach::A, Approach::B, VehicleKind::Taxi}}));
}

TEST_CASE("unfinished vehicles are counted from the warm-up on") {
  Engine e(network(), make_scheme(SchemeId::T0));
  e.schedule(generate_arrivals(reference_demand(), 5, 300.0));
  e.run_until(300.0);
  CHECK(e.unfinished() == static_cast<int>(e.vehicles().size() + e.queued()));
  CHECK(e.unfinished(1e9) == 0);
}
