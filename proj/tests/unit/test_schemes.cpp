#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bicutan/errors.hpp"
#include "bicutan/schemes.hpp"

using namespace bicutan;

namespace {

bool stopped(const SignalState& s, Approach a) { return s[a] == Signal::Stop; }

}  // namespace

TEST_CASE("catalog holds the eight schemes") {
  const auto cat = scheme_catalog();
  REQUIRE(cat.size() == 8);
  for (std::size_t i = 0; i < cat.size(); ++i) CHECK(cat[i].id == kAllSchemes[i]);

  const auto& t0 = cat[0];
  CHECK_FALSE(t0.cycle.has_value());
  CHECK_FALSE(t0.lane_redesignation.has_value());

  const TrafficScheme t1 = make_scheme(SchemeId::T1);
  REQUIRE(t1.cycle);
  CHECK(t1.cycle->length_s() == 60.0);
  CHECK_FALSE(t1.lane_redesignation);

  const TrafficScheme t2 = make_scheme(SchemeId::T2);
  REQUIRE(t2.cycle);
  CHECK(t2.cycle->length_s() == 120.0);
  REQUIRE(t2.cycle->phases.size() == 2);
  CHECK(t2.cycle->phases[0].duration_s == 60.0);
  CHECK(t2.cycle->phases[1].duration_s == 60.0);

  const TrafficScheme t3 = make_scheme(SchemeId::T3);
  CHECK_FALSE(t3.cycle);
  REQUIRE(t3.lane_redesignation);
  CHECK(t3.lane_redesignation->link_id == "A");
  CHECK(t3.lane_redesignation->lanes_forward == 1);
  CHECK(t3.lane_redesignation->lanes_backward == 3);

  const TrafficScheme s15 = make_scheme(SchemeId::T3S15);
  CHECK(s15.lane_redesignation);
  REQUIRE(s15.stop_duration_s);
  CHECK(*s15.stop_duration_s == 15.0);
  CHECK(s15.cycle->length_s() == 30.0);
  CHECK(*make_scheme(SchemeId::T3S45).stop_duration_s == 45.0);

  // t4 = t1 + t3 lanes, t5 = t2 + t3 lanes.
  CHECK(make_scheme(SchemeId::T4).cycle == t1.cycle);
  CHECK(make_scheme(SchemeId::T4).lane_redesignation == t3.lane_redesignation);
  CHECK(make_scheme(SchemeId::T5).cycle == t2.cycle);
  CHECK(make_scheme(SchemeId::T5).lane_redesignation == t3.lane_redesignation);

  for (const auto& s : cat) {
    if (!s.cycle) continue;
    double sum = 0.0;
    for (const auto& p : s.cycle->phases) sum += p.duration_s;
    CHECK(sum == s.cycle->length_s());
  }
}

TEST_CASE("scheme ids parse and print") {
  for (SchemeId id : kAllSchemes) CHECK(parse_scheme_id(to_string(id)) == id);
  CHECK(to_string(SchemeId::T3S15) == "t3_s15");
  CHECK(parse_scheme_id("t3+45s") == SchemeId::T3S45);
  CHECK_THROWS_AS(parse_scheme_id("t6"), ConfigError);
  CHECK_THROWS_AS(parse_scheme_id("T1"), ConfigError);
}

TEST_CASE("t1 stops B then C in 30 s phases") {
  const TrafficScheme t1 = make_scheme(SchemeId::T1);
  const SignalState at10 = signal_state(t1, 10.0);
  CHECK(stopped(at10, Approach::B));
  CHECK_FALSE(stopped(at10, Approach::A));
  CHECK_FALSE(stopped(at10, Approach::C));
  const SignalState at40 = signal_state(t1, 40.0);
  CHECK(stopped(at40, Approach::C));
  CHECK_FALSE(stopped(at40, Approach::A));
  CHECK_FALSE(stopped(at40, Approach::B));
  CHECK(stopped(signal_state(t1, 29.999), Approach::B));
  CHECK(stopped(signal_state(t1, 30.0), Approach::C));
  CHECK(stopped(signal_state(t1, 60.0), Approach::B));
}

TEST_CASE("unsignalized schemes are all-go") {
  for (double t : {0.0, 17.3, 500.0, 3599.9}) {
    CHECK(signal_state(make_scheme(SchemeId::T0), t).all_go());
    CHECK(signal_state(make_scheme(SchemeId::T3), t).all_go());
  }
}

TEST_CASE("signalized t3 variants alternate B and C every S seconds") {
  const TrafficScheme s15 = make_scheme(SchemeId::T3S15);
  CHECK(stopped(signal_state(s15, 5.0), Approach::B));
  CHECK(stopped(signal_state(s15, 20.0), Approach::C));
  CHECK(stopped(signal_state(s15, 35.0), Approach::B));
  const TrafficScheme s45 = make_scheme(SchemeId::T3S45);
  CHECK(stopped(signal_state(s45, 44.0), Approach::B));
  CHECK(stopped(signal_state(s45, 46.0), Approach::C));
}

TEST_CASE("cyclic schemes are periodic with exactly one of B, C stopped and A never stopped") {
  for (SchemeId id : {SchemeId::T1, SchemeId::T2, SchemeId::T4, SchemeId::T5, SchemeId::T3S15, SchemeId::T3S45}) {
    const TrafficScheme s = make_scheme(id);
    const double cycle = s.cycle->length_s();
    for (int i = 0; i < 2400; ++i) {
      const double t = i * 0.25 + 0.05;
      const SignalState st = signal_state(s, t);
      CHECK(st == signal_state(s, t + cycle));
      CHECK_FALSE(stopped(st, Approach::A));
      CHECK(stopped(st, Approach::B) != stopped(st, Approach::C));
    }
  }
}

TEST_CASE("t4 signals equal t1 and t5 signals equal t2 pointwise") {
  for (int i = 0; i < 2000; ++i) {
    const double t = i * 0.37;
    CHECK(signal_state(make_scheme(SchemeId::T4), t) == signal_state(make_scheme(SchemeId::T1), t));
    CHECK(signal_state(make_scheme(SchemeId::T5), t) == signal_state(make_scheme(SchemeId::T2), t));
  }
}

TEST_CASE("time until stop") {
  const TrafficScheme t1 = make_scheme(SchemeId::T1);
  CHECK(time_until_stop(t1, Approach::B, 10.0) == 0.0);
  CHECK(time_until_stop(t1, Approach::C, 10.0) == doctest::Approx(20.0));
  CHECK(time_until_stop(t1, Approach::B, 40.0) == doctest::Approx(20.0));
  CHECK(std::isinf(time_until_stop(t1, Approach::A, 10.0)));
  CHECK(std::isinf(time_until_stop(make_scheme(SchemeId::T0), Approach::B, 10.0)));
}

TEST_CASE("lane overrides follow the scheme") {
  const TimeWindow peak{0.0, 1800.0};
  CHECK(scheme_lane_config(make_scheme(SchemeId::T1, peak), 100.0).overrides.empty());
  const auto t4 = scheme_lane_config(make_scheme(SchemeId::T4, peak), 100.0);
  REQUIRE(t4.overrides.size() == 1);
  CHECK(t4.find("A")->lanes_forward == 1);
  CHECK(t4.find("A")->lanes_backward == 3);
  // t4 in the window: lanes and t1 signals both active.
  CHECK(signal_state(make_scheme(SchemeId::T4, peak), 100.0) == signal_state(make_scheme(SchemeId::T1), 100.0));
  const auto t5 = scheme_lane_config(make_scheme(SchemeId::T5, peak), 100.0);
  REQUIRE(t5.overrides.size() == 1);
  CHECK(scheme_lane_config(make_scheme(SchemeId::T5, peak), 1800.0).overrides.empty());
}
