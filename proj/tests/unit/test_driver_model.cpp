#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bicutan/errors.hpp"
#include "bicutan/kernel/driver_model.hpp"

using namespace bicutan;
using namespace bicutan::kernel;

namespace {

const KernelParams kParams{};
const VehicleTypeParams kJeepney = VehicleCatalog{}[VehicleKind::Jeepney];

LeaderView stopped_at(double gap) { return LeaderView{gap, 0.0, 4.0, 7}; }

}  // namespace

TEST_CASE("state classification") {
  CHECK(classify_state(10.0, std::nullopt, kJeepney, kParams) == DriverState::FreeDriving);
  CHECK(classify_state(15.0, stopped_at(1.0), kJeepney, kParams) == DriverState::EmergencyDeceleration);

  // 2 s headway at 10 m/s behind a leader at the same speed: 20 m gap.
  // Stopping room = 20 - 1 + 100/8 = 31.5 m, required 100/63 = 1.59 < a_norm 2.0.
  const LeaderView same_speed{20.0, 10.0, 4.0, 7};
  CHECK(required_decel(10.0, same_speed, 1.0) == doctest::Approx(100.0 / 63.0));
  CHECK(classify_state(10.0, same_speed, kJeepney, kParams) == DriverState::NormalFollowing);

  // Headway above h_free = 4 s.
  CHECK(classify_state(10.0, LeaderView{45.0, 10.0, 4.0, 7}, kJeepney, kParams) == DriverState::FreeDriving);
  // Stopped driver with a leader is free to move off.
  CHECK(classify_state(0.0, stopped_at(5.0), kJeepney, kParams) == DriverState::FreeDriving);
  // A far gap is still an emergency when the leader is stopped and the driver fast:
  // 25 m behind a stopped leader at 11 m/s needs 121/48 = 2.52 > 2.0.
  CHECK(classify_state(11.0, stopped_at(25.0), kJeepney, kParams) == DriverState::EmergencyDeceleration);
}

TEST_CASE("safe gap is the threshold of normal braking") {
  const LeaderView l{0.0, 6.0, 4.0, 7};
  const double g = safe_gap(12.0, l, kJeepney, 1.0);
  CHECK(g == doctest::Approx(1.0 + 144.0 / 4.0 - 36.0 / 8.0));
  CHECK(required_decel(12.0, LeaderView{g, 6.0, 4.0, 7}, 1.0) == doctest::Approx(kJeepney.a_norm));
}

TEST_CASE("required deceleration edge cases") {
  CHECK(required_decel(0.0, stopped_at(0.5), 1.0) == 0.0);
  CHECK(std::isinf(required_decel(5.0, stopped_at(1.0), 1.0)));
  CHECK(required_decel(10.0, stopped_at(26.0), 1.0) == doctest::Approx(2.0));
}

TEST_CASE("free driving acceleration") {
  const double goal = kJeepney.v_goal_mps();
  CHECK(free_driving_accel(0.0, goal, kJeepney, kParams) == kJeepney.a_max);
  CHECK(free_driving_accel(goal, goal, kJeepney, kParams) == 0.0);
  CHECK(free_driving_accel(goal + 0.005, goal, kJeepney, kParams) == 0.0);
  const double above = goal + 5.0 / 3.6;
  CHECK(free_driving_accel(above, goal, kJeepney, kParams) == -kJeepney.a_norm);
  // Final step lands exactly on the goal.
  const double near = goal - 0.05;
  CHECK(near + free_driving_accel(near, goal, kJeepney, kParams) * kParams.dt_s == doctest::Approx(goal));
  const double over = goal + 0.1;
  CHECK(over + free_driving_accel(over, goal, kJeepney, kParams) * kParams.dt_s == doctest::Approx(goal));
}

TEST_CASE("deceleration from 5 kph over the goal ends exactly on the goal") {
  const double goal = kJeepney.v_goal_mps();
  double v = goal + 5.0 / 3.6;
  int steps = 0;
  while (std::fabs(v - goal) > kParams.speed_epsilon_mps && steps < 1000) {
    const double a = free_driving_accel(v, goal, kJeepney, kParams);
    CHECK(a <= 0.0);
    CHECK(a >= -kJeepney.a_norm);
    v += a * kParams.dt_s;
    ++steps;
  }
  CHECK(v == doctest::Approx(goal));
  // 1.389 m/s at 2 m/s^2 takes 0.69 s: 7 steps, the last one clipped.
  CHECK(steps == 7);
}

TEST_CASE("stimulus-response law") {
  GhrParams p;
  CHECK(ghr_accel({10.0, 10.0, 20.0}, p, kJeepney) == 0.0);

  GhrParams linear{0.6, 0.5, 0.0, 0.0};
  CHECK(ghr_accel({5.0, 3.0, 12.0}, linear, kJeepney) == doctest::Approx(-1.0));

  GhrParams speed_spacing{13.0, 1.0, 1.0, 2.0};
  const double oracle = 13.0 * std::pow(10.0, 1.0) * 1.0 / std::pow(20.0, 2.0);
  CHECK(ghr_accel({10.0, 11.0, 20.0}, speed_spacing, kJeepney) == doctest::Approx(oracle));
  CHECK(oracle > 0.0);

  // Clamped to [-b_emerg, a_max].
  CHECK(ghr_accel({20.0, 0.0, 1.0}, p, kJeepney) == -kJeepney.b_emerg);
  CHECK(ghr_accel({0.0, 20.0, 1.0}, p, kJeepney) == kJeepney.a_max);

  CHECK_THROWS_AS(ghr_accel({5.0, 3.0, 0.0}, p, kJeepney), SimulationAbort);
  CHECK_THROWS_AS(ghr_accel({5.0, 3.0, -0.5}, p, kJeepney), SimulationAbort);
}

TEST_CASE("stimulus-response sign follows relative speed") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> speed(0.0, 20.0), gap(0.01, 150.0), expo(0.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const GhrParams p{0.1 + expo(rng), 0.1 + expo(rng), expo(rng), expo(rng)};
    const PerceptionSample s{speed(rng), speed(rng), gap(rng)};
    const double a = ghr_accel(s, p, kJeepney);
    const double dv = s.leader_speed_mps - s.own_speed_mps;
    if (dv > 0.0) CHECK(a >= 0.0);
    if (dv < 0.0) CHECK(a <= 0.0);
  }
}

TEST_CASE("emergency braking follows the safe-stopping bound") {
  const double v = 10.0;
  const double b = kJeepney.b_emerg;
  // Gap exactly v^2 / (2 b): even b_emerg is not enough once the standstill gap is kept.
  CHECK(emergency_decel(v, stopped_at(v * v / (2 * b)), kJeepney, 1.0) == -b);
  // Twice that gap: v^2 / (2 (2 v^2 / (2 b) - 1)) = 100 / 48.
  const double d = emergency_decel(v, stopped_at(v * v / b), kJeepney, 1.0);
  CHECK(d == doctest::Approx(-100.0 / 48.0));
  CHECK(-d > kJeepney.a_norm);
  CHECK(-d < b);
  CHECK(emergency_decel(0.0, stopped_at(0.5), kJeepney, 1.0) == 0.0);
  // Mild cases never brake softer than a_norm.
  CHECK(emergency_decel(v, stopped_at(200.0), kJeepney, 1.0) == -kJeepney.a_norm);
}

TEST_CASE("mandatory lane change") {
  NeighborView view;
  view.speed_mps = 8.0;
  view.target_speed_mps = 11.0;
  view.in_required_lane = false;
  view.required_direction = LaneChange::ChangeRight;
  view.right.exists = true;
  view.right.leader = LeaderView{100.0, 8.0, 4.0, 3};
  view.right.lag_gap_m = 100.0;
  view.right.lag_speed_mps = 8.0;
  CHECK(lane_change_decision(view, kJeepney, kParams) == LaneChange::ChangeRight);

  // Lag gap of 0.5 m: rejected.
  view.right.lag_gap_m = 0.5;
  CHECK(lane_change_decision(view, kJeepney, kParams) == LaneChange::Stay);

  // A fast follower closing in: 10 m behind at 20 m/s needs more than its normal braking.
  view.right.lag_gap_m = 10.0;
  view.right.lag_speed_mps = 20.0;
  CHECK_FALSE(lane_gaps_acceptable(view, view.right, kJeepney, kParams));
  CHECK(lane_change_decision(view, kJeepney, kParams) == LaneChange::Stay);

  // Mandatory beats a faster discretionary lane on the other side.
  view.right.lag_gap_m = 100.0;
  view.right.lag_speed_mps = 8.0;
  view.left.exists = true;
  view.left.allowed_by_route = true;
  CHECK(lane_change_decision(view, kJeepney, kParams) == LaneChange::ChangeRight);
}

TEST_CASE("discretionary lane change needs a speed gain") {
  NeighborView view;
  view.speed_mps = 5.0;
  view.target_speed_mps = kJeepney.v_goal_mps();
  view.own_leader = LeaderView{8.0, 3.0, 4.0, 9};
  view.left.exists = true;
  view.left.allowed_by_route = true;
  // Own leader at 8 m doing 3 m/s, empty target lane: gain 11.1 - 3 >= 2.
  CHECK(lane_change_decision(view, kJeepney, kParams) == LaneChange::ChangeLeft);

  // Target leader barely faster: gain below the threshold.
  view.left.leader = LeaderView{30.0, 4.5, 4.0, 4};
  CHECK(lane_change_decision(view, kJeepney, kParams) == LaneChange::Stay);

  // Lane not allowed by the route.
  view.left.leader.reset();
  view.left.allowed_by_route = false;
  CHECK(lane_change_decision(view, kJeepney, kParams) == LaneChange::Stay);

  // Own leader beyond the lookahead does not motivate a change.
  view.left.allowed_by_route = true;
  view.own_leader = LeaderView{80.0, 3.0, 4.0, 9};
  CHECK(lane_change_decision(view, kJeepney, kParams) == LaneChange::Stay);
}

TEST_CASE("roundabout entry gap acceptance") {
  CHECK(gap_acceptance_entry(std::nullopt, 0, kJeepney));
  CHECK_FALSE(gap_acceptance_entry(1.0, 0, kJeepney));
  // 6.2 s gap: 6.2 >= 3.5 admits the first, 6.2 >= 3.5 + 2.5 the second, not a third.
  CHECK(gap_acceptance_entry(6.2, 0, kJeepney));
  CHECK(gap_acceptance_entry(6.2, 1, kJeepney));
  CHECK_FALSE(gap_acceptance_entry(6.2, 2, kJeepney));
  CHECK(gap_acceptance_entry(3.5, 0, kJeepney));
}
