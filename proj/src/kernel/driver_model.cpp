#include "bicutan/kernel/driver_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bicutan/errors.hpp"

namespace bicutan::kernel {

const char* to_string(DriverState s) {
  switch (s) {
    case DriverState::FreeDriving: return "FreeDriving";
    case DriverState::NormalFollowing: return "NormalFollowing";
    case DriverState::EmergencyDeceleration: return "EmergencyDeceleration";
  }
  return "?";
}

double required_decel(double speed_mps, const LeaderView& leader, double standstill_gap_m) {
  if (speed_mps <= 0.0) return 0.0;
  const double leader_stop = leader.speed_mps > 0.0 ? leader.speed_mps * leader.speed_mps / (2.0 * leader.b_emerg) : 0.0;
  const double room = leader.gap_m - standstill_gap_m + leader_stop;
  if (room <= 0.0) return std::numeric_limits<double>::infinity();
  return speed_mps * speed_mps / (2.0 * room);
}

double safe_gap(double speed_mps, const LeaderView& leader, const VehicleTypeParams& vtype, double standstill_gap_m) {
  const double leader_stop = leader.speed_mps > 0.0 ? leader.speed_mps * leader.speed_mps / (2.0 * leader.b_emerg) : 0.0;
  return standstill_gap_m + speed_mps * speed_mps / (2.0 * vtype.a_norm) - leader_stop;
}

DriverState classify_state(double speed_mps, const std::optional<LeaderView>& leader, const VehicleTypeParams& vtype,
                           const KernelParams& params) {
  if (!leader) return DriverState::FreeDriving;
  if (required_decel(speed_mps, *leader, params.standstill_gap_m) > vtype.a_norm) {
    return DriverState::EmergencyDeceleration;
  }
  if (speed_mps <= 0.0 || leader->gap_m > params.h_free_s * speed_mps) return DriverState::FreeDriving;
  return DriverState::NormalFollowing;
}

double free_driving_accel(double speed_mps, double target_speed_mps, const VehicleTypeParams& vtype,
                          const KernelParams& params) {
  const double diff = target_speed_mps - speed_mps;
  if (std::fabs(diff) <= params.speed_epsilon_mps) return 0.0;
  const double exact = diff / params.dt_s;
  if (diff > 0.0) return std::min(vtype.a_max, exact);
  return std::max(-vtype.a_norm, exact);
}

double ghr_accel(const PerceptionSample& sample, const GhrParams& ghr, const VehicleTypeParams& vtype) {
  if (!(sample.gap_m > 0.0)) {
    throw SimulationAbort(fmt::format("stimulus-response law evaluated at non-positive spacing {} m", sample.gap_m),
                          std::numeric_limits<double>::quiet_NaN());
  }
  const double dv = sample.leader_speed_mps - sample.own_speed_mps;
  if (dv == 0.0) return 0.0;
  const double c = dv > 0.0 ? ghr.c_acc : ghr.c_dec;
  const double speed_term = ghr.m_exp == 0.0 ? 1.0 : std::pow(std::max(sample.own_speed_mps, 0.0), ghr.m_exp);
  const double spacing_term = ghr.l_exp == 0.0 ? 1.0 : std::pow(sample.gap_m, ghr.l_exp);
  const double a = c * speed_term * dv / spacing_term;
  return std::clamp(a, -vtype.b_emerg, vtype.a_max);
}

double emergency_decel(double speed_mps, const LeaderView& leader, const VehicleTypeParams& vtype,
                       double standstill_gap_m) {
  if (speed_mps <= 0.0) return 0.0;
  const double need = required_decel(speed_mps, leader, standstill_gap_m);
  return -std::clamp(need, vtype.a_norm, vtype.b_emerg);
}

bool lane_gaps_acceptable(const NeighborView& view, const AdjacentLane& target, const VehicleTypeParams& vtype,
                          const KernelParams& params) {
  if (!target.exists) return false;
  if (target.leader) {
    if (target.leader->gap_m < params.standstill_gap_m) return false;
    if (required_decel(view.speed_mps, *target.leader, params.standstill_gap_m) > vtype.a_norm) return false;
  }
  if (target.lag_gap_m) {
    if (*target.lag_gap_m < params.standstill_gap_m) return false;
    const LeaderView me{*target.lag_gap_m, view.speed_mps, vtype.b_emerg, -1};
    if (required_decel(target.lag_speed_mps, me, params.standstill_gap_m) > target.lag_a_norm) return false;
  }
  return true;
}

namespace {

double anticipated_speed(const std::optional<LeaderView>& leader, double target_speed, const KernelParams& params) {
  if (!leader || leader->gap_m > params.lane_change_lookahead_m) return target_speed;
  return std::min(leader->speed_mps, target_speed);
}

}  // namespace

LaneChange lane_change_decision(const NeighborView& view, const VehicleTypeParams& vtype, const KernelParams& params) {
  if (!view.in_required_lane) {
    const AdjacentLane& target = view.required_direction == LaneChange::ChangeLeft ? view.left : view.right;
    if (view.required_direction != LaneChange::Stay && lane_gaps_acceptable(view, target, vtype, params)) {
      return view.required_direction;
    }
    return LaneChange::Stay;
  }

  const double own = anticipated_speed(view.own_leader, view.target_speed_mps, params);
  LaneChange best = LaneChange::Stay;
  double best_gain = params.lane_change_advantage_mps;
  for (const auto& [dir, lane] : {std::pair{LaneChange::ChangeLeft, &view.left}, std::pair{LaneChange::ChangeRight, &view.right}}) {
    if (!lane->exists || !lane->allowed_by_route) continue;
    const double gain = anticipated_speed(lane->leader, view.target_speed_mps, params) - own;
    if (gain >= best_gain && lane_gaps_acceptable(view, *lane, vtype, params)) {
      best = dir;
      best_gain = gain;
    }
  }
  return best;
}

bool gap_acceptance_entry(std::optional<double> gap_s, int admitted_in_gap, const VehicleTypeParams& vtype) {
  if (!gap_s) return true;
  return *gap_s >= vtype.critical_gap_s + admitted_in_gap * vtype.follow_up_s;
}

}  // namespace bicutan::kernel
