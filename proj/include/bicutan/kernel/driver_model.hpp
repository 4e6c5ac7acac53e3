#pragma once

#include <optional>

#include "bicutan/vehicle_types.hpp"

namespace bicutan::kernel {

enum class DriverState { FreeDriving, NormalFollowing, EmergencyDeceleration };

const char* to_string(DriverState s);

/// Engine-wide behavioural constants shared by every driver type.
struct KernelParams {
  double dt_s = 0.1;
  /// Time headway above which a driver ignores its leader.
  double h_free_s = 4.0;
  /// Bumper gap kept to a stopped leader.
  double standstill_gap_m = 1.0;
  double perception_range_m = 150.0;
  /// Speed tolerance for "at goal speed".
  double speed_epsilon_mps = 0.01;
  /// Minimum gain in anticipated speed that motivates a discretionary lane change.
  double lane_change_advantage_mps = 2.0;
  /// A lane leader farther than this does not limit the anticipated lane speed.
  double lane_change_lookahead_m = 60.0;
  double lane_change_cooldown_s = 3.0;

  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// What a driver sees of the obstacle directly ahead: a vehicle, the stop
/// line, or a committed entry at the ring. Stationary obstacles have speed 0.
struct LeaderView {
  double gap_m = 0.0;      // bumper to bumper
  double speed_mps = 0.0;  // leader speed
  double b_emerg = 4.0;    // leader's hardest braking, used for its stopping distance
  int id = -1;             // negative ids denote virtual obstacles
};

/// Delayed perception sample used by the stimulus-response law.
struct PerceptionSample {
  double own_speed_mps = 0.0;
  double leader_speed_mps = 0.0;
  double gap_m = 0.0;
};

/// Deceleration (positive) needed to stop `standstill_gap` behind where the
/// leader would stop under its hardest braking. Infinite when no room is left.
double required_decel(double speed_mps, const LeaderView& leader, double standstill_gap_m);

/// Smallest gap at which the required deceleration does not exceed a_norm.
double safe_gap(double speed_mps, const LeaderView& leader, const VehicleTypeParams& vtype, double standstill_gap_m);

/// EmergencyDeceleration when the driver cannot stop behind the leader with its
/// normal deceleration; FreeDriving with no leader or a time headway above
/// h_free; NormalFollowing otherwise. The emergency test runs first.
DriverState classify_state(double speed_mps, const std::optional<LeaderView>& leader, const VehicleTypeParams& vtype,
                           const KernelParams& params);

/// +a_max below the target speed, -a_norm above it, zero within speed_epsilon;
/// clipped so a step of length dt lands exactly on the target.
double free_driving_accel(double speed_mps, double target_speed_mps, const VehicleTypeParams& vtype,
                          const KernelParams& params);

/// Asymmetric stimulus-response law c * v^m * dv / dx^l on a delayed sample;
/// c_acc when the leader is pulling away, c_dec when closing in. Clamped to
/// [-b_emerg, a_max]. Throws SimulationAbort when the sampled gap is <= 0.
double ghr_accel(const PerceptionSample& sample, const GhrParams& ghr, const VehicleTypeParams& vtype);

/// Braking (negative) that keeps the stopping distance inside the available
/// gap: the required deceleration clamped to [a_norm, b_emerg]. Zero when
/// already stopped.
double emergency_decel(double speed_mps, const LeaderView& leader, const VehicleTypeParams& vtype,
                       double standstill_gap_m);

// ---------------------------------------------------------------------------
// Lane changing

enum class LaneChange { Stay, ChangeLeft, ChangeRight };

/// One adjacent lane as seen by a driver considering a change into it.
struct AdjacentLane {
  bool exists = false;
  bool allowed_by_route = false;
  std::optional<LeaderView> leader;  // gap from own front to the target leader's rear
  /// Follower in the target lane: gap from its front to own rear, its speed and braking.
  std::optional<double> lag_gap_m;
  double lag_speed_mps = 0.0;
  double lag_a_norm = 2.0;
};

struct NeighborView {
  double speed_mps = 0.0;
  double target_speed_mps = 0.0;  // min(v_goal, speed limit)
  std::optional<LeaderView> own_leader;
  bool in_required_lane = true;
  /// Direction toward the required lanes when in_required_lane is false.
  LaneChange required_direction = LaneChange::Stay;
  AdjacentLane left;
  AdjacentLane right;
};

/// True when both the lead gap and the lag gap in the target lane are acceptable:
/// neither the changer nor the new follower would need more than its normal
/// deceleration, and both bumper gaps are at least the standstill gap.
bool lane_gaps_acceptable(const NeighborView& view, const AdjacentLane& target, const VehicleTypeParams& vtype,
                          const KernelParams& params);

/// Mandatory moves toward a required lane take precedence; otherwise a change
/// is discretionary and needs an anticipated speed gain of at least
/// lane_change_advantage_mps. No change is emitted unless both gaps are acceptable.
LaneChange lane_change_decision(const NeighborView& view, const VehicleTypeParams& vtype, const KernelParams& params);

// ---------------------------------------------------------------------------
// Roundabout entry

/// Gap acceptance at the ring entry. `gap_s` is the time gap to the nearest
/// conflicting circulating vehicle (nullopt: ring empty); `admitted_in_gap`
/// counts vehicles already admitted into that same gap. Accept iff
/// gap >= t_c + admitted * t_f.
bool gap_acceptance_entry(std::optional<double> gap_s, int admitted_in_gap, const VehicleTypeParams& vtype);

}  // namespace bicutan::kernel
