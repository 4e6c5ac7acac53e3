#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "bicutan/demand.hpp"
#include "bicutan/kernel/driver_model.hpp"
#include "bicutan/metrics.hpp"
#include "bicutan/net.hpp"
#include "bicutan/schemes.hpp"
#include "bicutan/vehicle_types.hpp"

namespace bicutan::kernel {

/// Where a vehicle's front bumper is. Coordinates are metres along the
/// current segment: inbound from the approach origin, ring from the entry
/// point, outbound from the ring.
enum class Segment { Inbound, Ring, Outbound };

struct Vehicle {
  int id = 0;
  VehicleKind kind = VehicleKind::Jeepney;
  Approach origin = Approach::A;
  Approach destination = Approach::B;
  Segment segment = Segment::Inbound;
  int lane = 0;  // inbound or outbound lane; unused on the ring
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  DriverState state = DriverState::FreeDriving;
  double entry_time_s = 0.0;

  bool granted = false;    // cleared to proceed past the stop line this step
  bool committed = false;  // will enter the ring; visible to circulating traffic
  bool crossed_stop_line = false;
  double last_lane_change_s = -std::numeric_limits<double>::infinity();

  struct Sample {
    PerceptionSample p;
    int leader_id = 0;
    bool has_leader = false;
  };
  std::vector<Sample> perception;  // ring buffer, oldest at perception_head when full
  std::size_t perception_head = 0;
};

struct EngineCounters {
  long generated = 0;  // arrivals released into the origin queues
  long spawned = 0;    // vehicles placed on an inbound link
  long exited = 0;
  long red_violations = 0;
  long lane_changes = 0;
  long entries = 0;  // ring entries
};

/// Deterministic single-replication simulator of the three-approach roundabout.
class Engine {
 public:
  Engine(const RoadNetwork& network, TrafficScheme scheme, VehicleCatalog catalog = {}, KernelParams params = {});

  /// Queues future arrivals; they must be sorted by time and not precede the clock.
  void schedule(const std::vector<Arrival>& arrivals);

  /// Places a vehicle directly on an inbound lane (scripted scenarios).
  /// Returns its id. Throws ConfigError when the spot is occupied.
  int add_vehicle(Approach origin, Approach destination, VehicleKind kind, int lane, double s, double v,
                  std::optional<double> entry_time_s = std::nullopt);

  /// Advances one time step of params().dt_s. Throws SimulationAbort on a
  /// collision or broken conservation.
  void step();
  /// Steps until the clock reaches `t_end_s`.
  void run_until(double t_end_s);

  double time() const { return static_cast<double>(step_index_) * params_.dt_s; }
  long step_index() const { return step_index_; }
  const KernelParams& params() const { return params_; }
  const RoadNetwork& network() const { return network_; }
  const TrafficScheme& scheme() const { return scheme_; }
  const VehicleCatalog& catalog() const { return catalog_; }

  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const Vehicle* find(int id) const;
  const std::vector<TripRecord>& trips() const { return trips_; }
  const EngineCounters& counters() const { return counters_; }
  std::size_t queued() const;
  /// Queued or on the network, with arrival time at or after `since_s`.
  int unfinished(double since_s = -std::numeric_limits<double>::infinity()) const;

 private:
  struct ApproachGeo {
    double inbound_length = 0.0;
    double stop_line = 0.0;
    double ring_pos = 0.0;
    double limit_mps = 0.0;
    int physical_lanes = 0;
  };
  struct RingElem {
    std::size_t idx = 0;
    double front = 0.0;  // absolute ring coordinate of the (projected) front
    bool tail = false;   // exited to an outbound link, rear still on the ring
    bool tentative = false;  // granted but not committed; seen only by entry checks
  };
  struct Session {
    int key = -2;
    double gap0 = std::numeric_limits<double>::infinity();
    int admitted = 0;
    double last_admit_s = -std::numeric_limits<double>::infinity();
  };

  const ApproachGeo& geo(Approach a) const { return geo_[index_of(a)]; }
  const VehicleTypeParams& type(const Vehicle& v) const { return catalog_[v.kind]; }
  double ring_length(const Vehicle& v) const { return ring_len_[index_of(v.origin)][index_of(v.destination)]; }
  int arcs(const Vehicle& v) const;
  double route_position(const Vehicle& v) const;
  double target_speed(const Vehicle& v) const;
  double wrap(double x) const;

  void rebuild_lanes();
  void build_ring();
  void refresh_lane_config();
  std::pair<int, int> required_inbound_lanes(Approach origin, int arcs) const;

  // Ring-channel queries. A follower is described by its front coordinate and
  // the ring distance it still has to cover before leaving the ring.
  std::optional<LeaderView> ring_leader(int self_id, double front, double remaining, bool tentative = false) const;
  std::optional<LeaderView> outbound_lookahead(Approach destination, double remaining) const;
  int most_space_outbound_lane(Approach destination) const;
  std::optional<LeaderView> lane_leader(const std::vector<std::size_t>& lane, std::size_t pos) const;
  std::optional<LeaderView> departed_tail(Approach origin, int lane, double s) const;

  void revoke_at_stop(const SignalState& signals);
  void control_entries(const SignalState& signals);
  bool grant_ok(const Vehicle& c, const Session& session, double until_stop) const;
  void change_lanes();
  void compute_accelerations();
  void integrate_and_transfer(const SignalState& signals);
  void spawn_from_queues();
  void check_invariants() const;

  double accel_for(const Vehicle& veh, const LeaderView* leader, const PerceptionSample* delayed,
                   DriverState& state) const;

  const RoadNetwork& network_;
  TrafficScheme scheme_;
  VehicleCatalog catalog_;
  KernelParams params_;
  std::size_t perception_len_ = 1;

  std::array<ApproachGeo, 3> geo_{};
  std::array<std::array<double, 3>, 3> ring_len_{};
  double circumference_ = 0.0;
  double ring_limit_mps_ = 0.0;

  long step_index_ = 0;
  int next_id_ = 1;
  std::vector<Vehicle> vehicles_;
  std::vector<int> index_by_id_;
  std::vector<std::size_t> lane_pos_;  // position of each vehicle within its lane list
  std::deque<Arrival> pending_;
  std::array<std::deque<Arrival>, 3> queues_;
  std::vector<TripRecord> trips_;
  EngineCounters counters_;

  std::array<std::pair<int, int>, 3> active_lanes_{};  // (inbound, outbound) per approach
  std::array<std::vector<std::vector<std::size_t>>, 3> inbound_;   // per lane, front-most first
  std::array<std::vector<std::vector<std::size_t>>, 3> outbound_;  // per lane, front-most first
  std::array<std::vector<int>, 3> departed_;                      // last vehicle to leave each inbound lane
  std::vector<RingElem> ring_;
  std::array<Session, 3> sessions_{};
};

}  // namespace bicutan::kernel
