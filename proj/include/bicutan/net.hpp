#pragma once

#include <array>
#include <string>
#include <vector>

#include "bicutan/approach.hpp"
#include "bicutan/lane_config.hpp"
#include "bicutan/schemes.hpp"
#include "bicutan/vehicle_types.hpp"

namespace bicutan {

struct ApproachGeometry {
  Approach id = Approach::A;
  std::string name;
  /// Direction of the approach seen from the roundabout centre, degrees
  /// counter-clockwise from east. Circulation is counter-clockwise.
  double azimuth_deg = 0.0;
  double distance_from_center_m = 100.0;
  int lanes_in = 2;   // toward the ring
  int lanes_out = 2;  // away from the ring
  double speed_limit_kph = 60.0;

  friend bool operator==(const ApproachGeometry&, const ApproachGeometry&) = default;
};

struct NetworkGeometryConfig {
  double ring_diameter_m = 34.0;
  double ring_speed_limit_kph = 40.0;
  /// Stop/yield line distance upstream of each ring entry.
  double stop_line_offset_m = 5.0;
  std::array<ApproachGeometry, 3> approaches;

  friend bool operator==(const NetworkGeometryConfig&, const NetworkGeometryConfig&) = default;
};

/// PNR 106 m west, PNCC/ESR fork 150 m north, DOST gate 100 m east of a
/// 34 m roundabout; every approach 2 + 2 lanes at 60 kph.
NetworkGeometryConfig default_geometry();

/// Direction of travel along a link: Forward runs from -> to.
enum class Direction { Forward, Backward };

struct Link {
  std::string id;
  std::string from;
  std::string to;
  double length_m = 0.0;
  int lanes_forward = 0;
  int lanes_backward = 0;
  double speed_limit_kph = 0.0;

  int physical_lanes() const { return lanes_forward + lanes_backward; }
};

struct RouteStep {
  std::size_t link = 0;
  Direction direction = Direction::Forward;
};

struct Route {
  std::string id;  // e.g. "A->C"
  Approach origin = Approach::A;
  Approach destination = Approach::B;
  std::vector<RouteStep> steps;
  double length_m = 0.0;
};

struct ApproachInfo {
  Approach id = Approach::A;
  std::string name;
  double distance_from_center_m = 0.0;
  double azimuth_deg = 0.0;
  /// Arc coordinate of the entry/exit point on the ring, metres counter-clockwise from east.
  double ring_position_m = 0.0;
  /// Stop line measured from the approach origin along the inbound direction.
  double stop_line_m = 0.0;
  std::size_t link = 0;  // approach link; Forward = inbound
};

/// Static road network of the roundabout. Immutable once built.
class RoadNetwork {
 public:
  double ring_diameter_m() const { return ring_diameter_m_; }
  double ring_circumference_m() const;
  double ring_speed_limit_kph() const { return ring_speed_limit_kph_; }

  const std::array<ApproachInfo, 3>& approaches() const { return approaches_; }
  const ApproachInfo& approach(Approach a) const { return approaches_[index_of(a)]; }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(std::size_t index) const { return links_.at(index); }
  /// Throws ConfigError for unknown ids.
  const Link& link(const std::string& id) const;
  const Link& approach_link(Approach a) const { return links_[approaches_[index_of(a)].link]; }

  const std::vector<Route>& routes() const { return routes_; }
  const Route& route(Approach origin, Approach destination) const;
  /// Throws ConfigError for unknown route ids.
  const Route& route(const std::string& id) const;

  /// Counter-clockwise ring distance from the entry of `from` to the exit of `to`.
  double ring_arc_m(Approach from, Approach to) const;

  /// Lanes (inbound, outbound) on an approach under `config`.
  std::pair<int, int> approach_lanes(Approach a, const LaneConfig& config) const;

 private:
  friend RoadNetwork build_bicutan_network(const NetworkGeometryConfig& geometry);

  double ring_diameter_m_ = 0.0;
  double ring_speed_limit_kph_ = 0.0;
  std::array<ApproachInfo, 3> approaches_{};
  std::vector<Link> links_;
  std::vector<Route> routes_;
};

/// Builds the three-approach roundabout. Each approach is a two-way link from
/// its origin node to its ring node; the ring is a chain of one-way arcs in
/// counter-clockwise order. Throws ConfigError on non-positive lengths,
/// speed limits or diameters, on zero lanes in any direction, and on
/// duplicate approach labels or azimuths.
RoadNetwork build_bicutan_network(const NetworkGeometryConfig& geometry = default_geometry());

/// Lane configuration in force under `scheme` at `sim_time_s`, validated
/// against the network: overrides never exceed a link's physical lanes and
/// leave at least one lane in each direction a route uses.
LaneConfig active_lane_config(const RoadNetwork& network, const TrafficScheme& scheme, double sim_time_s);

/// Time to cover one segment at min(v_goal, speed limit), seconds.
double segment_free_flow_time(double length_m, double speed_limit_kph, const VehicleTypeParams& vtype);

/// Sum over route segments of length / min(v_goal, segment speed limit), seconds.
double free_flow_time(const RoadNetwork& network, const Route& route, const VehicleTypeParams& vtype);
/// Route lookup by id ("A->C"); throws ConfigError for unknown ids.
double free_flow_time(const RoadNetwork& network, const std::string& route_id, const VehicleTypeParams& vtype);

}  // namespace bicutan
