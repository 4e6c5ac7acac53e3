#include "bicutan/net.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "bicutan/errors.hpp"

namespace bicutan {

NetworkGeometryConfig default_geometry() {
  NetworkGeometryConfig g;
  g.approaches = {ApproachGeometry{Approach::A, "PNR", 180.0, 106.0, 2, 2, 60.0},
                  ApproachGeometry{Approach::B, "PNCC", 90.0, 150.0, 2, 2, 60.0},
                  ApproachGeometry{Approach::C, "DOST", 0.0, 100.0, 2, 2, 60.0}};
  return g;
}

double RoadNetwork::ring_circumference_m() const { return std::numbers::pi * ring_diameter_m_; }

const Link& RoadNetwork::link(const std::string& id) const {
  for (const auto& l : links_) {
    if (l.id == id) return l;
  }
  throw ConfigError(fmt::format("unknown link id '{}'", id));
}

const Route& RoadNetwork::route(Approach origin, Approach destination) const {
  for (const auto& r : routes_) {
    if (r.origin == origin && r.destination == destination) return r;
  }
  throw ConfigError(fmt::format("no route {}->{}", to_string(origin), to_string(destination)));
}

const Route& RoadNetwork::route(const std::string& id) const {
  for (const auto& r : routes_) {
    if (r.id == id) return r;
  }
  throw ConfigError(fmt::format("unknown route id '{}'", id));
}

double RoadNetwork::ring_arc_m(Approach from, Approach to) const {
  const double c = ring_circumference_m();
  double arc = approach(to).ring_position_m - approach(from).ring_position_m;
  arc = std::fmod(arc, c);
  if (arc <= 0.0) arc += c;
  return arc;
}

std::pair<int, int> RoadNetwork::approach_lanes(Approach a, const LaneConfig& config) const {
  const Link& l = approach_link(a);
  if (const auto* o = config.find(l.id)) return {o->lanes_forward, o->lanes_backward};
  return {l.lanes_forward, l.lanes_backward};
}

namespace {

void require_positive(double value, const std::string& what) {
  if (!(value > 0.0)) throw ConfigError(fmt::format("{} must be > 0 (got {})", what, value));
}

std::string ring_node(Approach a) { return fmt::format("R{}", to_string(a)); }

}  // namespace

RoadNetwork build_bicutan_network(const NetworkGeometryConfig& geometry) {
  require_positive(geometry.ring_diameter_m, "ring diameter");
  require_positive(geometry.ring_speed_limit_kph, "ring speed limit");
  require_positive(geometry.stop_line_offset_m, "stop line offset");

  std::set<Approach> labels;
  std::set<double> azimuths;
  for (const auto& ag : geometry.approaches) {
    if (!labels.insert(ag.id).second) {
      throw ConfigError(fmt::format("approach {} defined twice", to_string(ag.id)));
    }
    if (!azimuths.insert(std::fmod(std::fmod(ag.azimuth_deg, 360.0) + 360.0, 360.0)).second) {
      throw ConfigError(fmt::format("approach {} shares its azimuth with another approach", to_string(ag.id)));
    }
    require_positive(ag.speed_limit_kph, fmt::format("approach {} speed limit", to_string(ag.id)));
    if (ag.lanes_in < 1 || ag.lanes_out < 1) {
      throw ConfigError(fmt::format("approach {} needs at least one lane in each direction (got {} in, {} out)",
                                    to_string(ag.id), ag.lanes_in, ag.lanes_out));
    }
  }

  RoadNetwork net;
  net.ring_diameter_m_ = geometry.ring_diameter_m;
  net.ring_speed_limit_kph_ = geometry.ring_speed_limit_kph;
  const double radius = 0.5 * geometry.ring_diameter_m;
  const double circumference = std::numbers::pi * geometry.ring_diameter_m;

  for (const auto& ag : geometry.approaches) {
    const double length = ag.distance_from_center_m - radius;
    require_positive(length, fmt::format("approach {} link length (distance from centre minus ring radius)",
                                         to_string(ag.id)));
    if (geometry.stop_line_offset_m >= length) {
      throw ConfigError(fmt::format("stop line offset {} m does not fit on approach {} ({} m)",
                                    geometry.stop_line_offset_m, to_string(ag.id), length));
    }
    ApproachInfo info;
    info.id = ag.id;
    info.name = ag.name;
    info.distance_from_center_m = ag.distance_from_center_m;
    info.azimuth_deg = ag.azimuth_deg;
    double az = std::fmod(ag.azimuth_deg, 360.0);
    if (az < 0.0) az += 360.0;
    info.ring_position_m = az / 360.0 * circumference;
    info.stop_line_m = length - geometry.stop_line_offset_m;
    info.link = net.links_.size();
    net.approaches_[index_of(ag.id)] = info;
    net.links_.push_back(Link{std::string(to_string(ag.id)), std::string(to_string(ag.id)), ring_node(ag.id), length,
                              ag.lanes_in, ag.lanes_out, ag.speed_limit_kph});
  }

  // Ring arcs between consecutive approaches in counter-clockwise order.
  std::array<Approach, 3> ccw = kAllApproaches;
  std::sort(ccw.begin(), ccw.end(), [&](Approach x, Approach y) {
    return net.approach(x).ring_position_m < net.approach(y).ring_position_m;
  });
  std::array<std::size_t, 3> arc_from{};  // arc link leaving each approach's ring node
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const Approach from = ccw[i];
    const Approach to = ccw[(i + 1) % ccw.size()];
    arc_from[index_of(from)] = net.links_.size();
    net.links_.push_back(Link{fmt::format("ring:{}-{}", to_string(from), to_string(to)), ring_node(from),
                              ring_node(to), net.ring_arc_m(from, to), 1, 0, geometry.ring_speed_limit_kph});
  }

  for (Approach o : kAllApproaches) {
    for (Approach d : kAllApproaches) {
      if (o == d) continue;
      Route r;
      r.id = fmt::format("{}->{}", to_string(o), to_string(d));
      r.origin = o;
      r.destination = d;
      r.steps.push_back(RouteStep{net.approach(o).link, Direction::Forward});
      Approach at = o;
      while (at != d) {
        const std::size_t arc = arc_from[index_of(at)];
        r.steps.push_back(RouteStep{arc, Direction::Forward});
        const std::string& to_node = net.links_[arc].to;
        for (Approach a : kAllApproaches) {
          if (ring_node(a) == to_node) at = a;
        }
      }
      r.steps.push_back(RouteStep{net.approach(d).link, Direction::Backward});
      for (const auto& s : r.steps) r.length_m += net.links_[s.link].length_m;
      net.routes_.push_back(std::move(r));
    }
  }
  return net;
}

LaneConfig active_lane_config(const RoadNetwork& network, const TrafficScheme& scheme, double sim_time_s) {
  if (sim_time_s < 0.0) throw ConfigError(fmt::format("active_lane_config: negative time {}", sim_time_s));
  LaneConfig config = scheme_lane_config(scheme, sim_time_s);
  for (const auto& o : config.overrides) {
    const Link& l = network.link(o.link_id);
    if (o.lanes_forward < 0 || o.lanes_backward < 0 || o.lanes_forward + o.lanes_backward > l.physical_lanes()) {
      throw ConfigError(fmt::format("lane override {}+{} on link {} exceeds its {} physical lanes", o.lanes_forward,
                                    o.lanes_backward, o.link_id, l.physical_lanes()));
    }
    // Every approach link carries inbound and outbound routes.
    if (o.lanes_forward < 1 || o.lanes_backward < 1) {
      throw ConfigError(fmt::format("lane override on link {} leaves a routed direction without lanes", o.link_id));
    }
  }
  return config;
}

double segment_free_flow_time(double length_m, double speed_limit_kph, const VehicleTypeParams& vtype) {
  return length_m / kph_to_mps(std::min(vtype.v_goal_kph, speed_limit_kph));
}

double free_flow_time(const RoadNetwork& network, const Route& route, const VehicleTypeParams& vtype) {
  double total = 0.0;
  for (const auto& step : route.steps) {
    const Link& l = network.link(step.link);
    total += segment_free_flow_time(l.length_m, l.speed_limit_kph, vtype);
  }
  return total;
}

double free_flow_time(const RoadNetwork& network, const std::string& route_id, const VehicleTypeParams& vtype) {
  return free_flow_time(network, network.route(route_id), vtype);
}

}  // namespace bicutan
