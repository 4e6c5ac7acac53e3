#include "bicutan/kernel/engine.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bicutan/errors.hpp"

namespace bicutan::kernel {

namespace {

constexpr double kEps = 1e-6;
// Leaders farther round the ring than this fraction of the circumference are
// really behind the follower.
constexpr double kRingLookFraction = 0.75;
// Extra seconds of Go required beyond the time needed to reach the stop line.
constexpr double kSignalMargin_s = 1.0;
// Inbound vehicles closer than this to the stop line keep their lane.
constexpr double kNoChangeZone_m = 15.0;
// A stopped ring leader blocks entry unless its rear is past the entry point.
constexpr double kMovingLeader_mps = 1.0;
// Floor on circulating speed when converting distance to a time gap.
constexpr double kGapSpeedFloor_mps = 1.0;

// Highest speed after one step from which the follower can still stop behind
// the leader using `decel`.
double safe_speed(const LeaderView& leader, double decel, double standstill_gap, double dt) {
  const double leader_stop = leader.speed_mps > 0.0 ? leader.speed_mps * leader.speed_mps / (2.0 * leader.b_emerg) : 0.0;
  const double room = leader.gap_m - standstill_gap + leader_stop;
  if (room <= 0.0) return 0.0;
  const double bt = decel * dt;
  return -bt + std::sqrt(bt * bt + 2.0 * decel * room);
}

}  // namespace

Engine::Engine(const RoadNetwork& network, TrafficScheme scheme, VehicleCatalog catalog, KernelParams params)
    : network_(network), scheme_(std::move(scheme)), catalog_(std::move(catalog)), params_(params) {
  if (!(params_.dt_s > 0.0)) throw ConfigError(fmt::format("time step must be > 0 (got {})", params_.dt_s));
  for (const auto& t : catalog_.all()) t.validate();
  circumference_ = network_.ring_circumference_m();
  ring_limit_mps_ = kph_to_mps(network_.ring_speed_limit_kph());
  for (Approach a : kAllApproaches) {
    const auto& info = network_.approach(a);
    const Link& l = network_.approach_link(a);
    ApproachGeo& g = geo_[index_of(a)];
    g.inbound_length = l.length_m;
    g.stop_line = info.stop_line_m;
    g.ring_pos = info.ring_position_m;
    g.limit_mps = kph_to_mps(l.speed_limit_kph);
    g.physical_lanes = l.physical_lanes();
    inbound_[index_of(a)].resize(static_cast<std::size_t>(g.physical_lanes));
    outbound_[index_of(a)].resize(static_cast<std::size_t>(g.physical_lanes));
    departed_[index_of(a)].assign(static_cast<std::size_t>(g.physical_lanes), 0);
  }
  for (const auto& r : network_.routes()) {
    double ring = 0.0;
    for (const auto& st : r.steps) {
      if (network_.link(st.link).id.starts_with("ring:")) ring += network_.link(st.link).length_m;
    }
    ring_len_[index_of(r.origin)][index_of(r.destination)] = ring;
  }
  const double reaction = catalog_[VehicleKind::Jeepney].reaction_time_s;
  perception_len_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(reaction / params_.dt_s - 1e-9)));
  refresh_lane_config();
}

void Engine::schedule(const std::vector<Arrival>& arrivals) {
  double last = pending_.empty() ? time() : pending_.back().time_s;
  for (const auto& a : arrivals) {
    if (a.time_s < last) throw ConfigError("arrivals must be sorted by time and not precede the clock");
    if (a.origin == a.destination) throw ConfigError("arrival with origin equal to destination");
    last = a.time_s;
    pending_.push_back(a);
  }
}

const Vehicle* Engine::find(int id) const {
  if (id <= 0 || static_cast<std::size_t>(id) >= index_by_id_.size()) return nullptr;
  const int idx = index_by_id_[static_cast<std::size_t>(id)];
  return idx < 0 ? nullptr : &vehicles_[static_cast<std::size_t>(idx)];
}

std::size_t Engine::queued() const {
  std::size_t n = 0;
  for (const auto& q : queues_) n += q.size();
  return n;
}

int Engine::unfinished(double since_s) const {
  int n = 0;
  for (const auto& q : queues_) {
    for (const auto& a : q) n += a.time_s >= since_s ? 1 : 0;
  }
  for (const auto& v : vehicles_) n += v.entry_time_s >= since_s ? 1 : 0;
  return n;
}

int Engine::arcs(const Vehicle& v) const {
  return static_cast<int>(network_.route(v.origin, v.destination).steps.size()) - 2;
}

double Engine::route_position(const Vehicle& v) const {
  switch (v.segment) {
    case Segment::Inbound: return v.s;
    case Segment::Ring: return geo(v.origin).inbound_length + v.s;
    case Segment::Outbound: return geo(v.origin).inbound_length + ring_length(v) + v.s;
  }
  return v.s;
}

double Engine::target_speed(const Vehicle& v) const {
  const double goal = type(v).v_goal_mps();
  switch (v.segment) {
    case Segment::Inbound: return std::min(goal, geo(v.origin).limit_mps);
    case Segment::Ring: return std::min(goal, ring_limit_mps_);
    case Segment::Outbound: return std::min(goal, geo(v.destination).limit_mps);
  }
  return goal;
}

double Engine::wrap(double x) const {
  double r = std::fmod(x, circumference_);
  if (r < 0.0) r += circumference_;
  return r;
}

void Engine::refresh_lane_config() {
  const LaneConfig config = active_lane_config(network_, scheme_, time());
  for (Approach a : kAllApproaches) active_lanes_[index_of(a)] = network_.approach_lanes(a, config);
}

std::pair<int, int> Engine::required_inbound_lanes(Approach origin, int n_arcs) const {
  const int n = active_lanes_[index_of(origin)].first;
  if (n <= 1) return {0, 0};
  if (n_arcs <= 1) return {0, std::max(0, n - 2)};
  return {1, n - 1};
}

void Engine::rebuild_lanes() {
  index_by_id_.assign(static_cast<std::size_t>(next_id_), -1);
  lane_pos_.assign(vehicles_.size(), 0);
  for (auto& per : inbound_) for (auto& l : per) l.clear();
  for (auto& per : outbound_) for (auto& l : per) l.clear();
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    const Vehicle& v = vehicles_[i];
    index_by_id_[static_cast<std::size_t>(v.id)] = static_cast<int>(i);
    if (v.segment == Segment::Inbound) inbound_[index_of(v.origin)][static_cast<std::size_t>(v.lane)].push_back(i);
    if (v.segment == Segment::Outbound) outbound_[index_of(v.destination)][static_cast<std::size_t>(v.lane)].push_back(i);
  }
  auto order = [&](std::vector<std::size_t>& lane) {
    std::sort(lane.begin(), lane.end(), [&](std::size_t x, std::size_t y) {
      if (vehicles_[x].s != vehicles_[y].s) return vehicles_[x].s > vehicles_[y].s;
      return vehicles_[x].id < vehicles_[y].id;
    });
    for (std::size_t p = 0; p < lane.size(); ++p) lane_pos_[lane[p]] = p;
  };
  for (auto& per : inbound_) for (auto& l : per) order(l);
  for (auto& per : outbound_) for (auto& l : per) order(l);
}

void Engine::build_ring() {
  ring_.clear();
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    const Vehicle& v = vehicles_[i];
    const ApproachGeo& go = geo(v.origin);
    switch (v.segment) {
      case Segment::Inbound:
        if (v.committed || v.granted) {
          ring_.push_back({i, wrap(go.ring_pos - (go.inbound_length - v.s)), false, !v.committed});
        }
        break;
      case Segment::Ring: ring_.push_back({i, wrap(go.ring_pos + v.s), false}); break;
      case Segment::Outbound:
        if (v.s < type(v).length_m) ring_.push_back({i, wrap(geo(v.destination).ring_pos + v.s), true});
        break;
    }
  }
}

std::optional<LeaderView> Engine::ring_leader(int self_id, double front, double remaining, bool tentative) const {
  std::optional<LeaderView> best;
  const double look = kRingLookFraction * circumference_;
  for (const auto& e : ring_) {
    const Vehicle& o = vehicles_[e.idx];
    if (o.id == self_id || (e.tentative && !tentative)) continue;
    const VehicleTypeParams& ot = type(o);
    double gap;
    if (e.tail) {
      // Only a follower that reaches the exit point meets the part still on the ring.
      const double to_exit = wrap(geo(o.destination).ring_pos - front);
      if (to_exit > remaining || to_exit > look) continue;
      gap = to_exit + o.s - ot.length_m;
    } else {
      const double d = wrap(e.front - front);
      if (d > look) continue;
      gap = d - ot.length_m;
      if (gap >= remaining) continue;
    }
    if (gap > params_.perception_range_m) continue;
    if (!best || gap < best->gap_m) best = LeaderView{gap, o.v, ot.b_emerg, o.id};
  }
  return best;
}

int Engine::most_space_outbound_lane(Approach destination) const {
  const auto& lanes = outbound_[index_of(destination)];
  const int n = active_lanes_[index_of(destination)].second;
  int best = 0;
  double best_space = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const auto& lane = lanes[static_cast<std::size_t>(k)];
    double space = std::numeric_limits<double>::infinity();
    if (!lane.empty()) {
      const Vehicle& last = vehicles_[lane.back()];
      space = last.s - type(last).length_m;
    }
    if (space > best_space) {
      best_space = space;
      best = k;
    }
  }
  return best;
}

std::optional<LeaderView> Engine::outbound_lookahead(Approach destination, double remaining) const {
  if (remaining > params_.perception_range_m) return std::nullopt;
  const auto& lane = outbound_[index_of(destination)][static_cast<std::size_t>(most_space_outbound_lane(destination))];
  if (lane.empty()) return std::nullopt;
  const Vehicle& last = vehicles_[lane.back()];
  const double gap = remaining + last.s - type(last).length_m;
  if (gap > params_.perception_range_m) return std::nullopt;
  return LeaderView{gap, last.v, type(last).b_emerg, last.id};
}

std::optional<LeaderView> Engine::lane_leader(const std::vector<std::size_t>& lane, std::size_t pos) const {
  if (pos == 0) return std::nullopt;
  const Vehicle& f = vehicles_[lane[pos]];
  const Vehicle& l = vehicles_[lane[pos - 1]];
  const double gap = l.s - type(l).length_m - f.s;
  if (gap > params_.perception_range_m) return std::nullopt;
  return LeaderView{gap, l.v, type(l).b_emerg, l.id};
}

std::optional<LeaderView> Engine::departed_tail(Approach origin, int lane, double s) const {
  const int id = departed_[index_of(origin)][static_cast<std::size_t>(lane)];
  const Vehicle* t = find(id);
  if (!t || t->segment != Segment::Ring) return std::nullopt;
  const double rear = geo(origin).inbound_length + t->s - type(*t).length_m;
  if (rear >= geo(origin).inbound_length) return std::nullopt;
  return LeaderView{rear - s, t->v, type(*t).b_emerg, t->id};
}

void Engine::revoke_at_stop(const SignalState& signals) {
  for (auto& v : vehicles_) {
    if (v.segment != Segment::Inbound || !v.committed || v.crossed_stop_line) continue;
    if (signals[v.origin] != Signal::Stop) continue;
    const double d = geo(v.origin).stop_line - v.s;
    const double need = v.v > 0.0 ? v.v * v.v / (2.0 * d) : 0.0;
    if (d > 0.0 && need <= type(v).b_emerg) {
      v.committed = false;
      v.granted = false;
    }
  }
}

bool Engine::grant_ok(const Vehicle& c, const Session& session, double until_stop) const {
  const VehicleTypeParams& ct = type(c);
  const ApproachGeo& g = geo(c.origin);
  const double t = time();

  const double d = std::max(0.0, g.stop_line - c.s);
  const double t_reach = (-c.v + std::sqrt(c.v * c.v + 2.0 * ct.a_max * d)) / ct.a_max;
  if (!(until_stop > t_reach + kSignalMargin_s)) return false;

  const std::optional<double> gap = std::isinf(session.gap0) ? std::nullopt : std::optional<double>(session.gap0);
  if (!gap_acceptance_entry(gap, session.admitted, ct)) return false;
  if (session.admitted > 0 && t - session.last_admit_s < ct.follow_up_s) return false;

  // The candidate as it would appear to circulating traffic once committed.
  const double x = g.inbound_length - c.s;
  const double front = wrap(g.ring_pos - x);
  const double remaining = ring_length(c) + x;
  const double look = kRingLookFraction * circumference_;
  for (const auto& e : ring_) {
    if (e.tail || vehicles_[e.idx].id == c.id) continue;
    const Vehicle& f = vehicles_[e.idx];
    const double f_remaining =
        f.segment == Segment::Ring ? ring_length(f) - f.s : ring_length(f) + geo(f.origin).inbound_length - f.s;
    const double dist = wrap(front - e.front);
    if (dist > look) continue;
    const double follower_gap = dist - ct.length_m;
    if (follower_gap >= f_remaining) continue;
    if (follower_gap < params_.standstill_gap_m) return false;
    const LeaderView me{follower_gap, c.v, ct.b_emerg, c.id};
    if (required_decel(f.v, me, params_.standstill_gap_m) > type(f).a_norm) return false;
  }
  if (const auto lead = ring_leader(c.id, front, remaining, true)) {
    if (lead->gap_m < params_.standstill_gap_m) return false;
    if (required_decel(c.v, *lead, params_.standstill_gap_m) > ct.a_norm) return false;
    if (lead->gap_m - x < params_.standstill_gap_m && lead->speed_mps < kMovingLeader_mps) return false;
  }
  return true;
}

void Engine::control_entries(const SignalState& signals) {
  const double t = time();
  const double look = kRingLookFraction * circumference_;
  for (Approach o : kAllApproaches) {
    build_ring();
    const ApproachGeo& g = geo(o);
    Session& ses = sessions_[index_of(o)];

    int key = -1;
    double nearest = std::numeric_limits<double>::infinity();
    double gap_now = std::numeric_limits<double>::infinity();
    for (const auto& e : ring_) {
      if (e.tail || e.tentative) continue;
      const Vehicle& f = vehicles_[e.idx];
      if (f.segment == Segment::Inbound && f.origin == o) continue;
      const double f_remaining =
          f.segment == Segment::Ring ? ring_length(f) - f.s : ring_length(f) + geo(f.origin).inbound_length - f.s;
      const double to_entry = wrap(g.ring_pos - e.front);
      if (to_entry > f_remaining || to_entry > look) continue;
      if (to_entry < nearest) {
        nearest = to_entry;
        key = f.id;
        gap_now = to_entry / std::max(f.v, kGapSpeedFloor_mps);
      }
    }
    if (key != ses.key) ses = Session{key, gap_now, 0, -std::numeric_limits<double>::infinity()};
    if (ses.admitted == 0) ses.gap0 = gap_now;

    bool busy = false;
    std::vector<std::size_t> candidates;
    for (const auto& lane : inbound_[index_of(o)]) {
      for (std::size_t j : lane) {
        if (!vehicles_[j].committed) vehicles_[j].granted = false;
      }
      if (lane.empty()) continue;
      if (vehicles_[lane.front()].committed) {
        busy = true;
        continue;
      }
      candidates.push_back(lane.front());
    }
    if (busy || signals[o] == Signal::Stop || candidates.empty()) continue;
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t x, std::size_t y) {
      const double dx = g.stop_line - vehicles_[x].s;
      const double dy = g.stop_line - vehicles_[y].s;
      if (dx != dy) return dx < dy;
      return vehicles_[x].lane < vehicles_[y].lane;
    });
    const double until_stop = time_until_stop(scheme_, o, t);
    for (std::size_t idx : candidates) {
      Vehicle& c = vehicles_[idx];
      if (!grant_ok(c, ses, until_stop)) continue;
      c.granted = true;
      const LeaderView line{g.stop_line - c.s, 0.0, type(c).b_emerg, -1};
      if (c.crossed_stop_line || required_decel(c.v, line, params_.standstill_gap_m) > type(c).a_norm) {
        c.committed = true;
        ++ses.admitted;
        ses.last_admit_s = t;
      }
      break;
    }
  }
  build_ring();
}

void Engine::change_lanes() {
  const double t = time();
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    Vehicle& x = vehicles_[i];
    if (t - x.last_lane_change_s < params_.lane_change_cooldown_s) continue;
    std::vector<std::vector<std::size_t>>* lanes = nullptr;
    int n_active = 0;
    std::pair<int, int> required;
    if (x.segment == Segment::Inbound) {
      if (x.granted || x.committed || x.crossed_stop_line) continue;
      if (x.s > geo(x.origin).stop_line - kNoChangeZone_m) continue;
      lanes = &inbound_[index_of(x.origin)];
      n_active = active_lanes_[index_of(x.origin)].first;
      required = required_inbound_lanes(x.origin, arcs(x));
    } else if (x.segment == Segment::Outbound) {
      lanes = &outbound_[index_of(x.destination)];
      n_active = active_lanes_[index_of(x.destination)].second;
      required = {0, n_active - 1};
    } else {
      continue;
    }
    if (n_active <= 1 && x.lane < n_active) continue;

    const VehicleTypeParams& xt = type(x);
    NeighborView view;
    view.speed_mps = x.v;
    view.target_speed_mps = target_speed(x);
    view.own_leader = lane_leader((*lanes)[static_cast<std::size_t>(x.lane)], lane_pos_[i]);
    view.in_required_lane = x.lane >= required.first && x.lane <= required.second;
    view.required_direction = x.lane < required.first    ? LaneChange::ChangeLeft
                              : x.lane > required.second ? LaneChange::ChangeRight
                                                         : LaneChange::Stay;
    auto describe = [&](int k) {
      AdjacentLane adj;
      adj.exists = k >= 0 && k < n_active;
      if (!adj.exists) return adj;
      adj.allowed_by_route = k >= required.first && k <= required.second;
      for (std::size_t j : (*lanes)[static_cast<std::size_t>(k)]) {
        const Vehicle& o = vehicles_[j];
        if (o.s >= x.s) {
          adj.leader = LeaderView{o.s - type(o).length_m - x.s, o.v, type(o).b_emerg, o.id};
        } else {
          adj.lag_gap_m = x.s - xt.length_m - o.s;
          adj.lag_speed_mps = o.v;
          adj.lag_a_norm = type(o).a_norm;
          break;
        }
      }
      return adj;
    };
    view.left = describe(x.lane + 1);
    view.right = describe(x.lane - 1);
    const LaneChange decision = lane_change_decision(view, xt, params_);
    if (decision == LaneChange::Stay) continue;
    x.lane += decision == LaneChange::ChangeLeft ? 1 : -1;
    x.last_lane_change_s = t;
    x.perception.clear();
    x.perception_head = 0;
    ++counters_.lane_changes;
    rebuild_lanes();
  }
}

double Engine::accel_for(const Vehicle& veh, const LeaderView* leader, const PerceptionSample* delayed,
                         DriverState& state) const {
  const VehicleTypeParams& vt = type(veh);
  const double target = target_speed(veh);
  const std::optional<LeaderView> lead = leader ? std::optional<LeaderView>(*leader) : std::nullopt;
  state = classify_state(veh.v, lead, vt, params_);
  double a = 0.0;
  switch (state) {
    case DriverState::FreeDriving: a = free_driving_accel(veh.v, target, vt, params_); break;
    case DriverState::NormalFollowing: {
      PerceptionSample sample{veh.v, leader->speed_mps, leader->gap_m};
      if (delayed && delayed->gap_m > 0.0) sample = *delayed;
      a = std::min(ghr_accel(sample, vt.ghr, vt), free_driving_accel(veh.v, target, vt, params_));
      break;
    }
    case DriverState::EmergencyDeceleration:
      a = emergency_decel(veh.v, *leader, vt, params_.standstill_gap_m);
      break;
  }
  if (leader && state != DriverState::EmergencyDeceleration) {
    const double cap = (safe_speed(*leader, vt.a_norm, params_.standstill_gap_m, params_.dt_s) - veh.v) / params_.dt_s;
    a = std::min(a, cap);
  }
  return std::clamp(a, -vt.b_emerg, vt.a_max);
}

void Engine::compute_accelerations() {
  std::vector<LeaderView> leaders;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    Vehicle& veh = vehicles_[i];
    leaders.clear();
    auto add = [&](const std::optional<LeaderView>& l) {
      if (l) leaders.push_back(*l);
    };
    const ApproachGeo& go = geo(veh.origin);
    switch (veh.segment) {
      case Segment::Inbound: {
        add(lane_leader(inbound_[index_of(veh.origin)][static_cast<std::size_t>(veh.lane)], lane_pos_[i]));
        add(departed_tail(veh.origin, veh.lane, veh.s));
        if (veh.committed || veh.granted) {
          const double x = go.inbound_length - veh.s;
          const double remaining = ring_length(veh) + x;
          add(ring_leader(veh.id, wrap(go.ring_pos - x), remaining));
          add(outbound_lookahead(veh.destination, remaining));
        } else {
          add(LeaderView{go.stop_line - veh.s, 0.0, type(veh).b_emerg, -1 - static_cast<int>(index_of(veh.origin))});
        }
        break;
      }
      case Segment::Ring: {
        const double remaining = ring_length(veh) - veh.s;
        add(ring_leader(veh.id, wrap(go.ring_pos + veh.s), remaining));
        add(outbound_lookahead(veh.destination, remaining));
        break;
      }
      case Segment::Outbound:
        add(lane_leader(outbound_[index_of(veh.destination)][static_cast<std::size_t>(veh.lane)], lane_pos_[i]));
        break;
    }

    const Vehicle::Sample* oldest = nullptr;
    if (veh.perception.size() == perception_len_) oldest = &veh.perception[veh.perception_head];

    double best_a = std::numeric_limits<double>::infinity();
    DriverState best_state = DriverState::FreeDriving;
    const LeaderView* binding = nullptr;
    for (const auto& l : leaders) {
      const PerceptionSample* delayed = (oldest && oldest->has_leader && oldest->leader_id == l.id) ? &oldest->p : nullptr;
      DriverState st;
      const double a = accel_for(veh, &l, delayed, st);
      if (a < best_a) {
        best_a = a;
        best_state = st;
        binding = &l;
      }
    }
    if (!binding) best_a = accel_for(veh, nullptr, nullptr, best_state);
    veh.a = best_a;
    veh.state = best_state;

    Vehicle::Sample sample;
    sample.p.own_speed_mps = veh.v;
    if (binding) {
      sample.has_leader = true;
      sample.leader_id = binding->id;
      sample.p.leader_speed_mps = binding->speed_mps;
      sample.p.gap_m = binding->gap_m;
    }
    if (veh.perception.size() < perception_len_) {
      veh.perception.push_back(sample);
    } else {
      veh.perception[veh.perception_head] = sample;
      veh.perception_head = (veh.perception_head + 1) % perception_len_;
    }
  }
}

void Engine::integrate_and_transfer(const SignalState& signals) {
  const double t0 = time();
  const double dt = params_.dt_s;
  std::vector<bool> done(vehicles_.size(), false);
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    Vehicle& veh = vehicles_[i];
    const double x_prev = route_position(veh);
    const double s_prev = veh.s;
    veh.v = std::max(0.0, veh.v + veh.a * dt);
    veh.s += veh.v * dt;
    if (veh.segment == Segment::Inbound) {
      const ApproachGeo& g = geo(veh.origin);
      if (!veh.crossed_stop_line && s_prev < g.stop_line && veh.s >= g.stop_line) {
        veh.crossed_stop_line = true;
        if (signals[veh.origin] == Signal::Stop) ++counters_.red_violations;
        if (!veh.committed) {
          veh.committed = true;
          veh.granted = true;
          ++sessions_[index_of(veh.origin)].admitted;
          sessions_[index_of(veh.origin)].last_admit_s = t0;
        }
      }
      if (veh.s >= g.inbound_length) {
        departed_[index_of(veh.origin)][static_cast<std::size_t>(veh.lane)] = veh.id;
        veh.segment = Segment::Ring;
        veh.s -= g.inbound_length;
        veh.lane = -1;
        veh.granted = false;
        ++counters_.entries;
      }
    }
    if (veh.segment == Segment::Ring && veh.s >= ring_length(veh)) {
      veh.s -= ring_length(veh);
      veh.segment = Segment::Outbound;
      veh.lane = most_space_outbound_lane(veh.destination);
    }
    if (veh.segment == Segment::Outbound && veh.s >= geo(veh.destination).inbound_length) {
      const Route& route = network_.route(veh.origin, veh.destination);
      const double x_new = route_position(veh);
      const double frac = x_new > x_prev ? (route.length_m - x_prev) / (x_new - x_prev) : 1.0;
      TripRecord trip;
      trip.agent_id = veh.id;
      trip.vtype = veh.kind;
      trip.origin = veh.origin;
      trip.destination = veh.destination;
      trip.entry_time_s = veh.entry_time_s;
      trip.exit_time_s = t0 + dt * std::clamp(frac, 0.0, 1.0);
      trip.distance_m = route.length_m;
      trip.free_flow_s = free_flow_time(network_, route, type(veh));
      trips_.push_back(trip);
      ++counters_.exited;
      done[i] = true;
    }
  }
  std::size_t w = 0;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    if (done[i]) continue;
    if (w != i) vehicles_[w] = std::move(vehicles_[i]);
    ++w;
  }
  vehicles_.resize(w);
}

void Engine::spawn_from_queues() {
  const double t = time();
  while (!pending_.empty() && pending_.front().time_s <= t + kEps * params_.dt_s) {
    queues_[index_of(pending_.front().origin)].push_back(pending_.front());
    pending_.pop_front();
    ++counters_.generated;
  }
  for (Approach o : kAllApproaches) {
    auto& queue = queues_[index_of(o)];
    auto& lanes = inbound_[index_of(o)];
    const ApproachGeo& g = geo(o);
    const int n_active = active_lanes_[index_of(o)].first;
    while (!queue.empty()) {
      const Arrival& ar = queue.front();
      const VehicleTypeParams& vt = catalog_[ar.kind];
      const double target = std::min(vt.v_goal_mps(), g.limit_mps);
      const int n_arcs = static_cast<int>(network_.route(ar.origin, ar.destination).steps.size()) - 2;
      const auto [lo, hi] = required_inbound_lanes(o, n_arcs);

      auto space = [&](int k) {
        const auto& lane = lanes[static_cast<std::size_t>(k)];
        if (lane.empty()) return std::numeric_limits<double>::infinity();
        const Vehicle& last = vehicles_[lane.back()];
        return last.s - type(last).length_m;
      };
      std::vector<int> order;
      for (int k = lo; k <= hi; ++k) order.push_back(k);
      std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return space(x) > space(y); });
      std::vector<int> others;
      for (int k = 0; k < n_active; ++k) {
        if (k < lo || k > hi) others.push_back(k);
      }
      std::stable_sort(others.begin(), others.end(), [&](int x, int y) { return space(x) > space(y); });
      order.insert(order.end(), others.begin(), others.end());

      bool placed = false;
      for (int k : order) {
        const auto& lane = lanes[static_cast<std::size_t>(k)];
        double s = std::min(target * (t - ar.time_s), target * params_.dt_s);
        double v = target;
        if (!lane.empty()) {
          const Vehicle& last = vehicles_[lane.back()];
          LeaderView lead{last.s - type(last).length_m - s, last.v, type(last).b_emerg, last.id};
          const bool fast_ok = lead.gap_m >= params_.standstill_gap_m &&
                               required_decel(v, lead, params_.standstill_gap_m) <= vt.a_norm;
          if (!fast_ok) {
            s = 0.0;
            lead.gap_m = last.s - type(last).length_m;
            if (lead.gap_m < params_.standstill_gap_m) continue;
            v = std::min(target, safe_speed(lead, vt.a_norm, params_.standstill_gap_m, params_.dt_s));
          }
        }
        const LeaderView line{g.stop_line - s, 0.0, vt.b_emerg, -1};
        if (required_decel(v, line, params_.standstill_gap_m) > vt.a_norm) {
          v = std::min(v, safe_speed(line, vt.a_norm, params_.standstill_gap_m, params_.dt_s));
        }
        Vehicle veh;
        veh.id = next_id_++;
        veh.kind = ar.kind;
        veh.origin = ar.origin;
        veh.destination = ar.destination;
        veh.segment = Segment::Inbound;
        veh.lane = k;
        veh.s = s;
        veh.v = v;
        veh.entry_time_s = ar.time_s;
        vehicles_.push_back(std::move(veh));
        index_by_id_.push_back(static_cast<int>(vehicles_.size() - 1));
        lane_pos_.push_back(lanes[static_cast<std::size_t>(k)].size());
        lanes[static_cast<std::size_t>(k)].push_back(vehicles_.size() - 1);
        ++counters_.spawned;
        placed = true;
        break;
      }
      if (!placed) break;
      queue.pop_front();
    }
  }
}

int Engine::add_vehicle(Approach origin, Approach destination, VehicleKind kind, int lane, double s, double v,
                        std::optional<double> entry_time_s) {
  if (origin == destination) throw ConfigError("add_vehicle: origin equals destination");
  const ApproachGeo& g = geo(origin);
  if (lane < 0 || lane >= active_lanes_[index_of(origin)].first) {
    throw ConfigError(fmt::format("add_vehicle: lane {} is not an active inbound lane of {}", lane, to_string(origin)));
  }
  if (s < 0.0 || s >= g.stop_line || v < 0.0) throw ConfigError("add_vehicle: position must lie before the stop line");
  rebuild_lanes();
  const double len = catalog_[kind].length_m;
  for (std::size_t j : inbound_[index_of(origin)][static_cast<std::size_t>(lane)]) {
    const Vehicle& o = vehicles_[j];
    const bool clear = o.s >= s ? o.s - type(o).length_m - s >= 0.0 : s - len - o.s >= 0.0;
    if (!clear) throw ConfigError(fmt::format("add_vehicle: spot overlaps vehicle {}", o.id));
  }
  Vehicle veh;
  veh.id = next_id_++;
  veh.kind = kind;
  veh.origin = origin;
  veh.destination = destination;
  veh.lane = lane;
  veh.s = s;
  veh.v = v;
  veh.entry_time_s = entry_time_s.value_or(time());
  vehicles_.push_back(std::move(veh));
  ++counters_.generated;
  ++counters_.spawned;
  rebuild_lanes();
  return vehicles_.back().id;
}

void Engine::check_invariants() const {
  auto abort = [&](const Vehicle& f, const Vehicle& l, double gap) {
    throw SimulationAbort(
        fmt::format("collision at t={:.1f} s: vehicle {} ({} {}->{}) is {:.3f} m into vehicle {} ({} {}->{})", time(),
                    f.id, to_string(f.kind), to_string(f.origin), to_string(f.destination), -gap, l.id,
                    to_string(l.kind), to_string(l.origin), to_string(l.destination)),
        time());
  };
  auto check_lane = [&](const std::vector<std::size_t>& lane) {
    for (std::size_t p = 1; p < lane.size(); ++p) {
      const Vehicle& l = vehicles_[lane[p - 1]];
      const Vehicle& f = vehicles_[lane[p]];
      const double gap = l.s - type(l).length_m - f.s;
      if (gap < -kEps) abort(f, l, gap);
    }
  };
  for (Approach a : kAllApproaches) {
    const auto& in = inbound_[index_of(a)];
    for (std::size_t k = 0; k < in.size(); ++k) {
      check_lane(in[k]);
      if (in[k].empty()) continue;
      const Vehicle& head = vehicles_[in[k].front()];
      if (const auto tail = departed_tail(a, static_cast<int>(k), head.s); tail && tail->gap_m < -kEps) {
        abort(head, *find(tail->id), tail->gap_m);
      }
    }
    for (const auto& lane : outbound_[index_of(a)]) check_lane(lane);
  }
  for (const auto& e : ring_) {
    if (e.tail || e.tentative) continue;
    const Vehicle& f = vehicles_[e.idx];
    const double remaining = f.segment == Segment::Ring ? ring_length(f) - f.s
                                                        : ring_length(f) + geo(f.origin).inbound_length - f.s;
    if (const auto l = ring_leader(f.id, e.front, remaining); l && l->gap_m < -kEps) abort(f, *find(l->id), l->gap_m);
  }
  const long in_system = static_cast<long>(vehicles_.size() + queued());
  if (counters_.generated != counters_.exited + in_system) {
    throw SimulationAbort(fmt::format("conservation broken at t={:.1f} s: generated {} != exited {} + present {}",
                                      time(), counters_.generated, counters_.exited, in_system),
                          time());
  }
}

void Engine::step() {
  const SignalState signals = signal_state(scheme_, time());
  if (scheme_.lane_redesignation) refresh_lane_config();
  rebuild_lanes();
  build_ring();
  revoke_at_stop(signals);
  build_ring();
  control_entries(signals);
  change_lanes();
  compute_accelerations();
  integrate_and_transfer(signals);
  ++step_index_;
  rebuild_lanes();
  spawn_from_queues();
  rebuild_lanes();
  build_ring();
  check_invariants();
}

void Engine::run_until(double t_end_s) {
  const long last = static_cast<long>(std::llround(t_end_s / params_.dt_s));
  while (step_index_ < last) step();
}

}  // namespace bicutan::kernel
