#include "bicutan/schemes.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bicutan/errors.hpp"

namespace bicutan {
namespace {

constexpr std::array<std::string_view, 8> kSchemeNames = {"t0", "t1", "t2", "t3", "t4", "t5", "t3_s15", "t3_s45"};

// Stop B for `half`, then stop C for `half`. Approach A is never signal-controlled.
SignalCycle alternating_stops(double half) {
  return SignalCycle{{SignalPhase{{Approach::B}, half}, SignalPhase{{Approach::C}, half}}};
}

LaneRedesignation t3_lanes(TimeWindow window) {
  return LaneRedesignation{std::string(kRedesignatedLinkId), 1, 3, window};
}

}  // namespace

std::string_view to_string(SchemeId id) { return kSchemeNames[static_cast<std::size_t>(id)]; }

SchemeId parse_scheme_id(std::string_view text) {
  for (std::size_t i = 0; i < kSchemeNames.size(); ++i) {
    if (kSchemeNames[i] == text) return kAllSchemes[i];
  }
  // "t3+15s" spelling is accepted too.
  if (text == "t3+15s") return SchemeId::T3S15;
  if (text == "t3+45s") return SchemeId::T3S45;
  throw ConfigError(fmt::format("unknown scheme id '{}'", text));
}

double SignalCycle::length_s() const {
  double total = 0.0;
  for (const auto& p : phases) total += p.duration_s;
  return total;
}

bool SignalState::all_go() const {
  return std::all_of(approach.begin(), approach.end(), [](Signal s) { return s == Signal::Go; });
}

std::vector<TrafficScheme> scheme_catalog(TimeWindow peak_window) {
  std::vector<TrafficScheme> out;
  out.reserve(kAllSchemes.size());
  for (SchemeId id : kAllSchemes) {
    TrafficScheme s;
    s.id = id;
    switch (id) {
      case SchemeId::T0: break;
      case SchemeId::T1: s.cycle = alternating_stops(30.0); break;
      case SchemeId::T2: s.cycle = alternating_stops(60.0); break;
      case SchemeId::T3: s.lane_redesignation = t3_lanes(peak_window); break;
      case SchemeId::T4:
        s.cycle = alternating_stops(30.0);
        s.lane_redesignation = t3_lanes(peak_window);
        break;
      case SchemeId::T5:
        s.cycle = alternating_stops(60.0);
        s.lane_redesignation = t3_lanes(peak_window);
        break;
      case SchemeId::T3S15:
        s.cycle = alternating_stops(15.0);
        s.lane_redesignation = t3_lanes(peak_window);
        s.stop_duration_s = 15.0;
        break;
      case SchemeId::T3S45:
        s.cycle = alternating_stops(45.0);
        s.lane_redesignation = t3_lanes(peak_window);
        s.stop_duration_s = 45.0;
        break;
    }
    out.push_back(std::move(s));
  }
  return out;
}

TrafficScheme make_scheme(SchemeId id, TimeWindow peak_window) {
  return scheme_catalog(peak_window)[static_cast<std::size_t>(id)];
}

namespace {

// Index of the active phase and the time left in it.
std::pair<std::size_t, double> active_phase(const SignalCycle& cycle, double sim_time_s) {
  const double length = cycle.length_s();
  double pos = std::fmod(sim_time_s, length);
  if (pos < 0.0) pos += length;
  for (std::size_t i = 0; i < cycle.phases.size(); ++i) {
    if (pos < cycle.phases[i].duration_s) return {i, cycle.phases[i].duration_s - pos};
    pos -= cycle.phases[i].duration_s;
  }
  // fmod rounding can land exactly on the cycle length.
  return {0, cycle.phases.front().duration_s};
}

}  // namespace

SignalState signal_state(const TrafficScheme& scheme, double sim_time_s) {
  SignalState state;
  if (!scheme.cycle || scheme.cycle->phases.empty()) return state;
  const auto [phase, left] = active_phase(*scheme.cycle, sim_time_s);
  for (Approach a : scheme.cycle->phases[phase].stopped) state.approach[index_of(a)] = Signal::Stop;
  return state;
}

double time_until_stop(const TrafficScheme& scheme, Approach approach, double sim_time_s) {
  if (!scheme.cycle || scheme.cycle->phases.empty()) return std::numeric_limits<double>::infinity();
  const auto& phases = scheme.cycle->phases;
  auto [phase, left] = active_phase(*scheme.cycle, sim_time_s);
  if (phases[phase].stopped.contains(approach)) return 0.0;
  double waited = left;
  for (std::size_t step = 1; step < phases.size(); ++step) {
    const std::size_t i = (phase + step) % phases.size();
    if (phases[i].stopped.contains(approach)) return waited;
    waited += phases[i].duration_s;
  }
  return std::numeric_limits<double>::infinity();
}

LaneConfig scheme_lane_config(const TrafficScheme& scheme, double sim_time_s) {
  LaneConfig config;
  if (scheme.lane_redesignation && scheme.lane_redesignation->window.contains(sim_time_s)) {
    const auto& r = *scheme.lane_redesignation;
    config.overrides.push_back(LaneOverride{r.link_id, r.lanes_forward, r.lanes_backward});
  }
  return config;
}

}  // namespace bicutan
