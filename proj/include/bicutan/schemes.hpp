#pragma once

#include <array>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bicutan/approach.hpp"
#include "bicutan/lane_config.hpp"

namespace bicutan {

enum class SchemeId { T0, T1, T2, T3, T4, T5, T3S15, T3S45 };

inline constexpr std::array<SchemeId, 8> kAllSchemes = {SchemeId::T0, SchemeId::T1, SchemeId::T2,    SchemeId::T3,
                                                        SchemeId::T4, SchemeId::T5, SchemeId::T3S15, SchemeId::T3S45};

/// "t0".."t5", "t3_s15", "t3_s45".
std::string_view to_string(SchemeId id);
/// Throws ConfigError for unknown ids.
SchemeId parse_scheme_id(std::string_view text);

/// One signal phase: the set of approaches held at Stop for `duration_s`.
struct SignalPhase {
  std::set<Approach> stopped;
  double duration_s = 0.0;

  friend bool operator==(const SignalPhase&, const SignalPhase&) = default;
};

struct SignalCycle {
  std::vector<SignalPhase> phases;

  double length_s() const;
  friend bool operator==(const SignalCycle&, const SignalCycle&) = default;
};

/// Half-open simulation-time window [start_s, end_s).
struct TimeWindow {
  double start_s = 0.0;
  double end_s = std::numeric_limits<double>::infinity();

  bool contains(double t) const { return t >= start_s && t < end_s; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Reversal of lanes on one link for a time window.
struct LaneRedesignation {
  std::string link_id;
  int lanes_forward = 1;
  int lanes_backward = 3;
  TimeWindow window;

  friend bool operator==(const LaneRedesignation&, const LaneRedesignation&) = default;
};

struct TrafficScheme {
  SchemeId id = SchemeId::T0;
  std::optional<SignalCycle> cycle;
  std::optional<LaneRedesignation> lane_redesignation;
  std::optional<double> stop_duration_s;  // signalized t3 variants only

  friend bool operator==(const TrafficScheme&, const TrafficScheme&) = default;
};

enum class Signal { Go, Stop };

struct SignalState {
  std::array<Signal, 3> approach{Signal::Go, Signal::Go, Signal::Go};

  Signal operator[](Approach a) const { return approach[index_of(a)]; }
  bool all_go() const;
  friend bool operator==(const SignalState&, const SignalState&) = default;
};

/// The PNR approach link carries the PNR-PNCC corridor whose lanes t3 re-designates.
inline constexpr std::string_view kRedesignatedLinkId = "A";

/// All eight schemes. `peak_window` bounds the t3-family lane re-designation.
std::vector<TrafficScheme> scheme_catalog(TimeWindow peak_window = {});
/// Convenience lookup into scheme_catalog(peak_window).
TrafficScheme make_scheme(SchemeId id, TimeWindow peak_window = {});

/// Signal state of every approach at `sim_time_s` (>= 0).
SignalState signal_state(const TrafficScheme& scheme, double sim_time_s);

/// Seconds from `sim_time_s` until `approach` next turns Stop; +inf when it never does.
/// Zero when it is already at Stop.
double time_until_stop(const TrafficScheme& scheme, Approach approach, double sim_time_s);

/// Lane overrides the scheme imposes at `sim_time_s`; empty outside the
/// re-designation window. Resolve against a network with active_lane_config.
LaneConfig scheme_lane_config(const TrafficScheme& scheme, double sim_time_s);

}  // namespace bicutan
