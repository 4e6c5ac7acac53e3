#pragma once

#include <string>
#include <vector>

namespace bicutan {

struct LaneOverride {
  std::string link_id;
  int lanes_forward = 0;
  int lanes_backward = 0;

  friend bool operator==(const LaneOverride&, const LaneOverride&) = default;
};

/// Per-link lane-direction overrides in force at one instant. Links without an
/// override keep their physical defaults.
struct LaneConfig {
  std::vector<LaneOverride> overrides;

  const LaneOverride* find(const std::string& link_id) const {
    for (const auto& o : overrides) {
      if (o.link_id == link_id) return &o;
    }
    return nullptr;
  }
  friend bool operator==(const LaneConfig&, const LaneConfig&) = default;
};

}  // namespace bicutan
