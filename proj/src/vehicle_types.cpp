#include "bicutan/vehicle_types.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "bicutan/errors.hpp"

namespace bicutan {

std::string_view to_string(VehicleKind kind) {
  switch (kind) {
    case VehicleKind::Jeepney: return "jeepney";
    case VehicleKind::Bus: return "bus";
    case VehicleKind::Truck: return "truck";
    case VehicleKind::Taxi: return "taxi";
    case VehicleKind::Auv: return "AUV";
    case VehicleKind::Motorcycle: return "motorcycle";
    case VehicleKind::Tricycle: return "tricycle";
    case VehicleKind::Bicycle: return "bicycle";
  }
  return "?";
}

VehicleKind parse_vehicle_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (VehicleKind kind : kAllVehicleKinds) {
    std::string candidate(to_string(kind));
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (candidate == lower) return kind;
  }
  throw DataError(fmt::format("unknown vehicle type '{}'", name));
}

void VehicleTypeParams::validate() const {
  const auto positive = [&](double v, const char* what) {
    if (!(v > 0.0)) throw ConfigError(fmt::format("vehicle type {}: {} must be > 0 (got {})", to_string(kind), what, v));
  };
  positive(length_m, "length_m");
  positive(a_max, "a_max");
  positive(a_norm, "a_norm");
  positive(b_emerg, "b_emerg");
  positive(v_goal_kph, "v_goal_kph");
  positive(reaction_time_s, "reaction_time_s");
  positive(ghr.c_acc, "ghr.c_acc");
  positive(ghr.c_dec, "ghr.c_dec");
  positive(critical_gap_s, "critical_gap_s");
  positive(follow_up_s, "follow_up_s");
  if (ghr.l_exp < 0.0) throw ConfigError(fmt::format("vehicle type {}: ghr.l_exp must be >= 0", to_string(kind)));
  if (b_emerg < a_norm) {
    throw ConfigError(fmt::format("vehicle type {}: b_emerg ({}) must be >= a_norm ({})", to_string(kind), b_emerg, a_norm));
  }
}

namespace {

VehicleTypeParams make(VehicleKind kind, double length, double a_max, double a_norm, double b_emerg, double v_goal) {
  VehicleTypeParams p;
  p.kind = kind;
  p.length_m = length;
  p.a_max = a_max;
  p.a_norm = a_norm;
  p.b_emerg = b_emerg;
  p.v_goal_kph = v_goal;
  return p;
}

}  // namespace

VehicleCatalog::VehicleCatalog()
    : params_{make(VehicleKind::Jeepney, 7, 1.5, 2.0, 4.0, 40),    make(VehicleKind::Bus, 12, 1.0, 1.5, 3.5, 40),
              make(VehicleKind::Truck, 10, 0.8, 1.5, 3.5, 35),     make(VehicleKind::Taxi, 5, 2.0, 2.5, 5.0, 50),
              make(VehicleKind::Auv, 5, 2.0, 2.5, 5.0, 50),        make(VehicleKind::Motorcycle, 2, 2.5, 3.0, 6.0, 50),
              make(VehicleKind::Tricycle, 3, 1.0, 2.0, 4.0, 25),   make(VehicleKind::Bicycle, 2, 0.8, 1.5, 3.0, 15)} {}

VehicleCatalog::VehicleCatalog(std::array<VehicleTypeParams, 8> params) : params_(std::move(params)) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].kind != kAllVehicleKinds[i]) {
      throw ConfigError(fmt::format("vehicle catalog slot {} holds {}, expected {}", i, to_string(params_[i].kind),
                                    to_string(kAllVehicleKinds[i])));
    }
    params_[i].validate();
  }
}

}  // namespace bicutan
