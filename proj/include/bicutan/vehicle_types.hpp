#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace bicutan {

enum class VehicleKind { Jeepney, Bus, Truck, Taxi, Auv, Motorcycle, Tricycle, Bicycle };

inline constexpr std::array<VehicleKind, 8> kAllVehicleKinds = {
    VehicleKind::Jeepney, VehicleKind::Bus,        VehicleKind::Truck,    VehicleKind::Taxi,
    VehicleKind::Auv,     VehicleKind::Motorcycle, VehicleKind::Tricycle, VehicleKind::Bicycle};

/// Canonical lowercase names: jeepney, bus, truck, taxi, AUV, motorcycle, tricycle, bicycle.
std::string_view to_string(VehicleKind kind);
/// Case-insensitive; throws DataError for names outside the eight known types.
VehicleKind parse_vehicle_kind(std::string_view name);

/// Stimulus-response sensitivities: a = c * v^m_exp * dv / dx^l_exp, with c = c_acc
/// when the leader is pulling away (dv > 0) and c_dec when closing in (dv < 0).
struct GhrParams {
  double c_acc = 0.6;
  double c_dec = 1.0;
  double m_exp = 0.0;
  double l_exp = 1.0;

  friend bool operator==(const GhrParams&, const GhrParams&) = default;
};

struct VehicleTypeParams {
  VehicleKind kind = VehicleKind::Jeepney;
  double length_m = 7.0;
  double a_max = 1.5;          // m/s^2
  double a_norm = 2.0;         // normal deceleration, m/s^2, positive
  double b_emerg = 4.0;        // emergency deceleration, m/s^2, positive
  double v_goal_kph = 40.0;
  double reaction_time_s = 1.0;
  GhrParams ghr;
  double critical_gap_s = 3.5;
  double follow_up_s = 2.5;

  double v_goal_mps() const { return v_goal_kph / 3.6; }

  /// Throws ConfigError when any parameter is non-positive or b_emerg < a_norm.
  void validate() const;

  friend bool operator==(const VehicleTypeParams&, const VehicleTypeParams&) = default;
};

/// Per-type parameters for the eight vehicle kinds, indexable by VehicleKind.
class VehicleCatalog {
 public:
  VehicleCatalog();  // repository defaults
  explicit VehicleCatalog(std::array<VehicleTypeParams, 8> params);

  const VehicleTypeParams& operator[](VehicleKind kind) const { return params_[static_cast<std::size_t>(kind)]; }
  VehicleTypeParams& operator[](VehicleKind kind) { return params_[static_cast<std::size_t>(kind)]; }
  const std::array<VehicleTypeParams, 8>& all() const { return params_; }

  friend bool operator==(const VehicleCatalog&, const VehicleCatalog&) = default;

 private:
  std::array<VehicleTypeParams, 8> params_;
};

inline double kph_to_mps(double kph) { return kph / 3.6; }
inline double mps_to_kph(double mps) { return mps * 3.6; }

}  // namespace bicutan
