#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace bicutan {

/// The three observation points of the roundabout: A = PNR, B = PNCC, C = DOST.
enum class Approach { A, B, C };

inline constexpr std::array<Approach, 3> kAllApproaches = {Approach::A, Approach::B, Approach::C};

inline constexpr std::size_t index_of(Approach a) { return static_cast<std::size_t>(a); }

std::string_view to_string(Approach a);
/// Accepts "A", "B", "C" (case-insensitive); throws DataError otherwise.
Approach parse_approach(std::string_view label);

}  // namespace bicutan
