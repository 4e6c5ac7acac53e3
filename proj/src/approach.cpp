#include "bicutan/approach.hpp"

#include <fmt/format.h>

#include "bicutan/errors.hpp"

namespace bicutan {

std::string_view to_string(Approach a) {
  switch (a) {
    case Approach::A: return "A";
    case Approach::B: return "B";
    case Approach::C: return "C";
  }
  return "?";
}

Approach parse_approach(std::string_view label) {
  if (label == "A" || label == "a") return Approach::A;
  if (label == "B" || label == "b") return Approach::B;
  if (label == "C" || label == "c") return Approach::C;
  throw DataError(fmt::format("unknown point label '{}' (expected A, B or C)", label));
}

}  // namespace bicutan
