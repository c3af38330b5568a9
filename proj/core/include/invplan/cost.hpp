#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "invplan/errors.hpp"

namespace invplan {

// Action and path costs in fixed-point micro-units (1e-6). Integer sums keep
// optimal costs exact, so the memoized A* planner and the Bellman oracle agree
// bit-for-bit regardless of the order terms are accumulated in.
using Microcost = std::int64_t;

inline constexpr Microcost kMicroScale = 1'000'000;
inline constexpr Microcost kUnreachableCost =
    std::numeric_limits<Microcost>::max();

inline Microcost microcost_from_double(double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1e9) {
    throw SchemaError("cost value out of range: " + std::to_string(v));
  }
  return static_cast<Microcost>(std::llround(v * static_cast<double>(kMicroScale)));
}

inline double microcost_to_double(Microcost c) {
  return static_cast<double>(c) / static_cast<double>(kMicroScale);
}

}  // namespace invplan
