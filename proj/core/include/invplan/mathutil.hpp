#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace invplan {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double logsumexp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;  // all -inf (or empty)
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

inline double logsumexp(const std::vector<double>& xs) {
  return logsumexp(std::span<const double>(xs));
}

}  // namespace invplan
