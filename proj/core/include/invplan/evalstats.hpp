#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace invplan {

// Pearson correlation of two aligned samples. Throws UserError when fewer
// than two pairs are given or either side has zero variance (r undefined).
double pearson(std::span<const double> x, std::span<const double> y);

struct BootstrapCI {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap over resampled pairs; seeded and deterministic.
// Degenerate resamples (zero variance) are skipped.
BootstrapCI bootstrap_pearson_ci(std::span<const double> x,
                                 std::span<const double> y, int resamples,
                                 std::uint64_t seed);

}  // namespace invplan
