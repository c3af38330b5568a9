#include "invplan/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "invplan/errors.hpp"

namespace invplan {

namespace {

// Returns NaN instead of throwing; shared by pearson() and the bootstrap.
double pearson_or_nan(std::span<const double> x, std::span<const double> y) {
  std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nan("");
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw UserError("pearson: sample sizes differ");
  }
  if (x.size() < 2) {
    throw UserError("pearson: need at least two rating pairs");
  }
  double r = pearson_or_nan(x, y);
  if (std::isnan(r)) {
    throw UserError(
        "pearson: undefined correlation (a rating column has zero variance)");
  }
  return r;
}

BootstrapCI bootstrap_pearson_ci(std::span<const double> x,
                                 std::span<const double> y, int resamples,
                                 std::uint64_t seed) {
  (void)pearson(x, y);  // surface degenerate inputs up front
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::vector<double> rs;
  rs.reserve(static_cast<std::size_t>(resamples));
  std::vector<double> bx(x.size()), by(y.size());
  int attempts_left = resamples * 2;  // degenerate resamples are skipped
  while (static_cast<int>(rs.size()) < resamples && attempts_left-- > 0) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::size_t j = pick(rng);
      bx[i] = x[j];
      by[i] = y[j];
    }
    double r = pearson_or_nan(bx, by);
    if (!std::isnan(r)) rs.push_back(r);
  }
  if (rs.empty()) {
    throw UserError("bootstrap: every resample was degenerate");
  }
  std::sort(rs.begin(), rs.end());
  auto quantile = [&](double q) {
    double pos = q * (static_cast<double>(rs.size()) - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, rs.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return rs[lo] * (1 - frac) + rs[hi] * frac;
  };
  return {quantile(0.025), quantile(0.975)};
}

}  // namespace invplan
