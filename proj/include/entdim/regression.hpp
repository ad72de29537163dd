#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace entdim {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of y on x over the points with use[i] set
/// (all points when `use` is empty). Needs at least two distinct x.
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<bool>& use = {});

/// Geometric grid from `first` to `last` inclusive (either order).
std::vector<double> geometric_grid(double first, double last, std::size_t points);

/// Per-task seed derived from a global seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t global, std::uint64_t index);

}  // namespace entdim
