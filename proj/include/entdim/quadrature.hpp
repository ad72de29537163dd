#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "entdim/measure.hpp"

namespace entdim {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

/// Splits each region interval at the breakpoints it contains, then into
/// equal pieces no wider than `max_width`.
std::vector<Interval> make_panels(const std::vector<Interval>& region, const std::vector<double>& breakpoints,
                                  double max_width);

/// Adaptive Gauss-Kronrod (7/15) over the panels. A panel is bisected while
/// its |K15 - G7| exceeds its width-proportional share of `abs_tol`, at most
/// `max_depth` times.
QuadratureResult integrate(const std::vector<Interval>& panels, const std::function<double(double)>& f,
                           double abs_tol = 1e-12, int max_depth = 8);

/// Calls visit(x, w) for every Kronrod node of every panel; sum w*f(x)
/// is the non-adaptive K15 rule.
void for_each_node(const std::vector<Interval>& panels, const std::function<void(double, double)>& visit);

}  // namespace entdim
