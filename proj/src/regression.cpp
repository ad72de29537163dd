#include "entdim/regression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace entdim {

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y, const std::vector<bool>& use) {
  if (x.size() != y.size()) throw std::invalid_argument("least_squares: x and y differ in length");
  if (!use.empty() && use.size() != x.size()) throw std::invalid_argument("least_squares: mask length mismatch");
  auto selected = [&](std::size_t i) { return use.empty() || use[i]; };

  double n = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!selected(i)) continue;
    n += 1.0;
    mx += x[i];
    my += y[i];
  }
  if (n < 2.0) throw std::invalid_argument("least_squares: need at least two points");
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!selected(i)) continue;
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("least_squares: abscissae are all equal");

  LinearFit fit;
  fit.points = static_cast<std::size_t>(n);
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!selected(i)) continue;
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    sse += r * r;
  }
  // A perfectly flat series is perfectly explained by its (zero) slope.
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.slope_stderr = n > 2.0 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return fit;
}

std::vector<double> geometric_grid(double first, double last, std::size_t points) {
  if (!(first > 0.0) || !(last > 0.0)) throw std::invalid_argument("geometric_grid: endpoints must be positive");
  if (points < 2) throw std::invalid_argument("geometric_grid: need at least two points");
  std::vector<double> g(points);
  const double ratio = std::log(last / first) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = first * std::exp(ratio * static_cast<double>(i));
  g.front() = first;
  g.back() = last;
  return g;
}

std::uint64_t derive_seed(std::uint64_t global, std::uint64_t index) {
  std::uint64_t z = global + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace entdim
