#include "entdim/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace entdim {

namespace {

// Kronrod 15-point abscissae on [-1, 1] (non-negative half) and weights;
// the odd-indexed abscissae are the 7 Gauss points.
constexpr double kXk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Gk15 {
  double kronrod;
  double gauss;
};

Gk15 gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = kWk[7] * fc;
  double g = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXk[j];
    const double s = f(c - dx) + f(c + dx);
    k += kWk[j] * s;
    if (j % 2 == 1) g += kWg[j / 2] * s;
  }
  return {k * h, g * h};
}

void adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth,
           QuadratureResult& acc) {
  const auto r = gk15(f, a, b);
  acc.evaluations += 15;
  const double err = std::abs(r.kronrod - r.gauss);
  if (err <= tol || depth <= 0 || !std::isfinite(err)) {
    acc.value += r.kronrod;
    acc.error += err;
    return;
  }
  const double m = 0.5 * (a + b);
  adapt(f, a, m, 0.5 * tol, depth - 1, acc);
  adapt(f, m, b, 0.5 * tol, depth - 1, acc);
}

}  // namespace

std::vector<Interval> make_panels(const std::vector<Interval>& region, const std::vector<double>& breakpoints,
                                  double max_width) {
  std::vector<Interval> panels;
  std::vector<double> cuts;
  for (const auto& iv : region) {
    if (!(iv.hi > iv.lo)) continue;
    cuts.clear();
    cuts.push_back(iv.lo);
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), iv.lo);
    for (; it != breakpoints.end() && *it < iv.hi; ++it) cuts.push_back(*it);
    cuts.push_back(iv.hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      if (!(b > a)) continue;
      const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / max_width)));
      const double h = (b - a) / static_cast<double>(pieces);
      for (std::size_t k = 0; k < pieces; ++k) {
        const double lo = a + h * static_cast<double>(k);
        const double hi = k + 1 == pieces ? b : lo + h;
        panels.push_back({lo, hi});
      }
    }
  }
  return panels;
}

QuadratureResult integrate(const std::vector<Interval>& panels, const std::function<double(double)>& f,
                           double abs_tol, int max_depth) {
  double total = 0.0;
  for (const auto& p : panels) total += p.width();
  QuadratureResult acc;
  if (total <= 0.0) return acc;
  for (const auto& p : panels) adapt(f, p.lo, p.hi, abs_tol * p.width() / total, max_depth, acc);
  return acc;
}

void for_each_node(const std::vector<Interval>& panels, const std::function<void(double, double)>& visit) {
  for (const auto& p : panels) {
    const double c = 0.5 * (p.lo + p.hi);
    const double h = 0.5 * (p.hi - p.lo);
    visit(c, h * kWk[7]);
    for (int j = 0; j < 7; ++j) {
      visit(c - h * kXk[j], h * kWk[j]);
      visit(c + h * kXk[j], h * kWk[j]);
    }
  }
}

}  // namespace entdim
