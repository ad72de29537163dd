#include "entdim/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "entdim/quadrature.hpp"

namespace entdim {

namespace {

double plogp(double p) { return p > kDensityFloor ? p * std::log(p) : 0.0; }

// Lebesgue density of an absolutely continuous measure; empty when the
// measure has an atomic or singular part.
bool absolutely_continuous(const Measure& mu) {
  if (mu.as<GridDensity>()) return true;
  if (const auto* mix = mu.as<Mixture>())
    return std::all_of(mix->components.begin(), mix->components.end(),
                       [](const auto& c) { return c.weight == 0.0 || absolutely_continuous(*c.measure); });
  if (const auto* pf = mu.as<LipschitzPushforward>()) return absolutely_continuous(*pf->base);
  return false;
}

double ac_density(const Measure& mu, double x) {
  if (const auto* g = mu.as<GridDensity>()) return g->density(x);
  if (const auto* mix = mu.as<Mixture>()) {
    double s = 0.0;
    for (const auto& c : mix->components)
      if (c.weight > 0.0) s += c.weight * ac_density(*c.measure, x);
    return s;
  }
  const auto& pf = std::get<LipschitzPushforward>(mu.payload());
  const double y = pf.map.inverse(x);
  return ac_density(*pf.base, y) / std::abs(pf.map.derivative(y));
}

}  // namespace

EntropyResult entropy(const SmoothedDensity& sd, const EntropyOptions& options) {
  EntropyResult out;
  out.method = sd.method();
  const auto panels = sd.panels();
  const auto q = integrate(panels, [&](double x) { return plogp(sd.density_at(x).value); }, options.abs_tol,
                           sd.refine_depth());
  out.value = q.value;
  out.error = q.error;

  if (sd.method() == Method::monte_carlo) {
    // First-order propagation of the pointwise density noise.
    double noise = 0.0;
    for_each_node(panels, [&](double x, double w) {
      const auto v = sd.density_at(x);
      if (v.value > kDensityFloor) noise += w * std::abs(1.0 + std::log(v.value)) * v.std_error;
      if (v.low_confidence) out.low_confidence_mass += w * v.value;
    });
    out.error += noise;
  }

  if (options.check_samples > 1) {
    std::mt19937_64 rng(derive_seed(sd.options().seed, 0xe47));
    const auto draws = sd.sample_smoothed(options.check_samples, rng);
    double sum = 0.0, sum2 = 0.0, largest = 0.0;
    std::size_t n = 0;
    for (double z : draws) {
      const double p = sd.density_at(z).value;
      if (!(p > kDensityFloor)) continue;
      const double l = std::log(p);
      sum += l;
      sum2 += l * l;
      largest = std::max(largest, std::abs(l));
      ++n;
    }
    if (n > 1) {
      const double m = sum / static_cast<double>(n);
      const double var = std::max(0.0, (sum2 / static_cast<double>(n) - m * m) * static_cast<double>(n) /
                                           static_cast<double>(n - 1));
      out.mc_value = m;
      out.mc_stderr = std::sqrt(var / static_cast<double>(n));
      out.cross_checked = true;
      // Regions of mass below ~3/n may go unsampled altogether (the sample
      // variance cannot see them), so the error is floored accordingly.
      const double unseen = 3.0 * (1.0 + largest) / static_cast<double>(n);
      const double combined = std::hypot(std::max(out.mc_stderr, unseen), out.error);
      out.flagged = std::abs(out.mc_value - out.value) > options.flag_sigmas * combined + 1e-9 * (1.0 + std::abs(out.value));
    }
  }
  return out;
}

void fit_curve(ScalingCurve& curve, std::size_t drop_largest) {
  const auto n = curve.abscissa.size();
  curve.window_begin = std::min(drop_largest, n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::abs(std::log(curve.abscissa[i]));
  auto mask = [&](std::size_t begin) {
    std::vector<bool> use(n, false);
    for (std::size_t i = begin; i < n; ++i) use[i] = curve.flagged.empty() || !curve.flagged[i];
    return use;
  };
  curve.used = mask(curve.window_begin);
  if (std::count(curve.used.begin(), curve.used.end(), true) < 2) {
    curve.window_begin = 0;
    curve.used = mask(0);
  }
  if (std::count(curve.used.begin(), curve.used.end(), true) < 2) {
    curve.fit = LinearFit{};
    return;
  }
  curve.fit = least_squares(x, curve.values, curve.used);
}

std::vector<double> t_grid(double tmin, double tmax, std::size_t points) {
  if (!(tmin > 0.0) || !(tmax > tmin)) throw std::invalid_argument("grid: need 0 < min < max");
  return geometric_grid(tmax, tmin, points);
}

std::vector<double> default_entropy_grid() { return t_grid(1e-4, 1e-1, 25); }

ScalingCurve entropy_curve(const MeasurePtr& mu, const Kernel& kernel, const std::vector<double>& ts,
                           const CurveOptions& options) {
  for (std::size_t i = 0; i + 1 < ts.size(); ++i)
    if (!(ts[i] > ts[i + 1])) throw std::invalid_argument("entropy curve: t-grid must be strictly decreasing");
  ScalingCurve curve;
  curve.abscissa = ts;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    auto opt = options.entropy;
    opt.smoothing.seed = derive_seed(options.entropy.smoothing.seed, i);
    const SmoothedDensity sd(mu, kernel, ts[i], opt.smoothing);
    const auto h = entropy(sd, opt);
    curve.values.push_back(h.value);
    curve.value_errors.push_back(h.error);
    curve.flagged.push_back(h.flagged);
  }
  fit_curve(curve, options.drop_largest);
  return curve;
}

std::optional<double> entropy_unsmoothed(const Measure& mu) {
  if (!absolutely_continuous(mu)) return std::nullopt;
  const auto box = support_bounds(mu);
  const auto panels = make_panels({box}, singular_points(mu), std::max(box.width() / 256.0, 1e-300));
  return integrate(panels, [&](double x) { return plogp(ac_density(mu, x)); }, 1e-12, 12).value;
}

double entropy_upper_bound(const Kernel& kernel, double t) { return kernel.entropy() - std::log(t); }

double entropy_lower_bound(const Measure& mu, const Kernel& kernel) {
  const double m = expectation(mu, [](double x) { return std::log1p(std::abs(x)); });
  return -std::log(2.0) - 2.0 * m - 2.0 * kernel.log_moment();
}

EpiCheck epi_check(const MeasurePtr& mu, const Kernel& kernel, double t, const EntropyOptions& options) {
  EpiCheck c;
  const auto h = entropy(SmoothedDensity(mu, kernel, t, options.smoothing), options);
  c.h_mu_t = h.value;
  c.h_nu_t = entropy_upper_bound(kernel, t);
  const auto h_mu = entropy_unsmoothed(*mu);
  if (!h_mu) {
    c.singular = true;
    c.h_mu = INFINITY;
    c.lhs = c.h_mu_t;
    c.rhs = c.h_nu_t;
    c.tolerance = 5.0 * h.error + 1e-9 * (1.0 + std::abs(c.rhs));
    c.holds = c.lhs <= c.rhs + c.tolerance;
    return c;
  }
  c.h_mu = *h_mu;
  c.lhs = std::exp(-2.0 * c.h_mu_t);
  c.rhs = std::exp(-2.0 * c.h_mu) + std::exp(-2.0 * c.h_nu_t);
  c.tolerance = 2.0 * c.lhs * 5.0 * h.error + 1e-9 * c.rhs;
  c.holds = c.lhs >= c.rhs - c.tolerance;
  return c;
}

AffinityGap affinity_gap(const std::vector<MixtureComponent>& components, const Kernel& kernel, double t,
                         const EntropyOptions& options) {
  if (components.empty()) throw std::invalid_argument("affinity gap: no components");
  AffinityGap g;
  const auto mix = Measure::mixture(components);
  const auto hm = entropy(SmoothedDensity(mix, kernel, t, options.smoothing), options);
  g.mixture_entropy = hm.value;
  g.error = hm.error;
  double weighted = 0.0;
  for (const auto& c : components) {
    const auto hc = entropy(SmoothedDensity(c.measure, kernel, t, options.smoothing), options);
    g.component_entropies.push_back(hc.value);
    weighted += c.weight * hc.value;
    g.error += c.weight * hc.error;
    if (c.weight > 0.0) g.lower += c.weight * std::log(c.weight);
  }
  g.gap = g.mixture_entropy - weighted;
  g.cross = g.gap - g.lower;
  g.upper = static_cast<double>(components.size() - 1) + g.lower;
  return g;
}

}  // namespace entdim
