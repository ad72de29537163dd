#include "entdim/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace entdim {

namespace {

// Fit over the curve's x = |log t| restricted to used points in [lo, hi).
std::optional<double> partial_slope(const ScalingCurve& c, std::size_t lo, std::size_t hi) {
  std::vector<bool> use(c.abscissa.size(), false);
  std::size_t k = 0;
  for (std::size_t i = lo; i < hi; ++i)
    if (c.used[i]) {
      use[i] = true;
      ++k;
    }
  if (k < 3) return std::nullopt;
  std::vector<double> x(c.abscissa.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::abs(std::log(c.abscissa[i]));
  return least_squares(x, c.values, use).slope;
}

double rms_residual(const ScalingCurve& c) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < c.abscissa.size(); ++i) {
    if (!c.used[i]) continue;
    const double r = c.values[i] - c.fit.intercept - c.fit.slope * std::abs(std::log(c.abscissa[i]));
    s += r * r;
    ++n;
  }
  return n ? std::sqrt(s / static_cast<double>(n)) : 0.0;
}

}  // namespace

void finish_estimate(DimensionEstimate& est, double slope_se, double value_error) {
  const auto& c = est.curve;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < c.used.size(); ++i)
    if (c.used[i]) idx.push_back(i);
  double spread = 0.0;
  est.slope_early = est.slope_late = c.fit.slope;
  if (idx.size() >= 6) {
    const auto mid = idx[idx.size() / 2];
    const auto early = partial_slope(c, 0, mid);
    const auto late = partial_slope(c, mid, c.used.size());
    if (early && late) {
      est.slope_early = *early;
      est.slope_late = *late;
      spread = 0.5 * std::abs(*early - *late);
    }
  }
  double span = 0.0;
  if (!idx.empty())
    span = std::abs(std::log(c.abscissa[idx.back()])) - std::abs(std::log(c.abscissa[idx.front()]));
  const double quad = span > 0.0 ? 2.0 * value_error / span : 0.0;
  est.confidence = 2.0 * slope_se + spread + quad;
  if (idx.size() < 2) {
    est.flagged = true;
    est.note = "fewer than two usable curve points";
  } else if (c.fit.r2 < 0.95 && rms_residual(c) > 0.01) {
    est.flagged = true;
    est.note = "poor linear fit (r2 < 0.95)";
  }
}

DimensionEstimate delta_c_entropy(const MeasurePtr& mu, const Kernel& kernel, const std::vector<double>& ts,
                                  const CurveOptions& options) {
  DimensionEstimate est;
  est.method = "entropy-slope";
  est.curve = entropy_curve(mu, kernel, ts, options);
  est.value = 1.0 - est.curve.fit.slope;
  double err = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (est.curve.used[i]) err = std::max(err, est.curve.value_errors[i]);
  finish_estimate(est, est.curve.fit.slope_stderr, err);
  const auto nflag = std::count(est.curve.flagged.begin(), est.curve.flagged.end(), true);
  if (nflag > 0 && est.note.empty()) est.note = std::to_string(nflag) + " curve point(s) flagged and excluded";
  return est;
}

DimensionEstimate delta_c_fractal(const MeasurePtr& mu, const std::vector<double>& ts, const FractalOptions& options) {
  if (ts.size() < 2) throw std::invalid_argument("fractal route: need at least two t values");
  if (options.samples < 2) throw std::invalid_argument("fractal route: need at least two samples");
  const auto m = ts.size();
  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = std::abs(std::log(ts[i]));

  DimensionEstimate est;
  est.method = "fractal-average";
  auto& curve = est.curve;
  curve.abscissa = ts;
  curve.flagged.assign(m, false);
  curve.window_begin = m - options.drop_largest >= 2 && options.drop_largest < m ? options.drop_largest : 0;
  curve.used.assign(m, false);
  for (std::size_t i = curve.window_begin; i < m; ++i) curve.used[i] = true;

  // Per-draw regression weights over the fit window: slope = sum w_i D(t_i).
  double mx = 0.0, n_used = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (curve.used[i]) {
      mx += x[i];
      n_used += 1.0;
    }
  mx /= n_used;
  double sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (curve.used[i]) sxx += (x[i] - mx) * (x[i] - mx);
  std::vector<double> w(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (curve.used[i]) w[i] = (x[i] - mx) / sxx;

  std::mt19937_64 rng(derive_seed(options.seed, 0xf4ac));
  std::vector<double> sum(m, 0.0), sum2(m, 0.0), d(m);
  double slope_sum = 0.0, slope_sum2 = 0.0;
  std::size_t redraws = 0;
  for (std::size_t j = 0; j < options.samples; ++j) {
    for (int attempt = 0;; ++attempt) {
      const double y = sample(*mu, 1, rng).values.front();
      bool ok = true;
      for (std::size_t i = 0; i < m && ok; ++i) {
        const double mass = interval_mass(*mu, y - 0.5 * ts[i], y + 0.5 * ts[i]).value();
        ok = mass > 0.0;
        d[i] = ok ? -std::log(mass) : 0.0;
      }
      if (ok) break;
      ++redraws;
      if (attempt > 100) throw std::runtime_error("fractal route: sampled points keep landing on zero mass");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum[i] += d[i];
      sum2[i] += d[i] * d[i];
      s += w[i] * d[i];
    }
    slope_sum += s;
    slope_sum2 += s * s;
  }
  const double n = static_cast<double>(options.samples);
  curve.value_errors.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    curve.values.push_back(sum[i] / n);
    const double var = std::max(0.0, sum2[i] / n - curve.values[i] * curve.values[i]);
    curve.value_errors[i] = std::sqrt(var / (n - 1.0));
  }
  curve.fit = least_squares(x, curve.values, curve.used);
  const double mean_slope = slope_sum / n;
  const double slope_var = std::max(0.0, slope_sum2 / n - mean_slope * mean_slope) * n / (n - 1.0);
  est.value = curve.fit.slope;
  // Sampling error from the per-draw slopes (the draws are shared across t,
  // so residuals are not independent noise); the fit's residual error adds
  // the systematic wiggle of the curve itself.
  finish_estimate(est, std::hypot(std::sqrt(slope_var / n), curve.fit.slope_stderr), 0.0);
  if (redraws > 0) est.note = std::to_string(redraws) + " draw(s) hit zero interval mass and were redrawn";
  return est;
}

KernelIndependenceReport kernel_independence_report(const MeasurePtr& mu, const std::vector<Kernel>& kernels,
                                                    const std::vector<double>& ts, const CurveOptions& options) {
  if (kernels.size() < 2) throw std::invalid_argument("kernel independence: need at least two kernels");
  KernelIndependenceReport r;
  for (const auto& k : kernels) {
    r.kernels.push_back(k.name());
    r.estimates.push_back(delta_c_entropy(mu, k, ts, options));
  }
  r.holds = true;
  for (std::size_t i = 0; i < kernels.size(); ++i)
    for (std::size_t j = i + 1; j < kernels.size(); ++j) {
      const double diff = std::abs(r.estimates[i].value - r.estimates[j].value);
      const double conf = r.estimates[i].confidence + r.estimates[j].confidence;
      if (diff > r.max_difference) {
        r.max_difference = diff;
        r.combined_confidence = conf;
      }
      r.holds = r.holds && diff <= conf;
    }
  return r;
}

AffinityReport affinity_report(const std::vector<MixtureComponent>& components, const Kernel& kernel,
                               const std::vector<double>& ts, const CurveOptions& options) {
  AffinityReport r;
  r.mixture = delta_c_entropy(Measure::mixture(components), kernel, ts, options);
  r.lhs = r.mixture.value;
  r.combined_confidence = r.mixture.confidence;
  for (const auto& c : components) {
    r.components.push_back(delta_c_entropy(c.measure, kernel, ts, options));
    r.rhs += c.weight * r.components.back().value;
    r.combined_confidence += c.weight * r.components.back().confidence;
  }
  r.holds = std::abs(r.lhs - r.rhs) <= r.combined_confidence;
  return r;
}

LipschitzReport lipschitz_invariance_report(const MeasurePtr& mu, const MapSpec& map, const Kernel& kernel,
                                            const std::vector<double>& ts, const CurveOptions& options) {
  LipschitzReport r;
  r.base = delta_c_entropy(mu, kernel, ts, options);
  r.pushed = delta_c_entropy(Measure::pushforward(mu, map), kernel, ts, options);
  r.combined_confidence = r.base.confidence + r.pushed.confidence;
  r.holds = std::abs(r.base.value - r.pushed.value) <= r.combined_confidence;
  return r;
}

}  // namespace entdim
