#include "entdim/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "entdim/quadrature.hpp"

namespace entdim {

// ---------------------------------------------------------------------------
// Test function bases

TestFunctionBasis TestFunctionBasis::hermite(std::size_t m, double center, double scale, double kappa) {
  if (!(scale > 0.0) || !(kappa > 0.0)) throw std::invalid_argument("hermite basis: scale and window must be positive");
  TestFunctionBasis basis;
  const double ik2 = 1.0 / (kappa * kappa);
  for (std::size_t k = 0; k < m; ++k) {
    basis.add("hermite" + std::to_string(k), [=](double x) {
      const double u = (x - center) / scale;
      // Normalised He_j / sqrt(j!) up to j = k, by the three-term recurrence.
      double h0 = 1.0, h1 = u, hkm2 = 0.0, hkm1 = 0.0, hk = 1.0;
      if (k >= 1) {
        hkm1 = h0;
        hk = h1;
      }
      for (std::size_t j = 2; j <= k; ++j) {
        const double next = (u * hk - std::sqrt(static_cast<double>(j - 1)) * hkm1) / std::sqrt(static_cast<double>(j));
        hkm2 = hkm1;
        hkm1 = hk;
        hk = next;
      }
      // d/du He_k/sqrt(k!) = sqrt(k) He_{k-1}/sqrt((k-1)!)
      const double kk = static_cast<double>(k);
      const double dh = k >= 1 ? std::sqrt(kk) * hkm1 : 0.0;
      const double d2h = k >= 2 ? std::sqrt(kk * (kk - 1.0)) * hkm2 : 0.0;
      const double w = std::exp(-0.5 * u * u * ik2);
      const double dw = -u * ik2;
      const double d2w = u * u * ik2 * ik2 - ik2;
      FunctionJet j;
      j.f = hk * w;
      j.df = (dh + dw * hk) * w / scale;
      j.d2f = (d2h + 2.0 * dw * dh + d2w * hk) * w / (scale * scale);
      return j;
    });
  }
  return basis;
}

TestFunctionBasis TestFunctionBasis::quadratic() {
  TestFunctionBasis basis;
  basis.add("x^2/2", [](double x) { return FunctionJet{0.5 * x * x, x, 1.0}; });
  return basis;
}

void TestFunctionBasis::add(std::string name, Element e) {
  names_.push_back(std::move(name));
  elements_.push_back(std::move(e));
}

void TestFunctionBasis::add_log_density(const SmoothedDensity& sd) {
  if (!sd.kernel().is_gaussian()) throw std::invalid_argument("basis: log density needs a Gaussian kernel");
  const auto* d = &sd;
  add("log_p", [d](double x) {
    const auto j = d->jet(x);
    if (!(j.p > kDensityFloor)) return FunctionJet{};
    const double s = j.dp / j.p;
    return FunctionJet{std::log(j.p), s, j.d2p / j.p - s * s};
  });
}

TestFunctionBasis TestFunctionBasis::prefix(std::size_t k) const {
  TestFunctionBasis out;
  for (std::size_t i = 0; i < std::min(k, size()); ++i) out.add(names_[i], elements_[i]);
  return out;
}

TestFunctionBasis make_basis(const BasisSpec& spec, const SmoothedDensity& sd) {
  TestFunctionBasis basis;
  if (spec.hermite > 0) {
    const auto box = support_bounds(sd.measure());
    const double pad = 8.0 * sd.t();
    const double lo = box.lo - pad, hi = box.hi + pad;
    basis = TestFunctionBasis::hermite(spec.hermite, 0.5 * (lo + hi), (hi - lo) / 16.0, 4.0);
  }
  if (spec.quadratic) basis.add("x^2/2", [](double x) { return FunctionJet{0.5 * x * x, x, 1.0}; });
  if (spec.log_density) basis.add_log_density(sd);
  return basis;
}

BasisMoments basis_moments(const SmoothedDensity& sd, const TestFunctionBasis& basis,
                           const std::function<double(double)>& g) {
  const auto m = static_cast<Eigen::Index>(basis.size());
  BasisMoments out;
  out.b = Eigen::VectorXd::Zero(m);
  out.A = Eigen::MatrixXd::Zero(m, m);
  out.C = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd d1(m), d2(m);
  for_each_node(make_panels(sd.panels(), {}, 0.25 * sd.panel_width()), [&](double x, double w) {
    const double p = sd.jet(x).p;
    if (!(p > kDensityFloor)) return;
    const double wp = w * p;
    out.mass += wp;
    if (m == 0) return;
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto j = basis(static_cast<std::size_t>(i), x);
      d1[i] = j.df;
      d2[i] = j.d2f;
    }
    out.b += (g ? wp * g(x) : wp) * d2;
    out.A.selfadjointView<Eigen::Lower>().rankUpdate(d1, wp);
    out.C.selfadjointView<Eigen::Lower>().rankUpdate(d2, wp);
  });
  out.A = out.A.selfadjointView<Eigen::Lower>();
  out.C = out.C.selfadjointView<Eigen::Lower>();
  if (out.mass > 0.0) {
    out.b /= out.mass;
    out.A /= out.mass;
    out.C /= out.mass;
  }
  return out;
}

Eigen::MatrixXd whitening(const Eigen::MatrixXd& A, double cutoff) {
  const Eigen::Index m = A.rows();
  if (m == 0) return Eigen::MatrixXd(0, 0);
  // Gram-Schmidt in the A inner product, element by element, so a basis
  // prefix always keeps a subspace of what the full basis keeps.
  std::vector<Eigen::VectorXd> kept;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(A(i, i) > 0.0)) continue;
    Eigen::VectorXd v = Eigen::VectorXd::Unit(m, i) / std::sqrt(A(i, i));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : kept) v -= q.dot(A * v) * q;
    const double r2 = v.dot(A * v);
    if (r2 > cutoff) kept.push_back(v / std::sqrt(r2));
  }
  Eigen::MatrixXd W(m, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) W.col(static_cast<Eigen::Index>(k)) = kept[k];
  return W;
}

// ---------------------------------------------------------------------------
// Fisher information

namespace {

SmoothedDensity heat(const MeasurePtr& mu, double s, const SmoothingOptions& options) {
  if (!(s > 0.0)) throw std::invalid_argument("fisher: s must be positive");
  return SmoothedDensity(mu, Kernel::gaussian(), std::sqrt(s), options);
}

}  // namespace

FisherResult fisher_direct(const MeasurePtr& mu, double s, const SmoothingOptions& options) {
  const auto sd = heat(mu, s, options);
  FisherResult out;
  out.method = sd.method();
  const bool noisy = sd.method() == Method::monte_carlo;
  const auto panels = sd.panels();
  const auto q = integrate(
      panels,
      [&](double x) {
        const auto j = sd.jet(x);
        if (!(j.p > kDensityFloor)) return 0.0;
        if (noisy && j.std_error > options.mc_se_ceiling * j.p) return 0.0;
        return j.dp * j.dp / j.p;
      },
      1e-10 / s, sd.refine_depth());
  out.value = q.value;
  out.error = q.error;
  if (noisy) {
    for_each_node(panels, [&](double x, double w) {
      const auto j = sd.jet(x);
      if (j.p > kDensityFloor && j.std_error > options.mc_se_ceiling * j.p) out.coverage_deficit += w * j.p;
    });
  }
  out.bound_violation = out.value < -out.error || out.value > (1.0 + 1e-6) / s + out.error;
  return out;
}

FisherResult fisher_monte_carlo(const MeasurePtr& mu, double s, std::size_t samples, std::uint64_t seed,
                                const SmoothingOptions& options) {
  if (samples < 2) throw std::invalid_argument("fisher: need at least two samples");
  const auto sd = heat(mu, s, options);
  std::mt19937_64 rng(derive_seed(seed, 0xf15));
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (double z : sd.sample_smoothed(samples, rng)) {
    const auto score = sd.score_at(z);
    if (!score) continue;
    const double v = *score * *score;
    sum += v;
    sum2 += v * v;
    ++n;
  }
  FisherResult out;
  out.method = Method::monte_carlo;
  if (n < 2) return out;
  const double nn = static_cast<double>(n);
  out.value = sum / nn;
  out.std_error = std::sqrt(std::max(0.0, sum2 / nn - out.value * out.value) / (nn - 1.0));
  out.coverage_deficit = 1.0 - nn / static_cast<double>(samples);
  return out;
}

VariationalResult fisher_variational(const SmoothedDensity& sd, const TestFunctionBasis& basis) {
  VariationalResult out;
  if (basis.empty()) return out;
  const auto m = basis_moments(sd, basis);
  const auto W = whitening(m.A);
  out.rank = static_cast<std::size_t>(W.cols());
  if (W.cols() == 0) return out;
  const Eigen::VectorXd z = W.transpose() * m.b;
  out.value = z.squaredNorm();
  if (out.value < 0.0) {
    out.value = 0.0;
    out.flagged = true;
  }
  return out;
}

VariationalResult fisher_variational(const MeasurePtr& mu, double s, const BasisSpec& spec,
                                     const SmoothingOptions& options) {
  const auto sd = heat(mu, s, options);
  return fisher_variational(sd, make_basis(spec, sd));
}

DeBruijnCheck de_bruijn_check(const MeasurePtr& mu, double s, double h, const SmoothingOptions& options) {
  if (!(h > 0.0 && h < s)) throw std::invalid_argument("de Bruijn check: need 0 < h < s");
  EntropyOptions eo;
  eo.smoothing = options;
  eo.check_samples = 0;
  eo.abs_tol = 1e-13;
  const auto up = entropy(heat(mu, s + h, options), eo);
  const auto down = entropy(heat(mu, s - h, options), eo);
  const auto f = fisher_direct(mu, s, options);
  DeBruijnCheck c;
  c.lhs = (up.value - down.value) / (2.0 * h);
  c.rhs = -0.5 * f.value;
  c.tolerance = 0.05 * std::abs(c.rhs) + (up.error + down.error) / (2.0 * h) + 0.5 * f.error;
  c.holds = std::abs(c.lhs - c.rhs) <= c.tolerance;
  return c;
}

std::vector<double> default_s_grid() { return geometric_grid(1.0, 1e-8, 30); }

std::vector<double> log_trapezoid_tail(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("log trapezoid: size mismatch");
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i - 1] > x[i]) || !(x[i] > 0.0)) throw std::invalid_argument("log trapezoid: grid must decrease and stay positive");
    out[i] = out[i - 1] + 0.5 * (x[i - 1] * y[i - 1] + x[i] * y[i]) * std::log(x[i - 1] / x[i]);
  }
  return out;
}

std::vector<bool> small_scale_window(const std::vector<double>& x, double xmax) {
  std::vector<bool> use(x.size(), false);
  std::size_t k = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] <= xmax) {
      use[i] = true;
      ++k;
    }
  for (std::size_t i = x.size(); i-- > 0 && k < 2;)
    if (!use[i]) {
      use[i] = true;
      ++k;
    }
  return use;
}

FisherCurve fisher_curve(const MeasurePtr& mu, const std::vector<double>& s_grid, const FisherCurveOptions& options) {
  FisherCurve c;
  c.s = s_grid;
  std::vector<double> values;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    auto opt = options.smoothing;
    opt.seed = derive_seed(options.smoothing.seed, i);
    const auto f = fisher_direct(mu, s_grid[i], opt);
    if (f.value > options.bound_slack / s_grid[i]) {
      std::ostringstream msg;
      msg << "Fisher information bound violated at s=" << s_grid[i] << ": F=" << f.value << " > "
          << options.bound_slack << "/s=" << options.bound_slack / s_grid[i];
      throw BoundViolation(msg.str());
    }
    c.fisher.push_back(f);
    values.push_back(f.value);
  }
  c.integral = log_trapezoid_tail(s_grid, values);
  return c;
}

DimensionEstimate delta_c_fisher(const FisherCurve& fc, double fit_smax) {
  DimensionEstimate est;
  est.method = "fisher-route";
  auto& curve = est.curve;
  curve.abscissa = fc.s;
  curve.values = fc.integral;
  curve.flagged.assign(fc.s.size(), false);
  curve.value_errors.assign(fc.s.size(), 0.0);
  for (std::size_t i = 1; i < fc.s.size(); ++i) {
    const double e0 = fc.fisher[i - 1].error + fc.fisher[i - 1].std_error;
    const double e1 = fc.fisher[i].error + fc.fisher[i].std_error;
    curve.value_errors[i] =
        curve.value_errors[i - 1] + 0.5 * (fc.s[i - 1] * e0 + fc.s[i] * e1) * std::log(fc.s[i - 1] / fc.s[i]);
    curve.flagged[i] = fc.fisher[i].coverage_deficit > 1e-3;
  }
  curve.used = small_scale_window(fc.s, fit_smax);
  for (std::size_t i = 0; i < fc.s.size(); ++i) curve.used[i] = curve.used[i] && !curve.flagged[i];
  curve.window_begin = static_cast<std::size_t>(std::find(curve.used.begin(), curve.used.end(), true) - curve.used.begin());
  std::vector<double> x(fc.s.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::abs(std::log(fc.s[i]));
  if (std::count(curve.used.begin(), curve.used.end(), true) < 2) {
    est.flagged = true;
    est.note = "fewer than two usable s-grid points";
    return est;
  }
  curve.fit = least_squares(x, curve.values, curve.used);
  est.value = 1.0 - curve.fit.slope;
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (curve.used[i]) err = std::max(err, curve.value_errors[i]);
  finish_estimate(est, curve.fit.slope_stderr, err);
  return est;
}

DimensionEstimate delta_c_fisher(const MeasurePtr& mu, const std::vector<double>& s_grid,
                                 const FisherCurveOptions& options) {
  return delta_c_fisher(fisher_curve(mu, s_grid, options), options.fit_smax);
}

DudleyDiagnostic dudley_diagnostic(const MeasurePtr& mu, double t, double delta) {
  if (!(t > 0.0)) throw std::invalid_argument("dudley diagnostic: t must be positive");
  DudleyDiagnostic d;
  d.t = t;
  d.reference = std::sqrt(std::max(0.0, 1.0 - delta) * t);
  const double sd = std::sqrt(t);
  const auto b = support_bounds(*mu);
  const double lo = b.lo - 10.0 * sd, hi = b.hi + 10.0 * sd;
  const auto cdf = [&](double x) { return interval_mass(*mu, lo - 1.0, x).value(); };
  // Depth 10 resolves self-similar measures to about lambda^10, far below sd on any usable grid.
  const auto smoothed_cdf = [&](double x) {
    return expectation(
        *mu, [&](double y) { return 0.5 * std::erfc((y - x) / (sd * std::numbers::sqrt2)); }, 10);
  };
  const auto panels = make_panels({{lo, hi}}, {}, std::min(hi - lo, 0.5 * sd));
  d.distance = integrate(panels, [&](double x) { return std::abs(cdf(x) - smoothed_cdf(x)); }, 1e-9, 3).value;
  return d;
}

}  // namespace entdim
