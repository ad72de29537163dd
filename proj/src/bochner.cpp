#include "entdim/bochner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace entdim {

OptimalK optimal_K(const BasisMoments& m, double n, double cutoff) {
  if (!(n > 0.0)) throw std::invalid_argument("optimal K: n must be positive");
  OptimalK out;
  const auto W = whitening(m.A, cutoff);
  if (W.cols() == 0) {
    out.degenerate = true;
    return out;
  }
  const Eigen::VectorXd z = W.transpose() * m.b;
  const Eigen::MatrixXd c = W.transpose() * m.C * W;
  const Eigen::MatrixXd M = (z * z.transpose()) / n - c;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
  out.lambda_max = eig.eigenvalues().maxCoeff();
  // Rounding leaves O(eps * scale) positive residue where Cauchy-Schwarz
  // makes the exact value nonpositive.
  const double scale = std::max(z.squaredNorm() / n, c.trace());
  out.value = out.lambda_max > 1e-9 * scale ? out.lambda_max : 0.0;
  return out;
}

OptimalK optimal_K(const MeasurePtr& mu, double eps, double n, const BasisSpec& spec, const SmoothingOptions& options) {
  const SmoothedDensity sd(mu, Kernel::gaussian(), std::sqrt(eps), options);
  return optimal_K(basis_moments(sd, make_basis(spec, sd)), n);
}

std::vector<double> default_n_grid() { return geometric_grid(0.01, 1.0, 20); }

BochnerScan bochner_scan(const MeasurePtr& mu, const std::vector<double>& eps_grid, const std::vector<double>& n_grid,
                         const BochnerOptions& options) {
  if (eps_grid.size() < 2 || n_grid.empty()) throw std::invalid_argument("bochner scan: grids too small");
  BochnerScan s;
  s.eps = eps_grid;
  s.n = n_grid;
  const auto ne = eps_grid.size(), nn = n_grid.size();
  s.K_eig.assign(ne, std::vector<double>(nn, 0.0));
  s.K_family = s.K = s.K_eig;
  s.from_family.assign(ne, std::vector<bool>(nn, false));
  s.degenerate.assign(ne, false);
  for (std::size_t i = 0; i < ne; ++i) {
    auto opt = options.smoothing;
    opt.seed = derive_seed(options.smoothing.seed, i);
    const SmoothedDensity sd(mu, Kernel::gaussian(), std::sqrt(eps_grid[i]), opt);
    const auto moments = basis_moments(sd, make_basis(options.basis, sd));
    if (options.fisher_family) {
      const auto f = fisher_direct(mu, eps_grid[i], opt);
      s.fisher.push_back(f.value);
      s.fisher_error.push_back(f.error + f.std_error);
    } else {
      s.fisher.push_back(0.0);
      s.fisher_error.push_back(0.0);
    }
    for (std::size_t j = 0; j < nn; ++j) {
      const auto k = optimal_K(moments, n_grid[j]);
      s.degenerate[i] = s.degenerate[i] || k.degenerate;
      s.K_eig[i][j] = k.value;
      double K = k.value;
      if (options.fisher_family) {
        s.K_family[i][j] = std::max(0.0, (1.0 / n_grid[j] - 1.0) * s.fisher[i]);
        if (s.K_family[i][j] < K) {
          K = s.K_family[i][j];
          s.from_family[i][j] = true;
        }
      }
      s.K[i][j] = K;
    }
  }
  s.window = small_scale_window(eps_grid, options.fit_smax);
  std::vector<double> x(ne);
  for (std::size_t i = 0; i < ne; ++i) x[i] = std::abs(std::log(eps_grid[i]));
  for (std::size_t j = 0; j < nn; ++j) {
    std::vector<double> col(ne);
    for (std::size_t i = 0; i < ne; ++i) col[i] = s.K[i][j];
    const auto fit = least_squares(x, log_trapezoid_tail(eps_grid, col), s.window);
    s.Kbar.push_back(std::max(0.0, fit.slope));
    s.Kbar_stderr.push_back(fit.slope_stderr);
    s.objective.push_back(n_grid[j] * (1.0 + s.Kbar.back()));
  }
  s.best = static_cast<std::size_t>(std::min_element(s.objective.begin(), s.objective.end()) - s.objective.begin());
  return s;
}

DimensionEstimate delta_square(const BochnerScan& s) {
  DimensionEstimate est;
  est.method = "bochner-route";
  const auto j = s.best;
  const double n = s.n[j];
  est.value = 1.0 - s.objective[j];
  auto& c = est.curve;
  c.abscissa = s.eps;
  std::vector<double> col(s.eps.size());
  for (std::size_t i = 0; i < s.eps.size(); ++i) col[i] = s.K[i][j];
  c.values = log_trapezoid_tail(s.eps, col);
  // Family cells inherit the error of F; eigenvalue cells come from fixed-rule
  // moments, good to about 1e-8 relative.
  std::vector<double> err(s.eps.size(), 0.0);
  for (std::size_t i = 0; i < s.eps.size(); ++i)
    err[i] = std::abs(1.0 / n - 1.0) * s.fisher_error[i] + 1e-8 * s.K[i][j];
  c.value_errors = log_trapezoid_tail(s.eps, err);
  c.flagged.assign(s.eps.size(), false);
  c.used = s.window;
  c.window_begin = static_cast<std::size_t>(std::find(c.used.begin(), c.used.end(), true) - c.used.begin());
  std::vector<double> x(s.eps.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::abs(std::log(s.eps[i]));
  c.fit = least_squares(x, c.values, c.used);
  double value_error = 0.0;
  for (std::size_t i = 0; i < s.eps.size(); ++i)
    if (c.used[i]) value_error = std::max(value_error, c.value_errors[i]);
  finish_estimate(est, s.Kbar_stderr[j], value_error);
  // The curve is for Kbar; the estimate moves by n per unit of Kbar.
  est.confidence *= n;
  est.slope_early = 1.0 - n * (1.0 + est.slope_early);
  est.slope_late = 1.0 - n * (1.0 + est.slope_late);
  if (std::any_of(s.degenerate.begin(), s.degenerate.end(), [](bool d) { return d; }))
    est.note = "degenerate basis at some eps (K set to 0 there)";
  return est;
}

DimensionEstimate delta_square(const MeasurePtr& mu, const std::vector<double>& eps_grid,
                               const std::vector<double>& n_grid, const BochnerOptions& options) {
  return delta_square(bochner_scan(mu, eps_grid, n_grid, options));
}

double localized_fisher(const MeasurePtr& mu, double eps, const std::function<double(double)>& g,
                        const BasisSpec& spec, const SmoothingOptions& options) {
  const SmoothedDensity sd(mu, Kernel::gaussian(), std::sqrt(eps), options);
  const auto basis = make_basis(spec, sd);
  if (basis.empty()) return 0.0;
  const auto m = basis_moments(sd, basis, g);
  const auto W = whitening(m.A);
  if (W.cols() == 0) return 0.0;
  return (W.transpose() * m.b).squaredNorm();
}

LocalizedBound localized_lower_bound(const MeasurePtr& mu, const std::function<double(double)>& h,
                                     const std::vector<double>& eps_grid, const BasisSpec& spec,
                                     const SmoothingOptions& options, double fit_smax) {
  LocalizedBound r;
  r.bound = 1.0 - expectation(*mu, [&](double x) {
              const double d = 1.0 - h(x);
              return d * d;
            });
  r.eps = eps_grid;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    auto opt = options;
    opt.seed = derive_seed(options.seed, i);
    r.F_h.push_back(localized_fisher(mu, eps_grid[i], h, spec, opt));
  }
  r.integral = log_trapezoid_tail(eps_grid, r.F_h);
  std::vector<double> x(eps_grid.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::abs(std::log(eps_grid[i]));
  r.slope = least_squares(x, r.integral, small_scale_window(eps_grid, fit_smax)).slope;
  r.qualifies = r.slope <= 0.05;
  return r;
}

std::function<double(double)> plateau(double a, double b, double taper) {
  if (!(b >= a) || !(taper > 0.0)) throw std::invalid_argument("plateau: need a <= b and taper > 0");
  return [=](double x) {
    if (x >= a && x <= b) return 1.0;
    const double d = x < a ? a - x : x - b;
    if (d >= taper) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * d / taper));
  };
}

}  // namespace entdim
