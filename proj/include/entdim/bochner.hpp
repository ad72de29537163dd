#pragma once

#include <functional>
#include <string>
#include <vector>

#include "entdim/fisher.hpp"

namespace entdim {

struct OptimalK {
  double value = 0.0;
  /// Largest generalised eigenvalue before clamping at zero.
  double lambda_max = 0.0;
  /// A vanished on the basis span; K = 0 by convention.
  bool degenerate = false;
};

/// Smallest K >= 0 with E[(f'')^2] >= (1/n) E[f'']^2 - K E[(f')^2] for all f in
/// the span, from precomputed moments.
OptimalK optimal_K(const BasisMoments& moments, double n, double cutoff = 1e-8);
OptimalK optimal_K(const MeasurePtr& mu, double eps, double n, const BasisSpec& spec = {8, false, true},
                   const SmoothingOptions& options = {});

/// Default n-grid: 20 points from 0.01 to 1.
std::vector<double> default_n_grid();

struct BochnerOptions {
  BasisSpec basis{8, false, true};
  SmoothingOptions smoothing;
  /// Seed the scan with K = (1/n - 1) F(P_eps mu).
  bool fisher_family = true;
  double fit_smax = 2e-3;
};

struct BochnerScan {
  std::vector<double> eps;  // decreasing
  std::vector<double> n;
  std::vector<double> fisher;                 // F(P_eps mu)
  std::vector<double> fisher_error;
  std::vector<std::vector<double>> K_eig;     // [eps][n]
  std::vector<std::vector<double>> K_family;  // [eps][n]
  std::vector<std::vector<double>> K;         // pointwise minimum
  std::vector<std::vector<bool>> from_family;
  std::vector<bool> degenerate;               // per eps
  std::vector<double> Kbar;                   // per n
  std::vector<double> Kbar_stderr;
  /// n (1 + Kbar(n))
  std::vector<double> objective;
  std::size_t best = 0;
  std::vector<bool> window;  // eps points in the slope fits
};

BochnerScan bochner_scan(const MeasurePtr& mu, const std::vector<double>& eps_grid, const std::vector<double>& n_grid,
                         const BochnerOptions& options = {});

/// 1 - min_n n (1 + Kbar(n)).
DimensionEstimate delta_square(const BochnerScan& scan);
DimensionEstimate delta_square(const MeasurePtr& mu, const std::vector<double>& eps_grid,
                               const std::vector<double>& n_grid, const BochnerOptions& options = {});

/// F_g = 2 sup_f { E[g f''] - E[(f')^2] / 2 } over the basis span, against P_eps mu.
double localized_fisher(const MeasurePtr& mu, double eps, const std::function<double(double)>& g,
                        const BasisSpec& spec = {}, const SmoothingOptions& options = {});

struct LocalizedBound {
  double bound = 0.0;  // 1 - E_mu[(1 - h)^2]
  std::vector<double> eps;
  std::vector<double> F_h;
  std::vector<double> integral;
  /// Slope of the integral of F_h against |log eps|.
  double slope = 0.0;
  /// The slope is small enough (<= 0.05) for the bound to apply.
  bool qualifies = false;
};

LocalizedBound localized_lower_bound(const MeasurePtr& mu, const std::function<double(double)>& h,
                                     const std::vector<double>& eps_grid, const BasisSpec& spec = {},
                                     const SmoothingOptions& options = {}, double fit_smax = 2e-3);

/// C^1 plateau: 1 on [a, b], 0 outside [a - taper, b + taper], smooth cosine
/// ramps in between.
std::function<double(double)> plateau(double a, double b, double taper);

}  // namespace entdim
