#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "entdim/measure.hpp"
#include "entdim/regression.hpp"
#include "entdim/smoothing.hpp"

namespace entdim {

struct EntropyOptions {
  SmoothingOptions smoothing;
  /// Draws for the Monte Carlo cross-check (0 disables it).
  std::size_t check_samples = 10000;
  double abs_tol = 1e-10;
  /// Quadrature and Monte Carlo values further apart than this many combined
  /// standard errors flag the result.
  double flag_sigmas = 5.0;
};

/// H(p dx) = integral of p log p (0 log 0 = 0).
struct EntropyResult {
  double value = 0.0;
  /// Quadrature error estimate, plus propagated density noise when p_t
  /// itself is a Monte Carlo estimate.
  double error = 0.0;
  double mc_value = 0.0;
  double mc_stderr = 0.0;
  bool cross_checked = false;
  bool flagged = false;
  Method method = Method::automatic;
  /// Mass carried by points whose density was marked low-confidence.
  double low_confidence_mass = 0.0;
};

EntropyResult entropy(const SmoothedDensity& sd, const EntropyOptions& options = {});

/// Sampled pairs (t, value) with a least-squares fit of value against |log t|.
struct ScalingCurve {
  std::vector<double> abscissa;  // strictly decreasing
  std::vector<double> values;
  std::vector<double> value_errors;
  std::vector<bool> flagged;
  /// Points entering the fit: those from `window_begin` on that are not flagged.
  std::size_t window_begin = 0;
  std::vector<bool> used;
  LinearFit fit;
};

/// Fits values against |log t| from `drop_largest` on, skipping flagged points.
void fit_curve(ScalingCurve& curve, std::size_t drop_largest);

/// Geometric t-grid ordered from `tmax` down to `tmin`.
std::vector<double> t_grid(double tmin, double tmax, std::size_t points);

struct CurveOptions {
  EntropyOptions entropy;
  std::size_t drop_largest = 5;
};

/// Default grid: 25 points from 1e-1 down to 1e-4.
std::vector<double> default_entropy_grid();

ScalingCurve entropy_curve(const MeasurePtr& mu, const Kernel& kernel, const std::vector<double>& ts,
                           const CurveOptions& options = {});

/// Entropy of an absolutely continuous measure (grid densities and their
/// mixtures with disjoint or overlapping grids); empty for measures with a
/// singular part.
std::optional<double> entropy_unsmoothed(const Measure& mu);

/// The entropy power inequality exp(-2H(mu_t)) >= exp(-2H(mu)) + exp(-2H(nu_t)).
struct EpiCheck {
  bool singular = false;  // H(mu) is +infinity; the reduced bound was checked
  double lhs = 0.0;
  double rhs = 0.0;
  double h_mu_t = 0.0;
  double h_mu = 0.0;
  double h_nu_t = 0.0;
  double tolerance = 0.0;
  bool holds = false;
};

EpiCheck epi_check(const MeasurePtr& mu, const Kernel& kernel, double t, const EntropyOptions& options = {});

/// H(nu) - log t, which bounds H(mu_t) from above.
double entropy_upper_bound(const Kernel& kernel, double t);
/// -log 2 - 2 E_mu log(1+|x|) - 2 E_nu log(1+|y|), valid for t <= 1.
double entropy_lower_bound(const Measure& mu, const Kernel& kernel);

/// Splitting H(mu_t) over a mixture mu = sum a_i mu_i. With p_i the
/// smoothed component densities,
///   gap = H(mu_t) - sum a_i H(p_i) = cross + sum a_i log a_i,
///   cross = sum_i a_i int p_i log(sum_j a_j p_j / (a_i p_i)) in [0, n - 1].
struct AffinityGap {
  double gap = 0.0;
  double cross = 0.0;
  /// sum a_i log a_i, the lower end of the gap's range.
  double lower = 0.0;
  /// (n - 1) + sum a_i log a_i
  double upper = 0.0;
  double error = 0.0;
  double mixture_entropy = 0.0;
  std::vector<double> component_entropies;
};

/// H(mixture_t) - sum a_i H((mu_i)_t) for normalised components mu_i.
AffinityGap affinity_gap(const std::vector<MixtureComponent>& components, const Kernel& kernel, double t,
                         const EntropyOptions& options = {});

}  // namespace entdim
