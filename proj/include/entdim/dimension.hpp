#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "entdim/entropy.hpp"

namespace entdim {

struct DimensionEstimate {
  double value = 0.0;
  /// entropy-slope | fractal-average | fisher-route | bochner-route
  std::string method;
  ScalingCurve curve;
  /// Half-width: two standard errors of the slope, plus the half-window
  /// spread and propagated quadrature error.
  double confidence = 0.0;
  /// Slopes fitted separately on the larger-t and smaller-t halves of the
  /// fit window; their difference exposes slow convergence or oscillation.
  double slope_early = 0.0;
  double slope_late = 0.0;
  bool flagged = false;
  std::string note;
};

/// 1 - slope of H(mu_t) against |log t|.
DimensionEstimate delta_c_entropy(const MeasurePtr& mu, const Kernel& kernel, const std::vector<double>& ts,
                                  const CurveOptions& options = {});

struct FractalOptions {
  std::size_t samples = 40000;
  std::uint64_t seed = 42;
  std::size_t drop_largest = 5;
};

/// Slope of E_mu[-log mu[y - t/2, y + t/2]] against |log t|, with the same
/// draws y reused at every t.
DimensionEstimate delta_c_fractal(const MeasurePtr& mu, const std::vector<double>& ts,
                                  const FractalOptions& options = {});

/// Fills slope_early/slope_late and the confidence of an estimate whose curve
/// has been fitted; `slope_se` is the standard error to use for the slope.
void finish_estimate(DimensionEstimate& est, double slope_se, double value_error);

struct KernelIndependenceReport {
  std::vector<std::string> kernels;
  std::vector<DimensionEstimate> estimates;
  double max_difference = 0.0;
  /// Sum of the confidences of the most distant pair.
  double combined_confidence = 0.0;
  bool holds = false;
};

KernelIndependenceReport kernel_independence_report(const MeasurePtr& mu, const std::vector<Kernel>& kernels,
                                                    const std::vector<double>& ts, const CurveOptions& options = {});

struct AffinityReport {
  DimensionEstimate mixture;
  std::vector<DimensionEstimate> components;
  double lhs = 0.0;
  double rhs = 0.0;
  double combined_confidence = 0.0;
  bool holds = false;
};

AffinityReport affinity_report(const std::vector<MixtureComponent>& components, const Kernel& kernel,
                               const std::vector<double>& ts, const CurveOptions& options = {});

struct LipschitzReport {
  DimensionEstimate base;
  DimensionEstimate pushed;
  double combined_confidence = 0.0;
  bool holds = false;
};

LipschitzReport lipschitz_invariance_report(const MeasurePtr& mu, const MapSpec& map, const Kernel& kernel,
                                            const std::vector<double>& ts, const CurveOptions& options = {});

}  // namespace entdim
