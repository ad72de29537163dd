#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "entdim/measure.hpp"

namespace entdim {

struct GaussianKernel {};

/// Uniform law on [a, b].
struct BoxKernel {
  double a = -0.5;
  double b = 0.5;
};

/// Piecewise-constant density: `values[j]` on [origin + j*step, origin + (j+1)*step).
struct HistogramKernel {
  double origin = 0.0;
  double step = 1.0;
  std::vector<double> values;
};

/// Mollifier nu; its dilation by t has density q(x/t)/t.
class Kernel {
 public:
  using Payload = std::variant<GaussianKernel, BoxKernel, HistogramKernel>;

  static Kernel gaussian() { return Kernel(GaussianKernel{}); }
  static Kernel box(double a = -0.5, double b = 0.5);
  static Kernel box01() { return box(0.0, 1.0); }
  static Kernel histogram(double origin, double step, std::vector<double> values);
  /// Parses the CLI form: gauss | box | box01 | file:PATH (a JSON histogram
  /// with "origin", "step" and "values").
  static Kernel parse(const std::string& flag);

  const Payload& payload() const { return payload_; }
  bool is_gaussian() const { return std::holds_alternative<GaussianKernel>(payload_); }
  std::string name() const;

  /// H(nu) = integral of q log q (finite for every kernel here).
  double entropy() const;
  /// Integral of log(1 + |y|) against nu.
  double log_moment() const;
  /// Support of q; the Gaussian is truncated to [-8, 8].
  Interval extent() const;
  double density(double u) const;
  double draw(std::mt19937_64& rng) const;

 private:
  explicit Kernel(Payload p) : payload_(std::move(p)) {}
  Payload payload_;
};

enum class Method { automatic, exact_box, closed_form, enumerated, quadrature, monte_carlo };

std::string to_string(Method m);

struct SmoothingOptions {
  Method method = Method::automatic;
  /// Monte Carlo draws per Bernoulli component (used in antithetic pairs).
  std::size_t mc_samples = 200000;
  std::uint64_t seed = 42;
  /// Relative standard error above which a Monte Carlo value is low-confidence.
  double mc_se_ceiling = 0.05;
  /// Sign enumeration stops once the tail's standard deviation is below
  /// this fraction of t; the tail is then folded into the Gaussian width.
  double enumeration_ratio = 0.05;
  int max_enumeration_depth = 22;
  /// Continuous densities under a pushforward are discretised into atoms no
  /// further apart than this fraction of t.
  double discretization_ratio = 0.5;
};

struct DensityValue {
  double value = 0.0;
  double std_error = 0.0;
  bool low_confidence = false;
};

/// p, p' and p'' of a Gaussian-smoothed measure.
struct DensityJet {
  double p = 0.0;
  double dp = 0.0;
  double d2p = 0.0;
  double std_error = 0.0;
};

/// Density p_t of mu * D_t^* nu.
class SmoothedDensity {
 public:
  SmoothedDensity(MeasurePtr mu, Kernel kernel, double t, SmoothingOptions options = {});

  double t() const { return t_; }
  const Measure& measure() const { return *mu_; }
  const MeasurePtr& measure_ptr() const { return mu_; }
  const Kernel& kernel() const { return kernel_; }
  const SmoothingOptions& options() const { return options_; }
  /// The method actually used (the least exact one among the components).
  Method method() const { return method_; }

  DensityValue density_at(double x) const;
  /// p'/p; requires a Gaussian kernel. Empty where the density underflows.
  std::optional<double> score_at(double x) const;
  /// Requires a Gaussian kernel.
  DensityJet jet(double x) const;

  /// Sorted disjoint intervals outside which p_t is negligible (< 1e-14 tail).
  const std::vector<Interval>& region() const { return region_; }
  /// Points where p_t is not smooth.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  /// Panel width and refinement depth suited to integrating functionals of p_t.
  double panel_width() const { return panel_width_; }
  int refine_depth() const { return refine_depth_; }
  /// Integration panels built from region, breakpoints and panel width.
  std::vector<Interval> panels() const;

  /// Draws from mu_t (mu draw plus t times a kernel draw).
  std::vector<double> sample_smoothed(std::size_t n, std::mt19937_64& rng) const;

  struct GaussianRep;

 private:
  MeasurePtr mu_;
  Kernel kernel_;
  double t_;
  SmoothingOptions options_;
  Method method_ = Method::automatic;
  std::shared_ptr<const GaussianRep> gauss_;
  std::vector<Interval> region_;
  std::vector<double> breakpoints_;
  double panel_width_ = 0.0;
  int refine_depth_ = 8;
};

/// Densities below this are treated as zero.
inline constexpr double kDensityFloor = 1e-300;

}  // namespace entdim
