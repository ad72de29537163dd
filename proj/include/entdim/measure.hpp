#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace entdim {

class Measure;
using MeasurePtr = std::shared_ptr<const Measure>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Merges overlapping or touching intervals; the result is sorted and disjoint.
std::vector<Interval> merge_intervals(std::vector<Interval> intervals);

/// A strictly monotone bi-Lipschitz map f on the real line together with its
/// inverse, its derivative and certified constants m <= |f'| <= M.
///
/// Serializable kinds are "affine" (slope, offset) and "linear_sine"
/// (slope, offset, amplitude), i.e. f(x) = slope*x + offset + amplitude*sin(x).
/// Maps built from arbitrary callables are usable but cannot be written back
/// to a measure spec.
class MapSpec {
 public:
  using Fn = std::function<double(double)>;

  static MapSpec affine(double slope, double offset);
  static MapSpec linear_sine(double slope, double offset, double amplitude);
  static MapSpec custom(Fn forward, Fn inverse, Fn derivative, double lower, double upper);

  /// Replaces the automatically derived constants with user supplied ones.
  /// They are checked at pushforward construction.
  MapSpec with_constants(double lower, double upper) const;

  double operator()(double x) const { return forward_(x); }
  double inverse(double y) const { return inverse_(y); }
  double derivative(double x) const { return derivative_(x); }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  bool increasing() const { return increasing_; }

  const std::string& kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }

  /// Spot-checks m|x-y| <= |f(x)-f(y)| <= M|x-y| on `pairs` random pairs
  /// drawn from [lo, hi]. Throws std::invalid_argument on failure.
  void certify(double lo, double hi, std::size_t pairs = 1000, std::uint64_t seed = 0x5eed) const;

 private:
  MapSpec() = default;

  std::string kind_;
  std::vector<double> params_;
  Fn forward_;
  Fn inverse_;
  Fn derivative_;
  double lower_ = 1.0;
  double upper_ = 1.0;
  bool increasing_ = true;
};

struct Atomic {
  std::vector<double> positions;
  std::vector<double> weights;
};

/// Piecewise-linear density through the nodes origin + i*step, zero outside
/// the node range. `cumulative[i]` is the mass to the left of node i.
struct GridDensity {
  double origin = 0.0;
  double step = 1.0;
  std::vector<double> values;
  std::vector<double> cumulative;

  double node(std::size_t i) const { return origin + step * static_cast<double>(i); }
  double end() const { return node(values.size() - 1); }
  double cdf(double x) const;
  double density(double x) const;
};

/// Law of sum_{k>=0} eps_k lambda^k with i.i.d. fair signs eps_k.
struct BernoulliConvolution {
  double lambda = 0.25;
  double radius() const { return 1.0 / (1.0 - lambda); }
};

struct MixtureComponent {
  double weight = 0.0;
  MeasurePtr measure;
};

struct Mixture {
  std::vector<MixtureComponent> components;
};

struct LipschitzPushforward {
  MeasurePtr base;
  MapSpec map;
};

/// Immutable probability measure on the real line.
class Measure {
 public:
  using Payload = std::variant<Atomic, GridDensity, BernoulliConvolution, Mixture, LipschitzPushforward>;

  static MeasurePtr atomic(std::vector<double> positions, std::vector<double> weights);
  static MeasurePtr dirac(double x);
  /// Values are rescaled so the piecewise-linear density integrates to one.
  static MeasurePtr grid(double origin, double step, std::vector<double> values);
  static MeasurePtr uniform(double a, double b);
  /// N(mean, sd^2) sampled on a grid of the given step over mean +- halfwidth*sd.
  static MeasurePtr normal(double mean, double sd, double step = 1e-3, double halfwidth = 10.0);
  static MeasurePtr bernoulli(double lambda);
  static MeasurePtr mixture(std::vector<MixtureComponent> components);
  static MeasurePtr pushforward(MeasurePtr base, MapSpec map);

  const Payload& payload() const { return payload_; }
  std::string kind() const;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&payload_);
  }

 private:
  explicit Measure(Payload payload) : payload_(std::move(payload)) {}
  Payload payload_;
};

/// Mass of a closed interval. Exact queries have lower == upper; when the
/// self-similar recursion hits its depth cap the true mass lies in
/// [lower, upper].
struct IntervalMass {
  double lower = 0.0;
  double upper = 0.0;
  bool exact() const { return lower == upper; }
  double value() const { return 0.5 * (lower + upper); }
};

inline constexpr int kDefaultDepthCap = 48;

IntervalMass interval_mass(const Measure& mu, double a, double b, int depth_cap = kDefaultDepthCap);

struct SampleBatch {
  std::vector<double> values;
  /// Deterministic bound on the distance between each draw and an exact draw.
  double truncation_error = 0.0;
};

SampleBatch sample(const Measure& mu, std::size_t n, std::mt19937_64& rng);

/// Interval certified to contain the support.
Interval support_bounds(const Measure& mu);

/// Sorted disjoint intervals covering the support. Pieces coming from
/// self-similar parts have width at most about `resolution`.
std::vector<Interval> support_cover(const Measure& mu, double resolution);

/// Points where the measure is not smooth: atoms, grid nodes, and their images
/// under pushforward maps. Sorted, possibly with repeats removed.
std::vector<double> singular_points(const Measure& mu);

/// Integral of a continuous function against mu. Bernoulli convolutions are
/// integrated over their depth-`depth` cylinder centres.
double expectation(const Measure& mu, const std::function<double(double)>& g, int depth = 16);

/// Largest Lipschitz constant along nested pushforwards (1 when none).
double lipschitz_upper(const Measure& mu);

/// Support points of the depth-k truncation sum_{j<k} eps_j lambda^j, ordered
/// increasingly. Each carries mass 2^-k.
std::vector<double> bernoulli_cylinder_centres(double lambda, int depth);

}  // namespace entdim
