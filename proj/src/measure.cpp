#include "entdim/measure.hpp"
#include "entdim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace entdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Inverse of x -> slope*x + offset + amplitude*sin(x), slope > |amplitude|.
double invert_linear_sine(double y, double slope, double offset, double amplitude) {
  if (!std::isfinite(y)) return y;
  double lo = (y - offset - std::abs(amplitude)) / slope;
  double hi = (y - offset + std::abs(amplitude)) / slope;
  double x = (y - offset) / slope;
  for (int it = 0; it < 100; ++it) {
    const double fx = slope * x + offset + amplitude * std::sin(x) - y;
    if (fx == 0.0) return x;
    if (fx > 0.0) hi = x; else lo = x;
    const double d = slope + amplitude * std::cos(x);
    double next = x - fx / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace

std::vector<Interval> merge_intervals(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& l, const Interval& r) { return l.lo < r.lo; });
  std::vector<Interval> out;
  for (const auto& iv : intervals) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// MapSpec

MapSpec MapSpec::affine(double slope, double offset) {
  if (!(slope != 0.0) || !std::isfinite(slope) || !std::isfinite(offset))
    fail("map: affine slope must be finite and nonzero");
  MapSpec m;
  m.kind_ = "affine";
  m.params_ = {slope, offset};
  m.forward_ = [slope, offset](double x) { return slope * x + offset; };
  m.inverse_ = [slope, offset](double y) { return (y - offset) / slope; };
  m.derivative_ = [slope](double) { return slope; };
  m.lower_ = m.upper_ = std::abs(slope);
  m.increasing_ = slope > 0.0;
  return m;
}

MapSpec MapSpec::linear_sine(double slope, double offset, double amplitude) {
  if (!(slope > std::abs(amplitude)) || !std::isfinite(offset))
    fail("map: linear_sine needs slope > |amplitude|");
  MapSpec m;
  m.kind_ = "linear_sine";
  m.params_ = {slope, offset, amplitude};
  m.forward_ = [=](double x) { return slope * x + offset + amplitude * std::sin(x); };
  m.inverse_ = [=](double y) { return invert_linear_sine(y, slope, offset, amplitude); };
  m.derivative_ = [=](double x) { return slope + amplitude * std::cos(x); };
  m.lower_ = slope - std::abs(amplitude);
  m.upper_ = slope + std::abs(amplitude);
  m.increasing_ = true;
  return m;
}

MapSpec MapSpec::custom(Fn forward, Fn inverse, Fn derivative, double lower, double upper) {
  if (!forward || !inverse || !derivative) fail("map: custom map needs forward, inverse and derivative");
  MapSpec m;
  m.kind_ = "custom";
  m.forward_ = std::move(forward);
  m.inverse_ = std::move(inverse);
  m.derivative_ = std::move(derivative);
  m.increasing_ = m.forward_(1.0) > m.forward_(0.0);
  return m.with_constants(lower, upper);
}

MapSpec MapSpec::with_constants(double lower, double upper) const {
  if (!(lower > 0.0) || !(lower <= upper) || !std::isfinite(upper))
    fail("map: bi-Lipschitz constants must satisfy 0 < m <= M");
  MapSpec m = *this;
  m.lower_ = lower;
  m.upper_ = upper;
  return m;
}

void MapSpec::certify(double lo, double hi, std::size_t pairs, std::uint64_t seed) const {
  if (hi - lo < 1e-6) {
    lo -= 1.0;
    hi += 1.0;
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < pairs; ++i) {
    const double x = lo + (hi - lo) * uniform01(rng);
    const double y = lo + (hi - lo) * uniform01(rng);
    if (x == y) continue;
    const double dx = std::abs(x - y);
    const double df = std::abs(forward_(x) - forward_(y));
    const double slack = 1e-9 * std::max(1.0, df);
    if (df < lower_ * dx - slack || df > upper_ * dx + slack) {
      std::ostringstream os;
      os << "map: bi-Lipschitz constants (" << lower_ << ", " << upper_
         << ") violated at x=" << x << ", y=" << y;
      fail(os.str());
    }
    const double back = inverse_(forward_(x));
    if (std::abs(back - x) > 1e-9 * std::max(1.0, std::abs(x))) fail("map: inverse does not invert forward");
  }
}

// ---------------------------------------------------------------------------
// GridDensity

double GridDensity::cdf(double x) const {
  if (!(x > origin)) return 0.0;
  const double last = end();
  if (x >= last) return 1.0;
  const auto n = values.size();
  auto i = static_cast<std::size_t>((x - origin) / step);
  if (i >= n - 1) i = n - 2;
  const double dx = x - node(i);
  const double slope = (values[i + 1] - values[i]) / step;
  return std::min(1.0, cumulative[i] + values[i] * dx + 0.5 * slope * dx * dx);
}

double GridDensity::density(double x) const {
  if (x < origin || x > end()) return 0.0;
  const auto n = values.size();
  auto i = static_cast<std::size_t>((x - origin) / step);
  if (i >= n - 1) i = n - 2;
  const double frac = (x - node(i)) / step;
  return values[i] + (values[i + 1] - values[i]) * frac;
}

// ---------------------------------------------------------------------------
// Measure factories

MeasurePtr Measure::atomic(std::vector<double> positions, std::vector<double> weights) {
  if (positions.empty()) fail("atomic: positions must be nonempty");
  if (positions.size() != weights.size()) fail("atomic: positions and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(positions[i])) fail("atomic: positions must be finite");
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) fail("atomic: weights must be nonnegative");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) fail("atomic: weights must sum to 1");
  return MeasurePtr(new Measure(Atomic{std::move(positions), std::move(weights)}));
}

MeasurePtr Measure::dirac(double x) { return atomic({x}, {1.0}); }

MeasurePtr Measure::grid(double origin, double step, std::vector<double> values) {
  if (!(step > 0.0) || !std::isfinite(step)) fail("grid: step must be positive");
  if (!std::isfinite(origin)) fail("grid: origin must be finite");
  if (values.size() < 2) fail("grid: values needs at least two nodes");
  double trapezoid = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) fail("grid: values must be finite and nonnegative");
    if (i + 1 < values.size()) trapezoid += 0.5 * (values[i] + values[i + 1]) * step;
  }
  if (!(trapezoid > 0.0)) fail("grid: values must carry positive mass");
  GridDensity g;
  g.origin = origin;
  g.step = step;
  g.values = std::move(values);
  // Already-normalized input is kept bit-for-bit so specs round-trip.
  if (std::abs(trapezoid - 1.0) > 4.0 * std::numeric_limits<double>::epsilon())
    for (auto& v : g.values) v /= trapezoid;
  g.cumulative.resize(g.values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    g.cumulative[i] = acc;
    if (i + 1 < g.values.size()) acc += 0.5 * (g.values[i] + g.values[i + 1]) * step;
  }
  return MeasurePtr(new Measure(std::move(g)));
}

MeasurePtr Measure::uniform(double a, double b) {
  if (!(b > a)) fail("uniform: need a < b");
  return grid(a, b - a, {1.0 / (b - a), 1.0 / (b - a)});
}

MeasurePtr Measure::normal(double mean, double sd, double step, double halfwidth) {
  if (!(sd > 0.0) || !(step > 0.0)) fail("normal: sd and step must be positive");
  const auto half = static_cast<std::size_t>(std::ceil(halfwidth * sd / step));
  std::vector<double> values(2 * half + 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double z = (static_cast<double>(i) - static_cast<double>(half)) * step / sd;
    values[i] = std::exp(-0.5 * z * z);
  }
  return grid(mean - static_cast<double>(half) * step, step, std::move(values));
}

MeasurePtr Measure::bernoulli(double lambda) {
  if (!(lambda > 0.0 && lambda < 0.5)) fail("bernoulli: lambda must lie in (0, 1/2)");
  return MeasurePtr(new Measure(BernoulliConvolution{lambda}));
}

MeasurePtr Measure::mixture(std::vector<MixtureComponent> components) {
  if (components.empty()) fail("mixture: components must be nonempty");
  double total = 0.0;
  for (const auto& c : components) {
    if (!c.measure) fail("mixture: component measure missing");
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) fail("mixture: weights must be nonnegative");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) fail("mixture: weights must sum to 1");
  return MeasurePtr(new Measure(Mixture{std::move(components)}));
}

MeasurePtr Measure::pushforward(MeasurePtr base, MapSpec map) {
  if (!base) fail("pushforward: base measure missing");
  const auto b = support_bounds(*base);
  map.certify(b.lo, b.hi);
  return MeasurePtr(new Measure(LipschitzPushforward{std::move(base), std::move(map)}));
}

std::string Measure::kind() const {
  struct {
    std::string operator()(const Atomic&) const { return "atomic"; }
    std::string operator()(const GridDensity&) const { return "grid"; }
    std::string operator()(const BernoulliConvolution&) const { return "bernoulli"; }
    std::string operator()(const Mixture&) const { return "mixture"; }
    std::string operator()(const LipschitzPushforward&) const { return "pushforward"; }
  } visitor;
  return std::visit(visitor, payload_);
}

// ---------------------------------------------------------------------------
// interval_mass

namespace {

void bernoulli_mass(double lambda, double radius, double a, double b, int depth, int cap,
                    double weight, IntervalMass& acc) {
  if (b < -radius || a > radius) return;
  if (a <= -radius && b >= radius) {
    acc.lower += weight;
    acc.upper += weight;
    return;
  }
  if (depth >= cap) {
    acc.upper += weight;
    return;
  }
  const double half = 0.5 * weight;
  bernoulli_mass(lambda, radius, (a + 1.0) / lambda, (b + 1.0) / lambda, depth + 1, cap, half, acc);
  bernoulli_mass(lambda, radius, (a - 1.0) / lambda, (b - 1.0) / lambda, depth + 1, cap, half, acc);
}

}  // namespace

IntervalMass interval_mass(const Measure& mu, double a, double b, int depth_cap) {
  if (!(a <= b)) throw std::invalid_argument("interval_mass: need a <= b");
  if (const auto* at = mu.as<Atomic>()) {
    double m = 0.0;
    for (std::size_t i = 0; i < at->positions.size(); ++i)
      if (at->positions[i] >= a && at->positions[i] <= b) m += at->weights[i];
    m = std::min(m, 1.0);
    return {m, m};
  }
  if (const auto* g = mu.as<GridDensity>()) {
    const double m = std::max(0.0, g->cdf(b) - g->cdf(a));
    return {m, m};
  }
  if (const auto* bc = mu.as<BernoulliConvolution>()) {
    IntervalMass acc;
    bernoulli_mass(bc->lambda, bc->radius(), a, b, 0, depth_cap, 1.0, acc);
    acc.lower = std::min(acc.lower, 1.0);
    acc.upper = std::min(acc.upper, 1.0);
    return acc;
  }
  if (const auto* mix = mu.as<Mixture>()) {
    IntervalMass acc;
    for (const auto& c : mix->components) {
      const auto part = interval_mass(*c.measure, a, b, depth_cap);
      acc.lower += c.weight * part.lower;
      acc.upper += c.weight * part.upper;
    }
    acc.lower = std::min(acc.lower, 1.0);
    acc.upper = std::min(acc.upper, 1.0);
    return acc;
  }
  const auto& pf = std::get<LipschitzPushforward>(mu.payload());
  double lo = pf.map.inverse(a);
  double hi = pf.map.inverse(b);
  if (!pf.map.increasing()) std::swap(lo, hi);
  return interval_mass(*pf.base, lo, hi, depth_cap);
}

// ---------------------------------------------------------------------------
// sampling

namespace {

int bernoulli_sampling_depth(double lambda) {
  int k = 0;
  while (std::pow(lambda, k + 1) / (1.0 - lambda) >= 1e-12) ++k;
  return k;
}

double sample_one(const Measure& mu, std::mt19937_64& rng, double& truncation) {
  if (const auto* at = mu.as<Atomic>()) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < at->weights.size(); ++i) {
      acc += at->weights[i];
      if (u < acc) return at->positions[i];
    }
    return at->positions.back();
  }
  if (const auto* g = mu.as<GridDensity>()) {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(g->cumulative.begin(), g->cumulative.end(), u);
    auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - g->cumulative.begin()) - 1));
    if (i >= g->values.size() - 1) i = g->values.size() - 2;
    // Solve v_i dx + slope dx^2 / 2 = u - cumulative[i] on the cell.
    const double r = u - g->cumulative[i];
    const double v = g->values[i];
    const double slope = (g->values[i + 1] - v) / g->step;
    double dx;
    if (std::abs(slope) < 1e-14) {
      dx = v > 0.0 ? r / v : 0.5 * g->step;
    } else {
      const double disc = std::max(0.0, v * v + 2.0 * slope * r);
      dx = 2.0 * r / (v + std::sqrt(disc));
    }
    return g->node(i) + std::clamp(dx, 0.0, g->step);
  }
  if (const auto* bc = mu.as<BernoulliConvolution>()) {
    const int depth = bernoulli_sampling_depth(bc->lambda);
    truncation = std::max(truncation, std::pow(bc->lambda, depth + 1) / (1.0 - bc->lambda));
    double x = 0.0;
    double scale = 1.0;
    std::uint64_t bits = 0;
    int left = 0;
    for (int k = 0; k <= depth; ++k) {
      if (left == 0) {
        bits = rng();
        left = 64;
      }
      x += (bits & 1u) ? scale : -scale;
      bits >>= 1;
      --left;
      scale *= bc->lambda;
    }
    return x;
  }
  if (const auto* mix = mu.as<Mixture>()) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (const auto& c : mix->components) {
      acc += c.weight;
      if (u < acc) return sample_one(*c.measure, rng, truncation);
    }
    return sample_one(*mix->components.back().measure, rng, truncation);
  }
  const auto& pf = std::get<LipschitzPushforward>(mu.payload());
  double base_trunc = 0.0;
  const double x = sample_one(*pf.base, rng, base_trunc);
  truncation = std::max(truncation, base_trunc * pf.map.upper());
  return pf.map(x);
}

}  // namespace

SampleBatch sample(const Measure& mu, std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
  SampleBatch batch;
  batch.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) batch.values.push_back(sample_one(mu, rng, batch.truncation_error));
  return batch;
}

// ---------------------------------------------------------------------------
// support queries

Interval support_bounds(const Measure& mu) {
  if (const auto* at = mu.as<Atomic>()) {
    const auto [lo, hi] = std::minmax_element(at->positions.begin(), at->positions.end());
    return {*lo, *hi};
  }
  if (const auto* g = mu.as<GridDensity>()) return {g->origin, g->end()};
  if (const auto* bc = mu.as<BernoulliConvolution>()) return {-bc->radius(), bc->radius()};
  if (const auto* mix = mu.as<Mixture>()) {
    Interval out{kInf, -kInf};
    for (const auto& c : mix->components) {
      const auto b = support_bounds(*c.measure);
      out.lo = std::min(out.lo, b.lo);
      out.hi = std::max(out.hi, b.hi);
    }
    return out;
  }
  const auto& pf = std::get<LipschitzPushforward>(mu.payload());
  const auto b = support_bounds(*pf.base);
  const double u = pf.map(b.lo);
  const double v = pf.map(b.hi);
  return {std::min(u, v), std::max(u, v)};
}

std::vector<double> bernoulli_cylinder_centres(double lambda, int depth) {
  std::vector<double> centres{0.0};
  // sum_{j<k} eps_j lambda^j = eps_0 + lambda * (sum over the remaining signs);
  // with lambda < 1/2 the eps_0 = -1 block lies entirely below the +1 block.
  for (int k = 0; k < depth; ++k) {
    std::vector<double> next;
    next.reserve(2 * centres.size());
    for (double c : centres) next.push_back(-1.0 + lambda * c);
    for (double c : centres) next.push_back(1.0 + lambda * c);
    centres = std::move(next);
  }
  return centres;
}

std::vector<Interval> support_cover(const Measure& mu, double resolution) {
  std::vector<Interval> out;
  if (const auto* at = mu.as<Atomic>()) {
    for (double x : at->positions) out.push_back({x, x});
  } else if (const auto* g = mu.as<GridDensity>()) {
    out.push_back({g->origin, g->end()});
  } else if (const auto* bc = mu.as<BernoulliConvolution>()) {
    int depth = 0;
    double half = bc->radius();
    while (half > resolution && depth < 18) {
      half *= bc->lambda;
      ++depth;
    }
    for (double c : bernoulli_cylinder_centres(bc->lambda, depth)) out.push_back({c - half, c + half});
  } else if (const auto* mix = mu.as<Mixture>()) {
    for (const auto& c : mix->components) {
      if (c.weight <= 0.0) continue;
      auto part = support_cover(*c.measure, resolution);
      out.insert(out.end(), part.begin(), part.end());
    }
  } else {
    const auto& pf = std::get<LipschitzPushforward>(mu.payload());
    for (const auto& iv : support_cover(*pf.base, resolution / pf.map.upper())) {
      const double u = pf.map(iv.lo);
      const double v = pf.map(iv.hi);
      out.push_back({std::min(u, v), std::max(u, v)});
    }
  }
  return merge_intervals(std::move(out));
}

std::vector<double> singular_points(const Measure& mu) {
  std::vector<double> out;
  if (const auto* at = mu.as<Atomic>()) {
    out = at->positions;
  } else if (const auto* g = mu.as<GridDensity>()) {
    for (std::size_t i = 0; i < g->values.size(); ++i) out.push_back(g->node(i));
  } else if (const auto* mix = mu.as<Mixture>()) {
    for (const auto& c : mix->components) {
      auto part = singular_points(*c.measure);
      out.insert(out.end(), part.begin(), part.end());
    }
  } else if (const auto* pf = mu.as<LipschitzPushforward>()) {
    for (double x : singular_points(*pf->base)) out.push_back(pf->map(x));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double expectation(const Measure& mu, const std::function<double(double)>& g, int depth) {
  if (const auto* at = mu.as<Atomic>()) {
    double s = 0.0;
    for (std::size_t i = 0; i < at->positions.size(); ++i) s += at->weights[i] * g(at->positions[i]);
    return s;
  }
  if (const auto* gd = mu.as<GridDensity>()) {
    // Adaptive per cell: g need not be smooth.
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < gd->values.size(); ++i) {
      const double a = gd->node(i), h = gd->step;
      const double v0 = gd->values[i], v1 = gd->values[i + 1];
      s += integrate({{a, a + h}}, [&](double x) { return (v0 + (v1 - v0) * (x - a) / h) * g(x); }, 1e-13, 12).value;
    }
    return s;
  }
  if (const auto* bc = mu.as<BernoulliConvolution>()) {
    const auto centres = bernoulli_cylinder_centres(bc->lambda, depth);
    double s = 0.0;
    for (double c : centres) s += g(c);
    return s / static_cast<double>(centres.size());
  }
  if (const auto* mix = mu.as<Mixture>()) {
    double s = 0.0;
    for (const auto& c : mix->components) s += c.weight * expectation(*c.measure, g, depth);
    return s;
  }
  const auto& pf = std::get<LipschitzPushforward>(mu.payload());
  const auto& map = pf.map;
  return expectation(*pf.base, [&](double x) { return g(map(x)); }, depth);
}

double lipschitz_upper(const Measure& mu) {
  if (const auto* mix = mu.as<Mixture>()) {
    double m = 1.0;
    for (const auto& c : mix->components) m = std::max(m, lipschitz_upper(*c.measure));
    return m;
  }
  if (const auto* pf = mu.as<LipschitzPushforward>()) return pf->map.upper() * lipschitz_upper(*pf->base);
  return 1.0;
}

}  // namespace entdim
