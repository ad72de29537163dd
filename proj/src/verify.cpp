#include "entdim/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "entdim/bochner.hpp"
#include "entdim/cli.hpp"
#include "entdim/dimension.hpp"
#include "entdim/entropy.hpp"
#include "entdim/fisher.hpp"
#include "entdim/freedim.hpp"
#include "entdim/measure_io.hpp"
#include "entdim/quadrature.hpp"
#include "entdim/smoothing.hpp"

namespace entdim {

std::vector<NamedMeasure> golden_matrix() {
  return {
      {"dirac", Measure::dirac(0.0), 0.0},
      {"uniform", Measure::uniform(0.0, 1.0), 1.0},
      {"cantor-1/4", Measure::bernoulli(0.25), 0.5},
      {"cantor-1/3", Measure::bernoulli(1.0 / 3.0), std::log(2.0) / std::log(3.0)},
      {"dirac-uniform", Measure::mixture({{0.5, Measure::dirac(0.0)}, {0.5, Measure::uniform(0.0, 1.0)}}), 0.5},
  };
}

std::vector<NamedMeasure> full_matrix() {
  auto m = golden_matrix();
  m.push_back({"cantor-1/4-pushed", Measure::pushforward(Measure::bernoulli(0.25), MapSpec::linear_sine(2.0, 0.0, 1.0)),
               0.5});
  m.push_back({"normal", Measure::normal(0.0, 1.0, 1e-2), 1.0});
  return m;
}

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void fail(const std::string& what) {
    if (failures_.size() < 3) failures_.push_back(what);
    passed = false;
  }
  // Failure reasons first, then any notes.
  std::string text() const {
    std::string out;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + f;
    const auto notes = detail.str();
    if (!notes.empty()) out += (out.empty() ? "" : " | ") + notes;
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
  }

 private:
  std::vector<std::string> failures_;
};

// Rounding allowance for comparisons that are exact in exact arithmetic.
constexpr double kRounding = 1e-9;

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

class Context {
 public:
  explicit Context(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed(std::uint64_t task) const { return derive_seed(seed_, task); }

  SmoothingOptions smoothing(std::uint64_t task) const {
    SmoothingOptions o;
    o.seed = seed(task);
    return o;
  }

  CurveOptions curve_options(std::uint64_t task) const {
    CurveOptions o;
    o.entropy.smoothing = smoothing(task);
    return o;
  }

  // Entropy-slope estimate with the Gaussian kernel on the default grid.
  const DimensionEstimate& entropy_estimate(const NamedMeasure& m) {
    auto it = entropy_.find(m.name);
    if (it == entropy_.end())
      it = entropy_.emplace(m.name, delta_c_entropy(m.measure, Kernel::gaussian(), default_entropy_grid(),
                                                    curve_options(0x100)))
               .first;
    return it->second;
  }

  const DimensionEstimate& fisher_estimate(const NamedMeasure& m) {
    auto it = fisher_.find(m.name);
    if (it == fisher_.end()) {
      FisherCurveOptions o;
      o.smoothing = smoothing(0x200);
      it = fisher_.emplace(m.name, delta_c_fisher(m.measure, default_s_grid(), o)).first;
    }
    return it->second;
  }

 private:
  std::uint64_t seed_;
  std::map<std::string, DimensionEstimate> entropy_;
  std::map<std::string, DimensionEstimate> fisher_;
};

using CheckFn = void (*)(Context&, Outcome&);

struct CheckDef {
  const char* suite;
  const char* name;
  CheckFn run;
};

// ---------------------------------------------------------------------------
// measure-core

void interval_mass_monotone_additive(Context& ctx, Outcome& o) {
  std::mt19937_64 rng(ctx.seed(1));
  for (const auto& m : full_matrix()) {
    const auto sb = support_bounds(*m.measure);
    std::uniform_real_distribution<double> pos(sb.lo - 0.1, sb.hi + 0.1);
    for (int trial = 0; trial < 20; ++trial) {
      double a = pos(rng), b = pos(rng);
      if (a > b) std::swap(a, b);
      const double inner = interval_mass(*m.measure, a + 0.25 * (b - a), b - 0.25 * (b - a)).value();
      const double outer = interval_mass(*m.measure, a, b).value();
      if (inner > outer + 1e-15) o.fail(m.name + ": nested intervals not monotone");
      // Partition [a, b) into 10 half-open pieces; the last one is closed.
      double sum = 0.0;
      for (int k = 0; k < 10; ++k) {
        const double lo = a + (b - a) * k / 10.0, hi = a + (b - a) * (k + 1) / 10.0;
        sum += interval_mass(*m.measure, lo, hi).value();
        if (k < 9) sum -= interval_mass(*m.measure, hi, hi).value();
      }
      if (std::abs(sum - outer) > 1e-9) o.fail(m.name + ": partition sum off by " + fmt(sum - outer));
    }
  }
}

void interval_mass_total(Context&, Outcome& o) {
  for (const auto& m : full_matrix()) {
    const auto sb = support_bounds(*m.measure);
    const double total = interval_mass(*m.measure, sb.lo, sb.hi).value();
    if (std::abs(total - 1.0) > 1e-9) o.fail(m.name + ": total mass " + fmt(total));
  }
}

void bernoulli_sign_sequences(Context& ctx, Outcome& o) {
  std::mt19937_64 rng(ctx.seed(2));
  for (double lambda : {0.25, 1.0 / 3.0}) {
    const int depth = 16;
    std::vector<double> pts;
    pts.reserve(std::size_t{1} << depth);
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << depth); ++bits) {
      double x = 0.0, scale = 1.0;
      for (int j = 0; j < depth; ++j) {
        x += ((bits >> j) & 1U) ? scale : -scale;
        scale *= lambda;
      }
      pts.push_back(x);
    }
    std::sort(pts.begin(), pts.end());
    const auto mu = Measure::bernoulli(lambda);
    std::uniform_real_distribution<double> pos(-1.6, 1.6), len(0.0, 1.5);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double a = pos(rng), b = a + len(rng);
      const auto n = std::upper_bound(pts.begin(), pts.end(), b) - std::lower_bound(pts.begin(), pts.end(), a);
      const double oracle = static_cast<double>(n) / static_cast<double>(pts.size());
      worst = std::max(worst, std::abs(interval_mass(*mu, a, b).value() - oracle));
    }
    if (worst > std::ldexp(1.0, -depth)) o.fail("lambda=" + fmt(lambda) + ": deviation " + fmt(worst));
    o.detail << "lambda=" << fmt(lambda) << " max dev " << fmt(worst) << " ";
  }
}

void pushforward_mass_identity(Context& ctx, Outcome& o) {
  std::mt19937_64 rng(ctx.seed(3));
  std::uniform_real_distribution<double> pos(-4.0, 4.0);
  for (const auto& base : {Measure::bernoulli(0.25), Measure::uniform(0.0, 1.0),
                           Measure::atomic({-1.0, 0.5, 2.0}, {0.2, 0.3, 0.5})}) {
    for (const auto& f : {MapSpec::linear_sine(2.0, 0.0, 1.0), MapSpec::affine(3.0, -1.0)}) {
      const auto pushed = Measure::pushforward(base, f);
      for (int i = 0; i < 50; ++i) {
        double a = pos(rng), b = pos(rng);
        if (a > b) std::swap(a, b);
        const double lhs = interval_mass(*pushed, a, b).value();
        const double rhs = interval_mass(*base, f.inverse(a), f.inverse(b)).value();
        if (lhs != rhs) o.fail(base->kind() + " under " + f.kind() + ": " + fmt(lhs) + " vs " + fmt(rhs));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// smoothing

void smoothing_total_mass(Context& ctx, Outcome& o) {
  for (const auto& m : full_matrix())
    for (const auto& k : {Kernel::gaussian(), Kernel::box(), Kernel::box01()})
      for (double t : {0.3, 1e-2}) {
        const SmoothedDensity sd(m.measure, k, t, ctx.smoothing(4));
        const auto r = integrate(sd.panels(), [&](double x) { return sd.density_at(x).value; }, 1e-12,
                                 sd.refine_depth());
        if (std::abs(r.value - 1.0) > 1e-4) o.fail(m.name + "/" + k.name() + " t=" + fmt(t) + ": " + fmt(r.value));
      }
  // Monte Carlo density: mass within 3 standard errors.
  SmoothingOptions mc = ctx.smoothing(5);
  mc.method = Method::monte_carlo;
  mc.mc_samples = 20000;
  const SmoothedDensity sd(Measure::bernoulli(0.25), Kernel::gaussian(), 0.05, mc);
  const auto r = integrate(sd.panels(), [&](double x) { return sd.density_at(x).value; }, 1e-10, sd.refine_depth());
  // Pair values are correlated across nodes; the node sum of SEs bounds the SE.
  double se = 0.0;
  for_each_node(sd.panels(), [&](double x, double w) { se += w * sd.density_at(x).std_error; });
  if (std::abs(r.value - 1.0) > 3.0 * se + 1e-4) o.fail("monte carlo mass " + fmt(r.value) + " se " + fmt(se));
}

void smoothing_score_finite_difference(Context& ctx, Outcome& o) {
  std::mt19937_64 rng(ctx.seed(6));
  for (const auto& m : full_matrix())
    for (double t : {0.3, 1e-2}) {
      const SmoothedDensity sd(m.measure, Kernel::gaussian(), t, ctx.smoothing(7));
      for (double x : sd.sample_smoothed(50, rng)) {
        const double h = 1e-4 * t;
        const double fd = (std::log(sd.density_at(x + h).value) - std::log(sd.density_at(x - h).value)) / (2.0 * h);
        const auto sc = sd.score_at(x);
        if (!sc) {
          o.fail(m.name + ": no score at a sampled point");
          continue;
        }
        if (std::abs(*sc - fd) > 1e-3 * std::max(std::abs(fd), 1.0 / t))
          o.fail(m.name + " t=" + fmt(t) + " x=" + fmt(x) + ": " + fmt(*sc) + " vs " + fmt(fd));
      }
    }
}

void smoothing_box_equals_interval_mass(Context& ctx, Outcome& o) {
  std::mt19937_64 rng(ctx.seed(8));
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  for (const auto& m : full_matrix())
    for (double t : {0.3, 1e-3}) {
      const SmoothedDensity sd(m.measure, Kernel::box(), t);
      for (int i = 0; i < 50; ++i) {
        const double x = pos(rng);
        if (sd.density_at(x).value != interval_mass(*m.measure, x - 0.5 * t, x + 0.5 * t).value() / t)
          o.fail(m.name + " x=" + fmt(x));
      }
    }
}

// ---------------------------------------------------------------------------
// entropy

void entropy_quadrature_vs_monte_carlo(Context& ctx, Outcome& o) {
  int checked = 0;
  for (const auto& m : full_matrix())
    for (const auto& k : {Kernel::gaussian(), Kernel::box(), Kernel::box01()})
      for (double t : {0.1, 1e-3}) {
        EntropyOptions eo;
        eo.smoothing = ctx.smoothing(9);
        const auto r = entropy(SmoothedDensity(m.measure, k, t, eo.smoothing), eo);
        ++checked;
        const double se = std::hypot(r.mc_stderr, r.error);
        if (!r.cross_checked || std::abs(r.value - r.mc_value) > 5.0 * se + kRounding * (1.0 + std::abs(r.value)))
          o.fail(m.name + "/" + k.name() + " t=" + fmt(t) + ": " + fmt(r.value) + " vs " + fmt(r.mc_value));
      }
  o.detail << checked << " pairs ";
}

void entropy_upper_bound_check(Context& ctx, Outcome& o) {
  for (const auto& m : full_matrix())
    for (const auto& k : {Kernel::gaussian(), Kernel::box(), Kernel::box01()}) {
      const auto c = entropy_curve(m.measure, k, t_grid(1e-4, 0.5, 8), ctx.curve_options(10));
      for (std::size_t i = 0; i < c.abscissa.size(); ++i)
        if (c.values[i] > entropy_upper_bound(k, c.abscissa[i]) + c.value_errors[i] + kRounding)
          o.fail(m.name + "/" + k.name() + " t=" + fmt(c.abscissa[i]));
    }
}

void entropy_lower_bound_check(Context& ctx, Outcome& o) {
  for (const auto& m : full_matrix())
    for (const auto& k : {Kernel::gaussian(), Kernel::box(), Kernel::box01()}) {
      const auto c = entropy_curve(m.measure, k, t_grid(1e-4, 1.0, 8), ctx.curve_options(11));
      const double lb = entropy_lower_bound(*m.measure, k);
      for (std::size_t i = 0; i < c.abscissa.size(); ++i)
        if (c.values[i] < lb - c.value_errors[i] - kRounding) o.fail(m.name + "/" + k.name() + " t=" + fmt(c.abscissa[i]));
    }
}

void entropy_shift_invariance(Context& ctx, Outcome& o) {
  EntropyOptions eo;
  eo.smoothing = ctx.smoothing(12);
  eo.check_samples = 0;
  for (const auto& m : full_matrix())
    for (const auto& k : {Kernel::gaussian(), Kernel::box()})
      for (double t : {0.1, 1e-3}) {
        const double a = entropy(SmoothedDensity(m.measure, k, t, eo.smoothing), eo).value;
        const auto shifted = Measure::pushforward(m.measure, MapSpec::affine(1.0, 0.375));
        const double b = entropy(SmoothedDensity(shifted, k, t, eo.smoothing), eo).value;
        if (std::abs(a - b) > 1e-9) o.fail(m.name + "/" + k.name() + " t=" + fmt(t) + ": diff " + fmt(a - b));
      }
}

void entropy_curve_slope_range(Context& ctx, Outcome& o) {
  for (const auto& m : full_matrix())
    for (const auto& k : {Kernel::gaussian(), Kernel::box()}) {
      const auto c = entropy_curve(m.measure, k, default_entropy_grid(), ctx.curve_options(13));
      if (c.fit.slope < -0.05 || c.fit.slope > 1.05) o.fail(m.name + "/" + k.name() + ": slope " + fmt(c.fit.slope));
    }
}

// ---------------------------------------------------------------------------
// dimension

void dimension_entropy_vs_fractal(Context& ctx, Outcome& o) {
  for (const auto& m : golden_matrix()) {
    const auto& e = ctx.entropy_estimate(m);
    FractalOptions fo;
    fo.seed = ctx.seed(14);
    const auto f = delta_c_fractal(m.measure, default_entropy_grid(), fo);
    const double conf = e.confidence + f.confidence + kRounding;
    o.detail << m.name << " " << fmt(e.value) << "/" << fmt(f.value) << " ";
    if (std::abs(e.value - f.value) > conf)
      o.fail(m.name + ": |" + fmt(e.value) + " - " + fmt(f.value) + "| > " + fmt(conf));
  }
}

void dimension_translation_dilation(Context& ctx, Outcome& o) {
  for (const auto& m : golden_matrix()) {
    const auto& base = ctx.entropy_estimate(m);
    for (const auto& f : {MapSpec::affine(1.0, 3.0), MapSpec::affine(2.0, 0.0)}) {
      const auto moved =
          delta_c_entropy(Measure::pushforward(m.measure, f), Kernel::gaussian(), default_entropy_grid(),
                          ctx.curve_options(0x100));
      const double conf = base.confidence + moved.confidence + kRounding;
      if (std::abs(base.value - moved.value) > conf)
        o.fail(m.name + " under x->" + fmt(f.params()[0]) + "x+" + fmt(f.params()[1]) + ": " + fmt(base.value) +
               " vs " + fmt(moved.value));
    }
  }
}

void dimension_mixture_monotone(Context& ctx, Outcome& o) {
  double previous = -1.0, previous_conf = 0.0;
  for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    std::vector<MixtureComponent> parts;
    if (w < 1.0) parts.push_back({1.0 - w, Measure::dirac(0.0)});
    if (w > 0.0) parts.push_back({w, Measure::uniform(0.0, 1.0)});
    const auto e = delta_c_entropy(Measure::mixture(parts), Kernel::gaussian(), default_entropy_grid(),
                                   ctx.curve_options(15));
    o.detail << "w=" << w << ":" << fmt(e.value) << " ";
    if (e.value < previous - (e.confidence + previous_conf)) o.fail("not increasing at uniform weight " + fmt(w));
    previous = e.value;
    previous_conf = e.confidence;
  }
}

void dimension_range(Context& ctx, Outcome& o) {
  for (const auto& m : golden_matrix()) {
    FractalOptions fo;
    fo.seed = ctx.seed(16);
    fo.samples = 10000;
    for (double v : {ctx.entropy_estimate(m).value, delta_c_fractal(m.measure, default_entropy_grid(), fo).value})
      if (v < -0.05 || v > 1.05) o.fail(m.name + ": " + fmt(v));
  }
}

// ---------------------------------------------------------------------------
// fisher

void fisher_bound(Context& ctx, Outcome& o) {
  for (const auto& m : full_matrix())
    for (double s : geometric_grid(1.0, 1e-8, 9)) {
      const auto f = fisher_direct(m.measure, s, ctx.smoothing(17));
      if (!(f.value >= 0.0) || s * f.value > 1.0 + 1e-6) o.fail(m.name + " s=" + fmt(s) + ": sF=" + fmt(s * f.value));
    }
}

void fisher_gram_psd(Context& ctx, Outcome& o) {
  for (const auto& m : golden_matrix())
    for (double s : {1e-6, 1e-2, 1.0}) {
      const SmoothedDensity sd(m.measure, Kernel::gaussian(), std::sqrt(s), ctx.smoothing(18));
      const auto A = basis_moments(sd, make_basis(BasisSpec{8, true, true}, sd)).A;
      const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
      const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
      if (asym > 0.0 || lo < -1e-12 * hi) o.fail(m.name + " s=" + fmt(s) + ": min eig " + fmt(lo));
    }
}

void fisher_variational_nested(Context& ctx, Outcome& o) {
  for (const auto& m : golden_matrix())
    for (double s : {1e-4, 1e-2, 1.0}) {
      const SmoothedDensity sd(m.measure, Kernel::gaussian(), std::sqrt(s), ctx.smoothing(19));
      const auto direct = fisher_direct(m.measure, s, ctx.smoothing(19));
      // The two sides come from different quadratures, each good to about 1e-8 relative.
      const double slack = 3.0 * direct.std_error + direct.error + 1e-8 * direct.value;
      auto basis = make_basis(BasisSpec{8, true, false}, sd);
      basis.add_log_density(sd);
      double previous = 0.0;
      for (std::size_t k = 1; k <= basis.size(); ++k) {
        const double v = fisher_variational(sd, basis.prefix(k)).value;
        if (v > direct.value + slack) o.fail(m.name + " s=" + fmt(s) + " k=" + std::to_string(k) + ": above direct");
        if (v < previous - 1e-8 * std::max(previous, 1.0))
          o.fail(m.name + " s=" + fmt(s) + " k=" + std::to_string(k) + ": decreased");
        previous = v;
      }
    }
}

void fisher_de_bruijn(Context& ctx, Outcome& o) {
  auto ms = golden_matrix();
  ms.push_back({"normal", Measure::normal(0.0, 1.0, 1e-2), 1.0});
  for (const auto& m : ms)
    for (double s : {0.01, 0.1, 0.5}) {
      const auto d = de_bruijn_check(m.measure, s, 0.01 * s, ctx.smoothing(20));
      if (!d.holds) o.fail(m.name + " s=" + fmt(s) + ": " + fmt(d.lhs) + " vs " + fmt(d.rhs));
    }
}

void fisher_route_agreement(Context& ctx, Outcome& o) {
  for (const auto& m : golden_matrix()) {
    const auto& e = ctx.entropy_estimate(m);
    const auto& f = ctx.fisher_estimate(m);
    const double conf = e.confidence + f.confidence + kRounding;
    o.detail << m.name << " " << fmt(f.value) << " ";
    if (std::abs(e.value - f.value) > conf)
      o.fail(m.name + ": |" + fmt(f.value) + " - " + fmt(e.value) + "| > " + fmt(conf));
  }
}

// ---------------------------------------------------------------------------
// bochner

void bochner_K_monotone(Context& ctx, Outcome& o) {
  for (const auto& m : golden_matrix())
    for (double eps : {1e-6, 1e-3, 0.1}) {
      const SmoothedDensity sd(m.measure, Kernel::gaussian(), std::sqrt(eps), ctx.smoothing(21));
      const auto basis = make_basis(BasisSpec{8, false, true}, sd);
      const auto full = basis_moments(sd, basis);
      double previous = INFINITY;
      for (double n : default_n_grid()) {
        const double k = optimal_K(full, n).value;
        if (k > previous * (1.0 + 1e-9)) o.fail(m.name + " eps=" + fmt(eps) + ": increases at n=" + fmt(n));
        previous = k;
      }
      for (double n : {0.05, 0.3}) {
        double last = 0.0;
        for (std::size_t k = 1; k <= basis.size(); ++k) {
          const double v = optimal_K(basis_moments(sd, basis.prefix(k)), n).value;
          if (v < last * (1.0 - 1e-6)) o.fail(m.name + " eps=" + fmt(eps) + ": decreases under nesting");
          last = v;
        }
      }
    }
}

void bochner_K_zero_large_n(Context& ctx, Outcome& o) {
  int cells = 0;
  for (const auto& m : full_matrix())
    for (double eps : geometric_grid(1.0, 1e-8, 5)) {
      const SmoothedDensity sd(m.measure, Kernel::gaussian(), std::sqrt(eps), ctx.smoothing(22));
      const auto mom = basis_moments(sd, make_basis(BasisSpec{8, true, true}, sd));
      for (double n : {1.0, 1.5, 3.0, 10.0}) {
        ++cells;
        const double k = optimal_K(mom, n).value;
        if (k != 0.0) o.fail(m.name + " eps=" + fmt(eps) + " n=" + fmt(n) + ": K=" + fmt(k));
      }
    }
  o.detail << cells << " cells ";
}

void bochner_route_agreement(Context& ctx, Outcome& o) {
  for (const auto& m : golden_matrix()) {
    BochnerOptions bo;
    bo.smoothing = ctx.smoothing(23);
    const auto b = delta_square(m.measure, default_s_grid(), default_n_grid(), bo);
    const auto& e = ctx.entropy_estimate(m);
    const double conf = e.confidence + b.confidence + kRounding;
    o.detail << m.name << " " << fmt(b.value) << " ";
    if (std::abs(e.value - b.value) > conf)
      o.fail(m.name + ": |" + fmt(b.value) + " - " + fmt(e.value) + "| > " + fmt(conf));
  }
}

void bochner_fisher_family(Context& ctx, Outcome& o) {
  for (const auto& m : golden_matrix()) {
    BochnerOptions bo;
    bo.smoothing = ctx.smoothing(24);
    const auto scan = bochner_scan(m.measure, default_s_grid(), default_n_grid(), bo);
    std::vector<double> x;
    for (double e : scan.eps) x.push_back(std::abs(std::log(e)));
    double family_best = INFINITY;
    for (std::size_t j = 0; j < scan.n.size(); ++j) {
      std::vector<double> col;
      for (std::size_t i = 0; i < scan.eps.size(); ++i) col.push_back(scan.K_family[i][j]);
      const auto fit = least_squares(x, log_trapezoid_tail(scan.eps, col), scan.window);
      const double objective = scan.n[j] * (1.0 + std::max(0.0, fit.slope));
      family_best = std::min(family_best, objective);
      if (scan.objective[scan.best] > objective + 2.0 * scan.n[j] * fit.slope_stderr + 1e-12)
        o.fail(m.name + ": scan minimum above family member at n=" + fmt(scan.n[j]));
    }
    // The family alone tends to 1 - n - (1 - n) * slope(F), i.e. the Fisher
    // route, as n goes to 0.
    const auto& f = ctx.fisher_estimate(m);
    const double n0 = scan.n.front();
    if (std::abs((1.0 - family_best) - f.value) > n0 + f.confidence * (1.0 + n0) + 1e-9)
      o.fail(m.name + ": family " + fmt(1.0 - family_best) + " vs fisher " + fmt(f.value));
  }
}

// ---------------------------------------------------------------------------
// freedim

MeasurePtr random_atomic(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 6), site(0, 7);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::vector<double> pos, w;
  const int k = count(rng);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    pos.push_back(site(rng));
    w.push_back(unit(rng));
    total += w.back();
  }
  for (auto& x : w) x /= total;
  return Measure::atomic(pos, w);
}

void freedim_superaffine(Context& ctx, Outcome& o) {
  std::mt19937_64 rng(ctx.seed(25));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_atomic(rng), b = random_atomic(rng);
    const double w = unit(rng);
    if (w == 0.0) continue;
    const double lhs = free_dimension_single(*Measure::mixture({{w, a}, {1.0 - w, b}}));
    const double rhs = w * free_dimension_single(*a) + (1.0 - w) * free_dimension_single(*b);
    if (lhs < rhs - 1e-14) o.fail("trial " + std::to_string(trial) + ": " + fmt(lhs) + " < " + fmt(rhs));
  }
  // Equality case: both components carry the same atom masses.
  const auto a = Measure::atomic({0.0, 1.0, 5.0}, {0.2, 0.3, 0.5});
  const double mixed = free_dimension_single(*Measure::mixture({{0.3, a}, {0.7, a}}));
  if (std::abs(mixed - free_dimension_single(*a)) > 1e-15) o.fail("equality case");
  // Distinct atoms: strict inequality.
  const auto d0 = Measure::dirac(0.0), d1 = Measure::dirac(1.0);
  if (!(free_dimension_single(*Measure::mixture({{0.5, d0}, {0.5, d1}})) > 0.0)) o.fail("strict case");
}

void freedim_range(Context& ctx, Outcome& o) {
  std::mt19937_64 rng(ctx.seed(26));
  for (int trial = 0; trial < 100; ++trial) {
    const double v = free_dimension_single(*random_atomic(rng));
    if (v < 0.0 || v > 1.0) o.fail(fmt(v));
  }
  for (const auto& m : full_matrix()) {
    const double v = free_dimension_single(*m.measure);
    if (v < 0.0 || v > 1.0) o.fail(m.name + ": " + fmt(v));
  }
}

void freedim_equal_atoms(Context&, Outcome& o) {
  for (int k = 1; k <= 10; ++k) {
    std::vector<double> pos, w(static_cast<std::size_t>(k), 1.0 / k);
    for (int i = 0; i < k; ++i) pos.push_back(i);
    const double v = free_dimension_single(*Measure::atomic(pos, w));
    if (std::abs(v - (1.0 - 1.0 / k)) > 1e-15) o.fail("k=" + std::to_string(k) + ": " + fmt(v));
  }
}

// ---------------------------------------------------------------------------
// cli

int run_captured(const std::vector<std::string>& args, std::string& out, std::string& err) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  out = o.str();
  err = e.str();
  return code;
}

void cli_deterministic(Context& ctx, Outcome& o) {
  const auto dir = std::filesystem::temp_directory_path() / ("entdim-verify-" + std::to_string(ctx.seed(27)));
  std::filesystem::create_directories(dir);
  const auto spec = (dir / "cantor.json").string();
  {
    std::ofstream f(spec);
    f << measure_to_json(*Measure::mixture({{0.5, Measure::bernoulli(0.25)}, {0.5, Measure::uniform(0.0, 1.0)}}))
             .dump(2);
  }
  const std::string seed = std::to_string(ctx.seed(28) % 1000000);
  const std::vector<std::vector<std::string>> commands{
      {"entropy-curve", "--measure", spec, "--points", "8", "--seed", seed, "--out", "-"},
      {"dimension", "--measure", spec, "--method", "fractal", "--samples", "2000", "--seed", seed, "--out", "-"},
      {"fisher", "--measure", spec, "--points", "6", "--seed", seed, "--out", "-"},
      {"freedim", "--measure", spec},
  };
  for (const auto& cmd : commands) {
    std::string out1, out2, err;
    const int c1 = run_captured(cmd, out1, err);
    const int c2 = run_captured(cmd, out2, err);
    if (c1 == 2 || out1.empty()) o.fail(cmd[0] + ": exit " + std::to_string(c1) + " " + err);
    if (c1 != c2 || out1 != out2) o.fail(cmd[0] + ": outputs differ");
  }
  std::filesystem::remove_all(dir);
}

void cli_errors(Context& ctx, Outcome& o) {
  const auto dir = std::filesystem::temp_directory_path() / ("entdim-verify-" + std::to_string(ctx.seed(29)));
  std::filesystem::create_directories(dir);
  const auto bad = (dir / "bad.json").string();
  {
    std::ofstream f(bad);
    f << R"({"type": "mixture", "components": [{"weight": 1.0, "measure": {"type": "bernoulli", "lambda": 0.7}}]})";
  }
  std::string out, err;
  if (run_captured({"freedim", "--measure", bad}, out, err) != 2 || err.find("components[0].measure.lambda") == std::string::npos)
    o.fail("malformed spec did not name the field: " + err);
  if (run_captured({"no-such-command"}, out, err) != 2) o.fail("unknown subcommand not a usage error");
  if (run_captured({"entropy-curve", "--measure", bad, "--tmin", "0.5", "--tmax", "0.1"}, out, err) != 2)
    o.fail("inverted grid not a usage error");
  std::filesystem::remove_all(dir);
}

const std::vector<CheckDef>& registry() {
  static const std::vector<CheckDef> checks{
      {"measure-core", "interval_mass.monotone_additive", interval_mass_monotone_additive},
      {"measure-core", "interval_mass.total", interval_mass_total},
      {"measure-core", "bernoulli.sign_sequence_oracle", bernoulli_sign_sequences},
      {"measure-core", "pushforward.mass_identity", pushforward_mass_identity},
      {"smoothing", "density.total_mass", smoothing_total_mass},
      {"smoothing", "score.finite_difference", smoothing_score_finite_difference},
      {"smoothing", "box.density_is_interval_mass", smoothing_box_equals_interval_mass},
      {"entropy", "entropy.quadrature_vs_monte_carlo", entropy_quadrature_vs_monte_carlo},
      {"entropy", "entropy.upper_bound", entropy_upper_bound_check},
      {"entropy", "entropy.lower_bound", entropy_lower_bound_check},
      {"entropy", "entropy.shift_invariance", entropy_shift_invariance},
      {"entropy", "entropy_curve.slope_range", entropy_curve_slope_range},
      {"dimension", "dimension.entropy_vs_fractal", dimension_entropy_vs_fractal},
      {"dimension", "dimension.translation_dilation", dimension_translation_dilation},
      {"dimension", "dimension.mixture_monotone", dimension_mixture_monotone},
      {"dimension", "dimension.range", dimension_range},
      {"fisher", "fisher.bound", fisher_bound},
      {"fisher", "fisher.gram_psd", fisher_gram_psd},
      {"fisher", "fisher.variational_nested", fisher_variational_nested},
      {"fisher", "fisher.de_bruijn", fisher_de_bruijn},
      {"fisher", "fisher.route_agreement", fisher_route_agreement},
      {"bochner", "bochner.K_monotone", bochner_K_monotone},
      {"bochner", "bochner.K_zero_for_n_ge_1", bochner_K_zero_large_n},
      {"bochner", "bochner.route_agreement", bochner_route_agreement},
      {"bochner", "bochner.fisher_family", bochner_fisher_family},
      {"freedim", "freedim.superaffine", freedim_superaffine},
      {"freedim", "freedim.range", freedim_range},
      {"freedim", "freedim.equal_atoms", freedim_equal_atoms},
      {"cli", "cli.deterministic_output", cli_deterministic},
      {"cli", "cli.error_reporting", cli_errors},
  };
  return checks;
}

}  // namespace

std::vector<std::string> verify_suites() {
  return {"measure-core", "smoothing", "entropy", "dimension", "fisher", "bochner", "freedim", "cli"};
}

std::vector<std::string> verify_checks(const std::string& suite) {
  std::vector<std::string> names;
  for (const auto& c : registry())
    if (suite == "all" || suite == c.suite) names.push_back(c.name);
  return names;
}

std::vector<CheckResult> run_verify(const VerifyOptions& options,
                                    const std::function<void(const CheckResult&)>& progress) {
  const auto suites = verify_suites();
  if (options.suite != "all" && std::find(suites.begin(), suites.end(), options.suite) == suites.end())
    throw std::invalid_argument("unknown suite '" + options.suite + "'");
  Context ctx(options.seed);
  std::vector<CheckResult> results;
  for (const auto& c : registry()) {
    if (options.suite != "all" && options.suite != c.suite) continue;
    CheckResult r;
    r.suite = c.suite;
    r.name = c.name;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      c.run(ctx, o);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = o.passed;
    r.detail = o.text();
    results.push_back(r);
    if (progress) progress(results.back());
  }
  return results;
}

}  // namespace entdim
