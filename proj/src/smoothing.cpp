#include "entdim/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "entdim/quadrature.hpp"
#include "entdim/regression.hpp"

namespace entdim {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kInvSqrt2 = 0.707106781186547524400844362105;
// Gaussian tails beyond 8 standard deviations carry < 1.3e-15 of the mass.
constexpr double kGaussReach = 8.0;
// Evaluation window; slightly wider than the region so region edges are exact.
constexpr double kGaussWindow = 9.0;

double std_normal_pdf(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

// Phi(u1) - Phi(u0) for u0 <= u1 without cancellation in the tails.
double normal_mass(double u0, double u1) {
  if (u0 >= 0.0) return 0.5 * (std::erfc(u0 * kInvSqrt2) - std::erfc(u1 * kInvSqrt2));
  if (u1 <= 0.0) return 0.5 * (std::erfc(-u1 * kInvSqrt2) - std::erfc(-u0 * kInvSqrt2));
  return 1.0 - 0.5 * (std::erfc(-u0 * kInvSqrt2) + std::erfc(u1 * kInvSqrt2));
}

int method_rank(Method m) {
  switch (m) {
    case Method::automatic: return 0;
    case Method::closed_form: return 1;
    case Method::exact_box: return 1;
    case Method::enumerated: return 2;
    case Method::quadrature: return 3;
    case Method::monte_carlo: return 4;
  }
  return 0;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::automatic: return "automatic";
    case Method::exact_box: return "exact-box";
    case Method::closed_form: return "closed-form";
    case Method::enumerated: return "enumerated";
    case Method::quadrature: return "quadrature";
    case Method::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Kernel

Kernel Kernel::box(double a, double b) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("box kernel: need a < b");
  return Kernel(BoxKernel{a, b});
}

Kernel Kernel::histogram(double origin, double step, std::vector<double> values) {
  if (!(step > 0.0) || values.empty()) throw std::invalid_argument("histogram kernel: need step > 0 and values");
  double total = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("histogram kernel: values must be finite and >= 0");
    total += v * step;
  }
  if (!(total > 0.0)) throw std::invalid_argument("histogram kernel: zero mass");
  for (auto& v : values) v /= total;
  return Kernel(HistogramKernel{origin, step, std::move(values)});
}

Kernel Kernel::parse(const std::string& flag) {
  if (flag == "gauss" || flag == "gaussian") return gaussian();
  if (flag == "box") return box();
  if (flag == "box01") return box01();
  if (flag.rfind("file:", 0) == 0) {
    const auto path = flag.substr(5);
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("kernel: cannot open " + path);
    nlohmann::json doc;
    try {
      in >> doc;
      return histogram(doc.at("origin").get<double>(), doc.at("step").get<double>(),
                       doc.at("values").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("kernel: malformed histogram file " + path + ": " + e.what());
    }
  }
  throw std::invalid_argument("kernel: unknown choice '" + flag + "' (gauss|box|box01|file:PATH)");
}

std::string Kernel::name() const {
  if (is_gaussian()) return "gauss";
  if (const auto* b = std::get_if<BoxKernel>(&payload_)) {
    if (b->a == -0.5 && b->b == 0.5) return "box";
    if (b->a == 0.0 && b->b == 1.0) return "box01";
    return "box[" + std::to_string(b->a) + "," + std::to_string(b->b) + "]";
  }
  return "histogram";
}

double Kernel::entropy() const {
  if (is_gaussian()) return -0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  if (const auto* b = std::get_if<BoxKernel>(&payload_)) return -std::log(b->b - b->a);
  const auto& h = std::get<HistogramKernel>(payload_);
  double s = 0.0;
  for (double v : h.values)
    if (v > 0.0) s += h.step * v * std::log(v);
  return s;
}

Interval Kernel::extent() const {
  if (is_gaussian()) return {-kGaussReach, kGaussReach};
  if (const auto* b = std::get_if<BoxKernel>(&payload_)) return {b->a, b->b};
  const auto& h = std::get<HistogramKernel>(payload_);
  return {h.origin, h.origin + h.step * static_cast<double>(h.values.size())};
}

double Kernel::density(double u) const {
  if (is_gaussian()) return std_normal_pdf(u);
  if (const auto* b = std::get_if<BoxKernel>(&payload_)) return (u >= b->a && u <= b->b) ? 1.0 / (b->b - b->a) : 0.0;
  const auto& h = std::get<HistogramKernel>(payload_);
  if (u < h.origin) return 0.0;
  const auto j = static_cast<std::size_t>((u - h.origin) / h.step);
  return j < h.values.size() ? h.values[j] : 0.0;
}

double Kernel::log_moment() const {
  const auto ext = extent();
  std::vector<double> cuts{0.0};
  if (const auto* h = std::get_if<HistogramKernel>(&payload_))
    for (std::size_t j = 0; j <= h->values.size(); ++j) cuts.push_back(h->origin + h->step * static_cast<double>(j));
  std::sort(cuts.begin(), cuts.end());
  const auto panels = make_panels({ext}, cuts, 0.25);
  return integrate(panels, [&](double u) { return std::log1p(std::abs(u)) * density(u); }, 1e-13).value;
}

double Kernel::draw(std::mt19937_64& rng) const {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  if (is_gaussian()) {
    std::normal_distribution<double> n01;
    return n01(rng);
  }
  if (const auto* b = std::get_if<BoxKernel>(&payload_)) return b->a + (b->b - b->a) * u;
  const auto& h = std::get<HistogramKernel>(payload_);
  double acc = 0.0;
  for (std::size_t j = 0; j < h.values.size(); ++j) {
    const double cell = h.values[j] * h.step;
    if (u < acc + cell || j + 1 == h.values.size())
      return h.origin + h.step * (static_cast<double>(j) + std::clamp((u - acc) / cell, 0.0, 1.0));
    acc += cell;
  }
  return h.origin;
}

// ---------------------------------------------------------------------------
// Gaussian representation: weighted atoms with individual widths, piecewise
// linear grids, and antithetic Monte Carlo groups.

struct SmoothedDensity::GaussianRep {
  struct Atom {
    double x;
    double w;
    double sigma;
  };
  struct Grid {
    double weight;
    MeasurePtr owner;
    const GridDensity* grid;
  };
  struct Paired {
    double weight;
    std::vector<double> draws;  // sorted; each y stands for the pair (y, -y)
  };

  double t = 1.0;
  std::vector<Atom> atoms;
  std::vector<double> atom_x;
  double max_sigma = 0.0;
  std::vector<Grid> grids;
  std::vector<Paired> paired;

  DensityJet eval(double x) const;
};

DensityJet SmoothedDensity::GaussianRep::eval(double x) const {
  DensityJet out;
  if (!atoms.empty()) {
    const double reach = kGaussWindow * max_sigma;
    auto lo = std::lower_bound(atom_x.begin(), atom_x.end(), x - reach) - atom_x.begin();
    auto hi = std::upper_bound(atom_x.begin(), atom_x.end(), x + reach) - atom_x.begin();
    for (auto i = lo; i < hi; ++i) {
      const auto& a = atoms[static_cast<std::size_t>(i)];
      const double inv = 1.0 / a.sigma;
      const double z = (x - a.x) * inv;
      const double phi = a.w * inv * std_normal_pdf(z);
      out.p += phi;
      out.dp -= z * inv * phi;
      out.d2p += (z * z - 1.0) * inv * inv * phi;
    }
  }
  for (const auto& g : grids) {
    const auto& gd = *g.grid;
    const double h = gd.step;
    const auto n = static_cast<std::ptrdiff_t>(gd.values.size());
    auto i0 = static_cast<std::ptrdiff_t>(std::floor((x - kGaussWindow * t - gd.origin) / h));
    auto i1 = static_cast<std::ptrdiff_t>(std::ceil((x + kGaussWindow * t - gd.origin) / h));
    i0 = std::max<std::ptrdiff_t>(i0, 0);
    i1 = std::min<std::ptrdiff_t>(i1, n - 1);
    double p = 0.0, dp = 0.0, d2p = 0.0;
    for (auto i = i0; i < i1; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double x0 = gd.node(k);
      const double g0 = gd.values[k];
      const double g1 = gd.values[k + 1];
      const double beta = (g1 - g0) / h;
      const double u0 = (x0 - x) / t;
      const double u1 = (x0 + h - x) / t;
      const double phi0 = std_normal_pdf(u0);
      const double phi1 = std_normal_pdf(u1);
      const double mass = normal_mass(u0, u1);
      const double level = g0 + beta * (x - x0);
      p += level * mass + beta * t * (phi0 - phi1);
      dp += beta * mass + (g0 * phi0 - g1 * phi1) / t;
      d2p += -beta * (phi1 - phi0) / t + (g0 * u0 * phi0 - g1 * u1 * phi1) / (t * t);
    }
    out.p += g.weight * p;
    out.dp += g.weight * dp;
    out.d2p += g.weight * d2p;
  }
  double var = 0.0;
  for (const auto& grp : paired) {
    const auto& y = grp.draws;
    const double m = static_cast<double>(y.size());
    const double reach = kGaussWindow * t;
    auto range = [&](double c) {
      return std::pair{std::lower_bound(y.begin(), y.end(), c - reach) - y.begin(),
                       std::upper_bound(y.begin(), y.end(), c + reach) - y.begin()};
    };
    auto [a0, a1] = range(x);
    auto [b0, b1] = range(-x);
    double s = 0.0, s2 = 0.0, sd = 0.0, sdd = 0.0;
    auto visit = [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
      for (auto i = lo; i < hi; ++i) {
        const double yi = y[static_cast<std::size_t>(i)];
        const double za = (x - yi) / t;
        const double zb = (x + yi) / t;
        const double pa = std_normal_pdf(za) / t;
        const double pb = std_normal_pdf(zb) / t;
        const double v = 0.5 * (pa + pb);
        s += v;
        s2 += v * v;
        sd += 0.5 * (-za * pa - zb * pb) / t;
        sdd += 0.5 * ((za * za - 1.0) * pa + (zb * zb - 1.0) * pb) / (t * t);
      }
    };
    if (b0 < a1 && a0 < b1) {
      visit(std::min(a0, b0), std::max(a1, b1));
    } else {
      visit(a0, a1);
      visit(b0, b1);
    }
    const double mean = s / m;
    const double pair_var = std::max(0.0, s2 / m - mean * mean);
    out.p += grp.weight * mean;
    out.dp += grp.weight * sd / m;
    out.d2p += grp.weight * sdd / m;
    var += grp.weight * grp.weight * pair_var / m;
  }
  out.std_error = std::sqrt(var);
  return out;
}

namespace {

using Rep = SmoothedDensity::GaussianRep;

struct FlattenContext {
  double t;
  const SmoothingOptions& options;
  Rep& rep;
  Method worst = Method::closed_form;
  std::uint64_t component = 0;
  std::vector<const MapSpec*> chain;  // outermost first

  void note(Method m) {
    if (method_rank(m) > method_rank(worst)) worst = m;
  }

  // Image of y through the pushforward chain and the chain's derivative at y.
  std::pair<double, double> apply(double y) const {
    double d = 1.0;
    for (std::size_t k = chain.size(); k-- > 0;) {
      d *= chain[k]->derivative(y);
      y = (*chain[k])(y);
    }
    return {y, d};
  }

  double chain_upper() const {
    double m = 1.0;
    for (const auto* f : chain) m *= f->upper();
    return m;
  }
};

void flatten(const MeasurePtr& mu, double weight, FlattenContext& ctx) {
  if (weight <= 0.0) return;
  const double t = ctx.t;
  if (const auto* at = mu->as<Atomic>()) {
    for (std::size_t i = 0; i < at->positions.size(); ++i) {
      if (at->weights[i] <= 0.0) continue;
      ctx.rep.atoms.push_back({ctx.apply(at->positions[i]).first, weight * at->weights[i], t});
    }
    return;
  }
  if (const auto* g = mu->as<GridDensity>()) {
    if (ctx.chain.empty()) {
      ctx.rep.grids.push_back({weight, mu, g});
      return;
    }
    if (std::all_of(ctx.chain.begin(), ctx.chain.end(), [](const MapSpec* f) { return f->kind() == "affine"; })) {
      // An affine image of a grid density is again a grid density.
      const auto [offset, slope] = ctx.apply(0.0);
      std::vector<double> values(g->values.size());
      for (std::size_t i = 0; i < values.size(); ++i) values[i] = g->values[i] / std::abs(slope);
      if (slope < 0.0) std::reverse(values.begin(), values.end());
      const double origin = slope > 0.0 ? slope * g->origin + offset : slope * g->end() + offset;
      auto image = Measure::grid(origin, std::abs(slope) * g->step, std::move(values));
      const auto* ig = image->as<GridDensity>();
      ctx.rep.grids.push_back({weight, std::move(image), ig});
      return;
    }
    ctx.note(Method::quadrature);
    const double spacing = ctx.options.discretization_ratio * t / ctx.chain_upper();
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(g->step / spacing)));
    const double h = g->step / static_cast<double>(pieces);
    for (std::size_t i = 0; i + 1 < g->values.size(); ++i) {
      const double v0 = g->values[i];
      const double dv = g->values[i + 1] - v0;
      if (v0 == 0.0 && dv == 0.0) continue;
      for (std::size_t k = 0; k < pieces; ++k) {
        const double frac = (static_cast<double>(k) + 0.5) / static_cast<double>(pieces);
        const double mass = h * (v0 + dv * frac);
        if (mass <= 0.0) continue;
        ctx.rep.atoms.push_back({ctx.apply(g->node(i) + frac * g->step).first, weight * mass, t});
      }
    }
    return;
  }
  if (const auto* bc = mu->as<BernoulliConvolution>()) {
    const std::uint64_t comp = ctx.component++;
    if (ctx.options.method == Method::monte_carlo && ctx.chain.empty()) {
      ctx.note(Method::monte_carlo);
      std::mt19937_64 rng(derive_seed(ctx.options.seed, comp));
      const auto pairs = std::max<std::size_t>(1, ctx.options.mc_samples / 2);
      auto draws = sample(*mu, pairs, rng).values;
      std::sort(draws.begin(), draws.end());
      ctx.rep.paired.push_back({weight, std::move(draws)});
      return;
    }
    ctx.note(Method::enumerated);
    const double tail_unit = 1.0 / std::sqrt(1.0 - bc->lambda * bc->lambda);
    const double stretch = ctx.chain_upper();
    int depth = 0;
    double scale = 1.0;
    while (depth < ctx.options.max_enumeration_depth &&
           stretch * scale * tail_unit > ctx.options.enumeration_ratio * t) {
      scale *= bc->lambda;
      ++depth;
    }
    const double tail_sd = scale * tail_unit;
    const double w = weight / std::ldexp(1.0, depth);
    for (double c : bernoulli_cylinder_centres(bc->lambda, depth)) {
      const auto [x, d] = ctx.apply(c);
      const double extra = d * tail_sd;
      ctx.rep.atoms.push_back({x, w, std::sqrt(t * t + extra * extra)});
    }
    return;
  }
  if (const auto* mix = mu->as<Mixture>()) {
    for (const auto& c : mix->components) flatten(c.measure, weight * c.weight, ctx);
    return;
  }
  const auto& pf = std::get<LipschitzPushforward>(mu->payload());
  ctx.chain.push_back(&pf.map);
  flatten(pf.base, weight, ctx);
  ctx.chain.pop_back();
}

}  // namespace

// ---------------------------------------------------------------------------
// SmoothedDensity

SmoothedDensity::SmoothedDensity(MeasurePtr mu, Kernel kernel, double t, SmoothingOptions options)
    : mu_(std::move(mu)), kernel_(std::move(kernel)), t_(t), options_(options) {
  if (!mu_) throw std::invalid_argument("smoothed density: measure missing");
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("smoothed density: t must be positive");

  if (!kernel_.is_gaussian()) {
    if (options_.method != Method::automatic && options_.method != Method::exact_box)
      throw std::invalid_argument("smoothed density: box and histogram kernels use exact interval masses");
    method_ = Method::exact_box;
    const auto ext = kernel_.extent();
    std::vector<Interval> region;
    for (const auto& iv : support_cover(*mu_, t)) region.push_back({iv.lo + t * ext.lo, iv.hi + t * ext.hi});
    region_ = merge_intervals(std::move(region));
    std::vector<double> edges;
    if (const auto* b = std::get_if<BoxKernel>(&kernel_.payload())) {
      edges = {b->a, b->b};
    } else {
      const auto& h = std::get<HistogramKernel>(kernel_.payload());
      for (std::size_t j = 0; j <= h.values.size(); ++j) edges.push_back(h.origin + h.step * static_cast<double>(j));
    }
    // p_t is rough only while a window edge crosses the support, so the
    // edges of a fine support cover (and of each singular point) bound the
    // rough stretches.
    std::vector<double> marks = singular_points(*mu_);
    for (const auto& iv : support_cover(*mu_, t / 16.0)) {
      marks.push_back(iv.lo);
      marks.push_back(iv.hi);
    }
    for (double s : marks)
      for (double e : edges) breakpoints_.push_back(s + t * e);
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
    panel_width_ = t * (ext.hi - ext.lo) / 8.0;
    refine_depth_ = 3;
    return;
  }

  auto rep = std::make_shared<GaussianRep>();
  rep->t = t;
  FlattenContext ctx{t, options_, *rep, Method::closed_form, 0, {}};
  flatten(mu_, 1.0, ctx);
  method_ = ctx.worst;
  std::sort(rep->atoms.begin(), rep->atoms.end(), [](const auto& l, const auto& r) { return l.x < r.x; });
  rep->atom_x.reserve(rep->atoms.size());
  std::vector<Interval> region;
  for (const auto& a : rep->atoms) {
    rep->atom_x.push_back(a.x);
    rep->max_sigma = std::max(rep->max_sigma, a.sigma);
    region.push_back({a.x - kGaussReach * a.sigma, a.x + kGaussReach * a.sigma});
  }
  for (const auto& g : rep->grids) region.push_back({g.grid->origin - kGaussReach * t, g.grid->end() + kGaussReach * t});
  for (const auto& grp : rep->paired)
    for (double y : grp.draws) {
      region.push_back({y - kGaussReach * t, y + kGaussReach * t});
      region.push_back({-y - kGaussReach * t, -y + kGaussReach * t});
    }
  region_ = merge_intervals(std::move(region));
  panel_width_ = t;
  refine_depth_ = 10;
  gauss_ = std::move(rep);
}

DensityValue SmoothedDensity::density_at(double x) const {
  if (gauss_) {
    const auto j = gauss_->eval(x);
    DensityValue v{std::max(0.0, j.p), j.std_error, false};
    v.low_confidence = j.std_error > options_.mc_se_ceiling * v.value && j.std_error > 0.0;
    return v;
  }
  const auto& mu = *mu_;
  if (const auto* b = std::get_if<BoxKernel>(&kernel_.payload())) {
    const auto m = interval_mass(mu, x - t_ * b->b, x - t_ * b->a);
    const double scale = t_ * (b->b - b->a);
    DensityValue v{m.value() / scale, 0.5 * (m.upper - m.lower) / scale, false};
    v.low_confidence = !m.exact() && v.std_error > options_.mc_se_ceiling * v.value;
    return v;
  }
  const auto& h = std::get<HistogramKernel>(kernel_.payload());
  DensityValue v;
  for (std::size_t j = 0; j < h.values.size(); ++j) {
    if (h.values[j] == 0.0) continue;
    const double u0 = h.origin + h.step * static_cast<double>(j);
    const auto m = interval_mass(mu, x - t_ * (u0 + h.step), x - t_ * u0);
    v.value += h.values[j] * m.value() / t_;
    v.std_error += h.values[j] * 0.5 * (m.upper - m.lower) / t_;
  }
  v.low_confidence = v.std_error > options_.mc_se_ceiling * v.value && v.std_error > 0.0;
  return v;
}

DensityJet SmoothedDensity::jet(double x) const {
  if (!gauss_) throw std::invalid_argument("smoothed density: derivatives need a Gaussian kernel");
  return gauss_->eval(x);
}

std::optional<double> SmoothedDensity::score_at(double x) const {
  const auto j = jet(x);
  if (!(j.p > kDensityFloor)) return std::nullopt;
  return j.dp / j.p;
}

std::vector<Interval> SmoothedDensity::panels() const { return make_panels(region_, breakpoints_, panel_width_); }

std::vector<double> SmoothedDensity::sample_smoothed(std::size_t n, std::mt19937_64& rng) const {
  auto base = sample(*mu_, n, rng).values;
  for (auto& y : base) y += t_ * kernel_.draw(rng);
  return base;
}

}  // namespace entdim
