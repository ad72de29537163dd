// One line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "entdim/bochner.hpp"
#include "entdim/dimension.hpp"
#include "entdim/entropy.hpp"
#include "entdim/fisher.hpp"
#include "entdim/freedim.hpp"
#include "entdim/verify.hpp"

using namespace entdim;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream msg;

  void require(bool ok) { pass = pass && ok; }
};

std::string f4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string g3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

const MapSpec kTwoXSinX = MapSpec::linear_sine(2.0, 0.0, 1.0);

MeasurePtr dirac() { return Measure::dirac(0.0); }
MeasurePtr uniform() { return Measure::uniform(0.0, 1.0); }
MeasurePtr cantor(double lambda) { return Measure::bernoulli(lambda); }

DimensionEstimate by_entropy(const MeasurePtr& mu, const Kernel& k = Kernel::gaussian()) {
  return delta_c_entropy(mu, k, default_entropy_grid());
}

DimensionEstimate by_fractal(const MeasurePtr& mu) { return delta_c_fractal(mu, default_entropy_grid()); }

void c01(Verdict& v) {
  const auto e = by_entropy(dirac()), f = by_fractal(dirac());
  v.require(std::abs(e.value) <= 0.05 && std::abs(f.value) <= 0.05);
  v.msg << "delta_c(dirac): entropy " << f4(e.value) << ", fractal " << f4(f.value) << " (target 0 +- 0.05)";
}

void c02(Verdict& v) {
  const auto e = by_entropy(uniform()), f = by_fractal(uniform());
  v.require(std::abs(e.value - 1.0) <= 0.05 && std::abs(f.value - 1.0) <= 0.05);
  v.msg << "delta_c(U[0,1]): entropy " << f4(e.value) << ", fractal " << f4(f.value) << " (target 1 +- 0.05)";
}

// Scaling exponent of the depth-16 sign-sequence truncation: mean -log mass
// of balls of radius lambda^k R around enumerated points, against -log radius.
double enumeration_exponent(double lambda) {
  const int depth = 16;
  std::vector<double> pts;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << depth); ++bits) {
    double x = 0.0, scale = 1.0;
    for (int j = 0; j < depth; ++j) {
      x += ((bits >> j) & 1U) ? scale : -scale;
      scale *= lambda;
    }
    pts.push_back(x);
  }
  std::sort(pts.begin(), pts.end());
  std::mt19937_64 rng(16);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  std::vector<double> xs, ys;
  for (int k = 2; k <= 10; ++k) {
    const double r = std::pow(lambda, k) / (1.0 - lambda);
    double acc = 0.0;
    for (int i = 0; i < 500; ++i) {
      const double y = pts[pick(rng)];
      const auto n = std::upper_bound(pts.begin(), pts.end(), y + r) - std::lower_bound(pts.begin(), pts.end(), y - r);
      acc -= std::log(static_cast<double>(n) / static_cast<double>(pts.size()));
    }
    xs.push_back(-std::log(r));
    ys.push_back(acc / 500.0);
  }
  return least_squares(xs, ys).slope;
}

void c03(Verdict& v) {
  const double o4 = enumeration_exponent(0.25), o3 = enumeration_exponent(1.0 / 3.0);
  const auto f4e = by_fractal(cantor(0.25)), f3e = by_fractal(cantor(1.0 / 3.0));
  v.require(std::abs(o4 - 0.5) <= 1e-3 && std::abs(o3 - 0.6309) <= 1e-3);
  v.require(std::abs(f4e.value - 0.5) <= 0.05 && std::abs(f3e.value - 0.6309) <= 0.05);
  v.msg << "fractal route: lambda=1/4 " << f4(f4e.value) << " (enumeration oracle " << f4(o4) << "), lambda=1/3 "
        << f4(f3e.value) << " (oracle " << f4(o3) << "), tol 0.05";
}

void c04(Verdict& v) {
  const auto r = affinity_report({{0.5, dirac()}, {0.5, uniform()}}, Kernel::gaussian(), default_entropy_grid());
  v.require(std::abs(r.lhs - 0.5) <= 0.07 && r.holds);
  v.msg << "delta_c(mix) " << f4(r.lhs) << " vs 0.5 +- 0.07; half-sum " << f4(r.rhs) << ", |diff| "
        << g3(std::abs(r.lhs - r.rhs)) << " <= combined confidence " << g3(r.combined_confidence);
}

void c05(Verdict& v) {
  double worst = 0.0;
  for (const auto& mu : {dirac(), uniform(), cantor(0.25)}) {
    const double d = std::abs(by_entropy(mu, Kernel::gaussian()).value - by_entropy(mu, Kernel::box()).value);
    worst = std::max(worst, d);
    v.msg << g3(d) << " ";
  }
  v.require(worst <= 0.05);
  v.msg << "(|gauss - box| on dirac, uniform, cantor-1/4; max " << g3(worst) << " <= 0.05)";
}

void c06(Verdict& v) {
  double worst = 0.0;
  for (const auto& mu : {dirac(), uniform(), cantor(0.25)}) {
    const double d = std::abs(by_entropy(mu).value - by_entropy(Measure::pushforward(mu, kTwoXSinX)).value);
    worst = std::max(worst, d);
    v.msg << g3(d) << " ";
  }
  v.require(worst <= 0.07);
  v.msg << "(|delta(mu) - delta(f*mu)| for f = 2x + sin x; max " << g3(worst) << " <= 0.07)";
}

void c07(Verdict& v) {
  double worst_dirac = 0.0, worst_ratio = 0.0;
  bool nonneg = true;
  for (double s : default_s_grid()) {
    const double f = fisher_direct(dirac(), s).value;
    nonneg = nonneg && f >= 0.0;
    worst_dirac = std::max(worst_dirac, std::abs(s * f - 1.0));
  }
  for (const auto& m : full_matrix())
    for (double s : default_s_grid()) {
      const double f = fisher_direct(m.measure, s).value;
      nonneg = nonneg && f >= 0.0;
      worst_ratio = std::max(worst_ratio, s * f);
    }
  v.require(nonneg && worst_dirac <= 0.02 && worst_ratio <= 1.05);
  v.msg << "max |sF(dirac) - 1| " << g3(worst_dirac) << " <= 0.02; max sF over matrix " << f4(worst_ratio)
        << " <= 1.05; F >= 0 " << (nonneg ? "yes" : "no");
}

void c08(Verdict& v) {
  double worst = 0.0;
  for (const auto& mu : {dirac(), Measure::normal(0.0, 1.0, 1e-2), uniform()})
    for (double s : {0.01, 0.1, 0.5}) {
      const auto d = de_bruijn_check(mu, s, 0.01 * s);
      worst = std::max(worst, std::abs(d.lhs - d.rhs) / std::abs(d.rhs));
    }
  v.require(worst <= 0.05);
  v.msg << "max relative residual |dH/ds + F/2| / (F/2) " << g3(worst) << " <= 0.05";
}

void c09(Verdict& v) {
  double worst = 0.0;
  for (const auto& m : golden_matrix()) {
    const double d = std::abs(delta_c_fisher(m.measure, default_s_grid()).value - by_entropy(m.measure).value);
    worst = std::max(worst, d);
    v.msg << m.name << " " << g3(d) << ", ";
  }
  v.require(worst <= 0.1);
  v.msg << "max |fisher - entropy| " << g3(worst) << " <= 0.1";
}

void c10(Verdict& v) {
  double worst = 0.0;
  for (double var : {0.5, 1.0, 2.0}) {
    const double f = fisher_variational(dirac(), var, BasisSpec{}).value;
    worst = std::max(worst, std::abs(f * var - 1.0));
  }
  v.require(worst <= 0.01);
  v.msg << "8-function Hermite basis on N(0, s), s in {0.5, 1, 2}: max relative error " << g3(worst) << " <= 0.01";
}

void c11(Verdict& v) {
  double worst = 0.0;
  std::size_t cells = 0, nonzero = 0;
  for (const auto& mu : {dirac(), uniform(), cantor(0.25)}) {
    const auto scan = bochner_scan(mu, default_s_grid(), default_n_grid());
    const double d = std::abs(delta_square(scan).value - by_entropy(mu).value);
    worst = std::max(worst, d);
    v.msg << g3(d) << " ";
    for (double eps : default_s_grid()) {
      const SmoothedDensity sd(mu, Kernel::gaussian(), std::sqrt(eps));
      const auto m = basis_moments(sd, make_basis(BochnerOptions{}.basis, sd));
      for (double n : {1.0, 1.5, 2.0, 4.0}) {
        ++cells;
        nonzero += optimal_K(m, n).value != 0.0;
      }
    }
  }
  v.require(worst <= 0.1 && nonzero == 0);
  v.msg << "(|delta_square - entropy| on dirac, uniform, cantor-1/4; max " << g3(worst) << " <= 0.1); K = 0 in "
        << cells - nonzero << "/" << cells << " cells with n >= 1";
}

void c12(Verdict& v) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> count(1, 8);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = count(rng);
    std::vector<double> pos, w;
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      pos.push_back(static_cast<double>(i) + unit(rng) * 0.5);
      w.push_back(unit(rng));
      total += w.back();
    }
    double sq = 0.0;
    for (auto& x : w) {
      x /= total;
      sq += x * x;
    }
    worst = std::max(worst, std::abs(free_dimension_single(*Measure::atomic(pos, w)) - (1.0 - sq)));
  }
  const double two = free_dimension_single(*Measure::atomic({0.0, 1.0}, {0.5, 0.5}));
  v.require(worst <= 4.0 * std::numeric_limits<double>::epsilon() && two == 0.5);
  v.msg << "100 random atomic measures: max |value - (1 - sum m^2)| " << g3(worst) << "; half/half two atoms -> " << two;
}

void c13(Verdict& v) {
  std::size_t points = 0, violations = 0;
  for (const auto& m : full_matrix())
    for (const auto& k : {Kernel::gaussian(), Kernel::box(), Kernel::box01()}) {
      const auto c = entropy_curve(m.measure, k, default_entropy_grid());
      const double lb = entropy_lower_bound(*m.measure, k);
      for (std::size_t i = 0; i < c.abscissa.size(); ++i) {
        ++points;
        const double slack = c.value_errors[i] + 1e-9;
        if (c.values[i] > entropy_upper_bound(k, c.abscissa[i]) + slack || c.values[i] < lb - slack) ++violations;
      }
    }
  const auto sat = epi_check(Measure::normal(0.0, 1.0, 1e-3), Kernel::gaussian(), 0.5);
  const double sat_rel = std::abs(sat.lhs - sat.rhs) / sat.rhs;
  bool epi = sat.holds;
  for (const auto& m : golden_matrix()) epi = epi && epi_check(m.measure, Kernel::gaussian(), 0.1).holds;
  v.require(violations == 0 && epi && sat_rel <= 1e-6);
  v.msg << "bounds hold at " << points - violations << "/" << points << " curve points; EPI "
        << (epi ? "holds" : "fails") << ", Gaussian saturation rel. gap " << g3(sat_rel) << " <= 1e-6";
}

// The cross term H(mix_t) - sum H(a_i p_i), with the unnormalised component
// entropies H(a p) = a H(p) + a log a, is what the sandwich bounds; it is zero
// for disjoint supports. The gap against normalised components is reported too.
void c14(Verdict& v) {
  const std::vector<MixtureComponent> parts{{0.5, Measure::dirac(0.0)}, {0.5, Measure::dirac(10.0)}};
  const double upper = 1.0 + 0.5 * std::log(0.5) * 2.0;
  for (const auto& k : {Kernel::box(), Kernel::gaussian()})
    for (double t : {0.1, 0.01}) {
      const auto g = affinity_gap(parts, k, t);
      v.require(g.cross >= -g.error - 1e-12 && g.cross <= upper + g.error);
      v.msg << k.name() << " t=" << t << ": " << g3(g.cross) << "; ";
    }
  const auto g = affinity_gap(parts, Kernel::box(), 0.01);
  v.msg << "0 <= value <= " << f4(upper) << " (normalised-component gap " << f4(g.gap) << ")";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;  // seconds
    std::function<void(Verdict&)> run;
  };
  const std::vector<Criterion> criteria{
      {"dirac has dimension 0", 30, c01},
      {"uniform has dimension 1", 60, c02},
      {"Cantor measures", 180, c03},
      {"affinity", 120, c04},
      {"kernel independence", 300, c05},
      {"Lipschitz invariance", 300, c06},
      {"Fisher bound", 120, c07},
      {"de Bruijn identity", 120, c08},
      {"Fisher route agreement", 300, c09},
      {"variational Fisher on Gaussians", 30, c10},
      {"Bochner route", 600, c11},
      {"free dimension", 5, c12},
      {"entropy sandwich and EPI", 120, c13},
      {"affinity-gap sandwich", 60, c14},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].run(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.msg << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= criteria[i].budget;
    const bool ok = v.pass && in_time;
    failed += ok ? 0 : 1;
    std::printf("[%s] %2zu %-32s %s [%.1fs / %.0fs%s]\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].name,
                v.msg.str().c_str(), secs, criteria[i].budget, in_time ? "" : " over budget");
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed ? 1 : 0;
}
