#include <doctest.h>

#include <cmath>

#include "entdim/entropy.hpp"

using namespace entdim;

namespace {
const double kGaussH = -0.5 * std::log(2.0 * M_PI * M_E);
}

TEST_CASE("closed-form entropies") {
  CHECK(*entropy_unsmoothed(*Measure::uniform(0.0, 1.0)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*entropy_unsmoothed(*Measure::normal(0.0, 1.0)) == doctest::Approx(kGaussH).epsilon(1e-6));
  CHECK_FALSE(entropy_unsmoothed(*Measure::dirac(0.0)).has_value());
  const auto h = entropy(SmoothedDensity(Measure::dirac(0.0), Kernel::box(), 0.01));
  CHECK(h.value == doctest::Approx(4.605170185988091).epsilon(1e-10));
  CHECK_FALSE(h.flagged);
  const auto g = entropy(SmoothedDensity(Measure::dirac(0.0), Kernel::gaussian(), 1.0));
  CHECK(g.value == doctest::Approx(kGaussH).epsilon(1e-9));
}

TEST_CASE("quadrature and Monte Carlo entropies agree") {
  const std::vector<MeasurePtr> measures{
      Measure::dirac(0.0), Measure::uniform(0.0, 1.0), Measure::bernoulli(0.25),
      Measure::mixture({{0.5, Measure::dirac(0.0)}, {0.5, Measure::uniform(0.0, 1.0)}}),
      Measure::pushforward(Measure::bernoulli(1.0 / 3.0), MapSpec::linear_sine(2.0, 0.0, 1.0))};
  for (const auto& mu : measures)
    for (const auto& k : {Kernel::gaussian(), Kernel::box(), Kernel::box01()})
      for (double t : {0.1, 1e-3}) {
        const auto h = entropy(SmoothedDensity(mu, k, t));
        CAPTURE(mu->kind());
        CAPTURE(k.name());
        CAPTURE(t);
        CHECK(h.cross_checked);
        CHECK_FALSE(h.flagged);
        CHECK(h.value <= entropy_upper_bound(k, t) + 1e-8);
        CHECK(h.value >= entropy_lower_bound(*mu, k));
      }
}

TEST_CASE("entropy is shift invariant") {
  const auto mu = Measure::bernoulli(0.25);
  const auto shifted = Measure::pushforward(mu, MapSpec::affine(1.0, 3.7));
  for (const auto& k : {Kernel::gaussian(), Kernel::box()}) {
    const double a = entropy(SmoothedDensity(mu, k, 0.01)).value;
    const double b = entropy(SmoothedDensity(shifted, k, 0.01)).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
  }
}

TEST_CASE("entropy curves") {
  const auto dirac = entropy_curve(Measure::dirac(0.0), Kernel::box(), default_entropy_grid());
  CHECK(dirac.fit.slope == doctest::Approx(1.0).epsilon(0.01));
  const auto uni = entropy_curve(Measure::uniform(0.0, 1.0), Kernel::gaussian(), t_grid(1e-3, 1e-1, 25));
  CHECK(std::abs(uni.fit.slope) <= 0.05);
  const auto cantor = entropy_curve(Measure::bernoulli(0.25), Kernel::box(), t_grid(1e-5, 1e-1, 25));
  CHECK(cantor.fit.slope == doctest::Approx(0.5).epsilon(0.1));
  CHECK(cantor.fit.r2 >= 0.95);
}

TEST_CASE("entropy power inequality") {
  const auto gauss = epi_check(Measure::normal(0.0, 1.0), Kernel::gaussian(), 0.5);
  CHECK_FALSE(gauss.singular);
  CHECK(gauss.lhs == doctest::Approx(2 * M_PI * M_E * 1.25).epsilon(1e-6));
  CHECK(std::abs(gauss.lhs - gauss.rhs) <= 1e-6 * gauss.rhs);
  const auto dirac = epi_check(Measure::dirac(0.0), Kernel::gaussian(), 0.1);
  CHECK(dirac.singular);
  CHECK(dirac.rhs == doctest::Approx(kGaussH + std::log(10.0)));
  CHECK(dirac.holds);
  const auto uni = epi_check(Measure::uniform(0.0, 1.0), Kernel::gaussian(), 0.2);
  CHECK(uni.holds);
  CHECK(uni.lhs > uni.rhs);
}

TEST_CASE("affinity gap") {
  const auto single = affinity_gap({{1.0, Measure::uniform(0.0, 1.0)}}, Kernel::gaussian(), 0.1);
  CHECK(single.gap == doctest::Approx(0.0).scale(1.0));
  for (double t : {0.1, 0.01}) {
    const auto disjoint = affinity_gap({{0.5, Measure::dirac(0.0)}, {0.5, Measure::dirac(10.0)}}, Kernel::box(), t);
    CHECK(disjoint.cross == doctest::Approx(0.0).scale(1.0));
    CHECK(disjoint.gap == doctest::Approx(-std::log(2.0)));
    CHECK(disjoint.gap <= disjoint.upper);
    CHECK(disjoint.upper == doctest::Approx(1.0 - std::log(2.0)));
  }
  const auto same = affinity_gap({{0.5, Measure::uniform(0.0, 1.0)}, {0.5, Measure::uniform(0.0, 1.0)}},
                                 Kernel::gaussian(), 0.1);
  CHECK(same.gap == doctest::Approx(0.0).scale(1.0));
  CHECK(same.cross == doctest::Approx(std::log(2.0)));
}
