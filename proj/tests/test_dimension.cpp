#include <doctest.h>

#include <cmath>

#include "entdim/dimension.hpp"

using namespace entdim;

namespace {
const auto kGrid = default_entropy_grid();
}

TEST_CASE("entropy-slope estimates") {
  CHECK(delta_c_entropy(Measure::dirac(0.0), Kernel::gaussian(), kGrid).value == doctest::Approx(0.0).epsilon(0.05).scale(1));
  const auto u = delta_c_entropy(Measure::uniform(0.0, 1.0), Kernel::gaussian(), kGrid);
  CHECK(std::abs(u.value - 1.0) <= 0.05);
  CHECK_FALSE(u.flagged);
  const auto c = delta_c_entropy(Measure::bernoulli(0.25), Kernel::gaussian(), kGrid);
  CHECK(std::abs(c.value - 0.5) <= 0.05);
  CHECK(c.curve.fit.r2 >= 0.95);
  CHECK(c.confidence > 0.0);
}

TEST_CASE("fractal-average estimates") {
  FractalOptions opt;
  opt.samples = 5000;
  CHECK(delta_c_fractal(Measure::dirac(0.0), kGrid, opt).value == 0.0);
  CHECK(std::abs(delta_c_fractal(Measure::uniform(0.0, 1.0), kGrid, opt).value - 1.0) <= 0.05);
  const auto c = delta_c_fractal(Measure::bernoulli(1.0 / 3.0), kGrid, opt);
  CHECK(std::abs(c.value - std::log(2.0) / std::log(3.0)) <= 0.05);
  // Same seed, same answer.
  CHECK(delta_c_fractal(Measure::bernoulli(0.25), kGrid, opt).value ==
        delta_c_fractal(Measure::bernoulli(0.25), kGrid, opt).value);
}

TEST_CASE("kernel independence") {
  const auto r = kernel_independence_report(Measure::uniform(0.0, 1.0),
                                            {Kernel::gaussian(), Kernel::box(), Kernel::box01()}, kGrid);
  REQUIRE(r.estimates.size() == 3);
  for (const auto& e : r.estimates) CHECK(std::abs(e.value - 1.0) <= 0.05);
  CHECK(r.holds);
  CHECK_THROWS_AS(kernel_independence_report(Measure::dirac(0.0), {Kernel::gaussian()}, kGrid), std::invalid_argument);
}

TEST_CASE("affinity") {
  const auto one = affinity_report({{1.0, Measure::uniform(0.0, 1.0)}}, Kernel::gaussian(), kGrid);
  CHECK(one.lhs == doctest::Approx(one.rhs));
  const auto half = affinity_report({{0.5, Measure::dirac(0.0)}, {0.5, Measure::uniform(0.0, 1.0)}}, Kernel::box(), kGrid);
  CHECK(std::abs(half.lhs - 0.5) <= 0.07);
  CHECK(half.holds);
  const auto mixed = affinity_report({{0.5, Measure::bernoulli(0.25)}, {0.5, Measure::uniform(2.0, 3.0)}},
                                     Kernel::gaussian(), kGrid);
  CHECK(std::abs(mixed.lhs - 0.75) <= 0.07);
}

TEST_CASE("Lipschitz invariance") {
  const auto f = MapSpec::linear_sine(2.0, 0.0, 1.0);
  const auto a = lipschitz_invariance_report(Measure::dirac(0.0), f, Kernel::gaussian(), kGrid);
  CHECK(std::abs(a.base.value - a.pushed.value) <= 1e-6);
  const auto b = lipschitz_invariance_report(Measure::uniform(0.0, 1.0), MapSpec::affine(3.0, 1.0), Kernel::gaussian(), kGrid);
  CHECK(std::abs(b.pushed.value - 1.0) <= 0.05);
  const auto c = lipschitz_invariance_report(Measure::bernoulli(0.25), f, Kernel::gaussian(), kGrid);
  CHECK(std::abs(c.base.value - c.pushed.value) <= 0.07);
}
