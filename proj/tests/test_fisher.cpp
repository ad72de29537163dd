#include <doctest.h>

#include <cmath>

#include "entdim/fisher.hpp"

using namespace entdim;

TEST_CASE("direct Fisher information") {
  CHECK(fisher_direct(Measure::dirac(0.0), 0.25).value == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(fisher_direct(Measure::normal(0.0, 1.0), 1.0).value == doctest::Approx(0.5).epsilon(1e-6));
  const auto f = fisher_direct(Measure::bernoulli(0.25), 0.01);
  CHECK(f.value > 0.0);
  CHECK(f.value <= 100.0);
  const auto mc = fisher_monte_carlo(Measure::bernoulli(0.25), 0.01, 20000, 42);
  CHECK(std::abs(f.value - mc.value) <= 3.0 * mc.std_error);
  CHECK_THROWS_AS(fisher_direct(Measure::dirac(0.0), 0.0), std::invalid_argument);
}

TEST_CASE("Fisher bound 0 <= sF <= 1") {
  for (const auto& mu : {Measure::dirac(0.0), Measure::uniform(0.0, 1.0), Measure::bernoulli(1.0 / 3.0),
                         Measure::mixture({{0.5, Measure::dirac(0.0)}, {0.5, Measure::uniform(0.0, 1.0)}})})
    for (double s : {1e-6, 1e-3, 0.1, 1.0}) {
      const auto f = fisher_direct(mu, s);
      CHECK(f.value >= 0.0);
      CHECK(s * f.value <= 1.0 + 1e-6);
      CHECK_FALSE(f.bound_violation);
    }
}

TEST_CASE("variational Fisher information") {
  const BasisSpec quad{0, true, false};
  CHECK(fisher_variational(Measure::dirac(0.0), 1.0, quad).value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fisher_variational(Measure::dirac(0.0), 4.0, quad).value == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(fisher_variational(Measure::uniform(0.0, 1.0), 0.1, BasisSpec{0, false, false}).value == 0.0);
  for (double var : {0.5, 1.0, 2.0})
    CHECK(fisher_variational(Measure::dirac(0.0), var, BasisSpec{}).value == doctest::Approx(1.0 / var).epsilon(0.01));

  // Lower bound on the direct value, nondecreasing as the basis grows.
  const auto mu = Measure::bernoulli(0.25);
  const SmoothedDensity sd(mu, Kernel::gaussian(), 0.1);
  const auto full = make_basis(BasisSpec{8, false, false}, sd);
  const double direct = fisher_direct(mu, 0.01).value;
  double previous = 0.0;
  for (std::size_t k = 0; k <= full.size(); ++k) {
    const double v = fisher_variational(sd, full.prefix(k)).value;
    CHECK(v >= previous - 1e-9 * direct);
    CHECK(v <= direct * (1.0 + 1e-6));
    previous = v;
  }
  auto with_score = full;
  with_score.add_log_density(sd);
  CHECK(fisher_variational(sd, with_score).value == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("de Bruijn identity") {
  const auto d = de_bruijn_check(Measure::dirac(0.0), 0.5, 1e-3);
  CHECK(d.lhs == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(d.holds);
  const auto n = de_bruijn_check(Measure::normal(0.0, 1.0), 1.0, 1e-3);
  CHECK(n.lhs == doctest::Approx(-0.25).epsilon(1e-4));
  const auto u = de_bruijn_check(Measure::uniform(0.0, 1.0), 0.01, 1e-4);
  CHECK(std::abs(u.lhs - u.rhs) <= 0.05 * std::abs(u.rhs));
}

TEST_CASE("Fisher route to the entropy dimension") {
  CHECK(std::abs(delta_c_fisher(Measure::dirac(0.0), default_s_grid()).value) <= 0.05);
  CHECK(std::abs(delta_c_fisher(Measure::uniform(0.0, 1.0), default_s_grid()).value - 1.0) <= 0.07);
  CHECK(std::abs(delta_c_fisher(Measure::bernoulli(0.25), default_s_grid()).value - 0.5) <= 0.1);
}

TEST_CASE("log-coordinate trapezoid") {
  const auto s = geometric_grid(1.0, 1e-4, 9);
  const std::vector<double> f(s.size(), 0.0);
  std::vector<double> inv;
  for (double x : s) inv.push_back(1.0 / x);
  const auto I = log_trapezoid_tail(s, inv);
  CHECK(I.back() == doctest::Approx(std::log(1e4)));
  CHECK(log_trapezoid_tail(s, f).back() == 0.0);
}

TEST_CASE("Dudley diagnostic") {
  // A point mass is at distance E|Z| sqrt(t) from its smoothing; any coupling gives that as an upper bound.
  for (double t : {1e-2, 1e-1}) {
    const double exact = std::sqrt(2.0 * t / std::acos(-1.0));
    const auto d = dudley_diagnostic(Measure::dirac(0.0), t, 0.0);
    CHECK(d.distance == doctest::Approx(exact).epsilon(1e-4));
    CHECK(d.reference == doctest::Approx(std::sqrt(t)));
    for (const auto& mu : {Measure::uniform(0.0, 1.0), Measure::bernoulli(0.25)}) {
      const auto e = dudley_diagnostic(mu, t, 0.5);
      CHECK(e.distance > 0.0);
      CHECK(e.distance <= exact * (1.0 + 1e-4));
    }
  }
  CHECK(dudley_diagnostic(Measure::uniform(0.0, 1.0), 1e-2, 1.0).reference == 0.0);
}
