#include <doctest.h>

#include <random>

#include "entdim/freedim.hpp"

using namespace entdim;

TEST_CASE("atom profiles") {
  const auto d = atom_profile(*Measure::dirac(0.0));
  REQUIRE(d.atoms.size() == 1);
  CHECK(d.atoms[0].mass == 1.0);
  CHECK(d.continuous_mass == 0.0);
  const auto u = atom_profile(*Measure::uniform(0.0, 1.0));
  CHECK(u.atoms.empty());
  CHECK(u.continuous_mass == 1.0);
  const auto merged = atom_profile(*Measure::mixture({{0.5, Measure::dirac(0.0)},
                                                      {0.25, Measure::atomic({0.0, 2.0}, {0.5, 0.5})},
                                                      {0.25, Measure::bernoulli(0.25)}}));
  REQUIRE(merged.atoms.size() == 2);
  CHECK(merged.atoms[0].mass == 0.625);
  CHECK(merged.atoms[1].mass == 0.125);
  CHECK(merged.continuous_mass == 0.25);
  const auto pushed = atom_profile(*Measure::pushforward(Measure::dirac(1.0), MapSpec::affine(3.0, 1.0)));
  CHECK(pushed.atoms[0].position == 4.0);
}

TEST_CASE("free dimension") {
  CHECK(free_dimension_single(*Measure::atomic({0.0, 1.0}, {0.5, 0.5})) == 0.5);
  CHECK(free_dimension_single(*Measure::dirac(0.0)) == 0.0);
  CHECK(free_dimension_single(*Measure::bernoulli(0.25)) == 1.0);
  for (int k = 1; k <= 10; ++k) {
    std::vector<double> pos, w(k, 1.0 / k);
    for (int i = 0; i < k; ++i) pos.push_back(i);
    CHECK(free_dimension_single(*Measure::atomic(pos, w)) == doctest::Approx(1.0 - 1.0 / k).epsilon(1e-15));
  }
}

TEST_CASE("free dimension is superaffine") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> site(0, 5);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  auto random_atomic = [&] {
    std::vector<double> pos, w;
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
      pos.push_back(site(rng));
      w.push_back(unit(rng));
      total += w.back();
    }
    for (auto& x : w) x /= total;
    return Measure::atomic(pos, w);
  };
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_atomic(), b = random_atomic();
    const double alpha = unit(rng);
    const double mixed = free_dimension_single(*Measure::mixture({{alpha, a}, {1.0 - alpha, b}}));
    CHECK(mixed >= alpha * free_dimension_single(*a) + (1.0 - alpha) * free_dimension_single(*b) - 1e-15);
  }
  // Equality when both components have the same atom masses.
  const auto a = Measure::atomic({0.0, 1.0}, {0.3, 0.7});
  CHECK(free_dimension_single(*Measure::mixture({{0.4, a}, {0.6, a}})) == doctest::Approx(free_dimension_single(*a)));
}
