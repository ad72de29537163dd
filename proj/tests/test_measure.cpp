#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "entdim/measure.hpp"
#include "entdim/measure_io.hpp"

using namespace entdim;

namespace {

// Every depth-k truncation sum_{j<k} eps_j lambda^j, built independently of
// the library by walking all 2^k sign patterns.
std::vector<double> sign_sequences(double lambda, int depth) {
  std::vector<double> points;
  points.reserve(std::size_t{1} << depth);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << depth); ++bits) {
    double x = 0.0, scale = 1.0;
    for (int j = 0; j < depth; ++j) {
      x += ((bits >> j) & 1U) ? scale : -scale;
      scale *= lambda;
    }
    points.push_back(x);
  }
  std::sort(points.begin(), points.end());
  return points;
}

double oracle_mass(const std::vector<double>& pts, double a, double b) {
  const auto n = std::upper_bound(pts.begin(), pts.end(), b) - std::lower_bound(pts.begin(), pts.end(), a);
  return static_cast<double>(n) / static_cast<double>(pts.size());
}

}  // namespace

TEST_CASE("interval mass of simple measures") {
  CHECK(interval_mass(*Measure::dirac(0.0), -1.0, 1.0).value() == 1.0);
  CHECK(interval_mass(*Measure::dirac(0.0), 0.5, 1.0).value() == 0.0);
  const auto b = Measure::bernoulli(1.0 / 3.0);
  const auto half = interval_mass(*b, 0.0, 1.5);
  CHECK(half.exact());
  CHECK(half.value() == doctest::Approx(0.5).epsilon(1e-15));
  const auto u = Measure::uniform(0.0, 1.0);
  CHECK(interval_mass(*u, 0.45, 0.55).value() == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(interval_mass(*u, -3.0, 0.25).value() == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("Bernoulli interval mass agrees with sign-sequence enumeration") {
  for (double lambda : {0.25, 1.0 / 3.0}) {
    const auto mu = Measure::bernoulli(lambda);
    const auto pts = sign_sequences(lambda, 16);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(-1.6, 1.6), len(0.0, 1.5);
    for (int i = 0; i < 100; ++i) {
      const double a = pos(rng);
      const double b = a + len(rng);
      const auto m = interval_mass(*mu, a, b);
      CHECK(std::abs(m.value() - oracle_mass(pts, a, b)) <= std::ldexp(1.0, -16));
    }
    // Balls of radius lambda^k around a support point carry between
    // 2^-(k+1) and 2^-k of the mass.
    for (int k = 1; k <= 8; ++k) {
      const double r = std::pow(lambda, k);
      const double c = pts[pts.size() / 3];
      const double m = interval_mass(*mu, c - r, c + r).value();
      CHECK(std::abs(m - oracle_mass(pts, c - r, c + r)) <= std::ldexp(1.0, -16));
      CHECK(m >= std::ldexp(1.0, -k - 1));
      CHECK(m <= std::ldexp(1.0, -k));
    }
  }
}

TEST_CASE("interval mass is monotone, additive and complete") {
  const std::vector<MeasurePtr> measures{
      Measure::bernoulli(0.25),
      Measure::mixture({{0.5, Measure::dirac(0.0)}, {0.5, Measure::uniform(0.0, 1.0)}}),
      Measure::normal(0.0, 1.0, 1e-2),
      Measure::pushforward(Measure::bernoulli(1.0 / 3.0), MapSpec::linear_sine(1.0, 0.0, 0.3)),
      Measure::atomic({-1.0, 0.3, 2.0}, {0.2, 0.5, 0.3}),
  };
  for (const auto& mu : measures) {
    const auto box = support_bounds(*mu);
    CHECK(interval_mass(*mu, box.lo, box.hi).value() == doctest::Approx(1.0).epsilon(1e-9));
    std::vector<double> cuts{box.lo - 1.0};
    for (int i = 1; i < 40; ++i) cuts.push_back(box.lo + (box.hi - box.lo) * (i / 40.0) + 1e-7);
    cuts.push_back(box.hi + 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      // Half-open pieces: subtract the (possibly atomic) right endpoint.
      const double closed = interval_mass(*mu, cuts[i], cuts[i + 1]).value();
      const double point = interval_mass(*mu, cuts[i + 1], cuts[i + 1]).value();
      sum += closed - (i + 2 < cuts.size() ? point : 0.0);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(interval_mass(*mu, -0.2, 0.1).value() <= interval_mass(*mu, -0.3, 0.4).value());
  }
}

TEST_CASE("pushforward mass is base mass of the preimage") {
  const auto base = Measure::bernoulli(0.25);
  const auto f = MapSpec::linear_sine(1.5, 0.2, 0.4);
  const auto mu = Measure::pushforward(base, f);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    double a = pos(rng), b = pos(rng);
    if (a > b) std::swap(a, b);
    CHECK(interval_mass(*mu, a, b).value() == interval_mass(*base, f.inverse(a), f.inverse(b)).value());
  }
}

TEST_CASE("bi-Lipschitz certification rejects bad constants") {
  CHECK_THROWS_AS(Measure::pushforward(Measure::uniform(0, 1), MapSpec::affine(2.0, 0.0).with_constants(0.5, 1.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(MapSpec::linear_sine(1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_NOTHROW(Measure::pushforward(Measure::uniform(0, 1), MapSpec::affine(-2.0, 1.0)));
}

TEST_CASE("sampling") {
  std::mt19937_64 rng(42);
  CHECK(sample(*Measure::dirac(0.0), 5, rng).values == std::vector<double>(5, 0.0));
  CHECK(sample(*Measure::mixture({{1.0, Measure::dirac(3.0)}}), 3, rng).values == std::vector<double>(3, 3.0));

  const double lambda = 0.25;
  const auto batch = sample(*Measure::bernoulli(lambda), 100000, rng);
  CHECK(batch.truncation_error < 1e-12);
  const double mean = std::accumulate(batch.values.begin(), batch.values.end(), 0.0) / 1e5;
  const double sd = std::sqrt(1.0 / (1.0 - lambda * lambda));
  CHECK(std::abs(mean) <= 3.0 * sd / std::sqrt(1e5));

  std::mt19937_64 a(9), b(9);
  CHECK(sample(*Measure::bernoulli(0.3), 100, a).values == sample(*Measure::bernoulli(0.3), 100, b).values);
}

TEST_CASE("support bounds") {
  const auto d = support_bounds(*Measure::dirac(0.0));
  CHECK(d.lo == 0.0);
  CHECK(d.hi == 0.0);
  const auto c = support_bounds(*Measure::bernoulli(1.0 / 3.0));
  CHECK(c.lo == doctest::Approx(-1.5));
  CHECK(c.hi == doctest::Approx(1.5));
  const auto m = support_bounds(*Measure::mixture({{0.5, Measure::dirac(0.0)}, {0.5, Measure::uniform(0.0, 1.0)}}));
  CHECK(m.lo == 0.0);
  CHECK(m.hi == 1.0);
}

TEST_CASE("grid densities normalise by their trapezoid integral") {
  const auto g = Measure::grid(0.0, 0.5, {1.0, 3.0, 1.0, 0.0});
  const auto& gd = *g->as<GridDensity>();
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < gd.values.size(); ++i) integral += 0.5 * (gd.values[i] + gd.values[i + 1]) * gd.step;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gd.cdf(10.0) == doctest::Approx(1.0));
  CHECK_THROWS(Measure::grid(0.0, 0.1, {1.0, -1.0}));
}

TEST_CASE("measure specs round-trip") {
  const auto mu = Measure::mixture({
      {0.25, Measure::atomic({0.0, 1.0}, {0.5, 0.5})},
      {0.25, Measure::normal(0.3, 0.2, 0.01)},
      {0.25, Measure::bernoulli(0.3)},
      {0.25, Measure::pushforward(Measure::bernoulli(0.25), MapSpec::linear_sine(1.0, 0.5, 0.25))},
  });
  const auto doc = measure_to_json(*mu);
  const auto again = measure_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(measure_to_json(*again).dump() == doc.dump());

  CHECK_THROWS_AS(measure_from_json(nlohmann::json::parse(R"({"type":"bernoulli","lambda":0.7})")), SpecError);
  try {
    measure_from_json(nlohmann::json::parse(R"({"type":"mixture","components":[{"weight":1,"measure":{"type":"bernoulli"}}]})"));
    FAIL("expected SpecError");
  } catch (const SpecError& e) {
    CHECK(e.field() == "components[0].measure.lambda");
  }
}
