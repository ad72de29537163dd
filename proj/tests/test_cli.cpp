#include <doctest.h>

#include <json.hpp>

#include <sstream>

#include "entdim/cli.hpp"

using entdim::run_cli;

namespace {

const std::string kData = ENTDIM_DATA_DIR "/measures/";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("freedim prints a scalar") {
  const auto r = run({"freedim", "--measure", kData + "two_atoms.json"});
  CHECK(r.code == 0);
  CHECK(r.out == "{\"value\": 0.5}\n");
}

TEST_CASE("dimension of a point mass by both routes") {
  const auto r = run({"dimension", "--measure", kData + "dirac.json", "--method", "both", "--samples", "2000"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  REQUIRE(doc["estimates"].size() == 2);
  for (const auto& e : doc["estimates"]) CHECK(std::abs(e["value"].get<double>()) <= 0.05);
  CHECK(doc["estimates"][0]["method"] == "entropy-slope");
  CHECK(doc["estimates"][1]["method"] == "fractal-average");
}

TEST_CASE("dimension JSON key order") {
  const auto r = run({"dimension", "--measure", kData + "uniform.json", "--points", "8"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::ordered_json::parse(r.out);
  std::vector<std::string> keys;
  for (const auto& item : doc.items()) keys.push_back(item.key());
  CHECK(keys == std::vector<std::string>{"value", "confidence", "method", "flagged", "note", "slope_early",
                                         "slope_late", "curve"});
  CHECK(doc["curve"].size() == 8);
}

TEST_CASE("CSV outputs have the documented headers") {
  const auto m = kData + "cantor_quarter.json";
  const auto first_line = [](const std::string& s) { return s.substr(0, s.find('\n')); };
  auto r = run({"entropy-curve", "--measure", m, "--points", "5"});
  CHECK(r.code == 0);
  CHECK(first_line(r.out) == "t,H,H_err,flagged");
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 6);
  r = run({"fisher", "--measure", m, "--smin", "1e-4", "--smax", "1", "--points", "5"});
  CHECK(r.code == 0);
  CHECK(first_line(r.out) == "s,F_direct,F_var,F_err,sF");
  r = run({"bochner", "--measure", m, "--emin", "1e-4", "--eps-points", "6", "--n-points", "4"});
  CHECK(r.code == 0);
  CHECK(first_line(r.out) == "eps,n,K,source");
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 6 * 4);
}

TEST_CASE("identical arguments give identical bytes") {
  const std::vector<std::string> args{"dimension", "--measure", kData + "cantor_third.json", "--method", "fractal",
                                      "--samples", "3000", "--seed", "11"};
  CHECK(run(args).out == run(args).out);
  auto other = args;
  other.back() = "12";
  CHECK(run(args).out != run(other).out);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"freedim"}).code == 2);
  CHECK(run({"entropy-curve", "--measure", kData + "dirac.json", "--tmin", "0.2", "--tmax", "0.1"}).code == 2);
  CHECK(run({"entropy-curve", "--measure", kData + "dirac.json", "--points", "3"}).code == 2);
  CHECK(run({"dimension", "--measure", kData + "dirac.json", "--method", "magic"}).code == 2);
  CHECK(run({"verify", "--suite", "nothing"}).code == 2);
  const auto r = run({"freedim", "--measure", kData + "missing.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("cannot open") != std::string::npos);
}

TEST_CASE("help exits with 0") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("entropy-curve") != std::string::npos);
}

TEST_CASE("verify runs a single suite") {
  const auto r = run({"verify", "--suite", "freedim", "--seed", "7"});
  CHECK(r.code == 0);
  CHECK(r.out.find("freedim.superaffine") != std::string::npos);
  CHECK(r.out.find("3/3 checks passed") != std::string::npos);
}
