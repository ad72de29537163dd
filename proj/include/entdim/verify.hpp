#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "entdim/measure.hpp"

namespace entdim {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  /// "all" or one suite name.
  std::string suite = "all";
  std::uint64_t seed = 42;
};

/// measure-core, smoothing, entropy, dimension, fisher, bochner, freedim, cli
std::vector<std::string> verify_suites();

/// Names of the checks in a suite, in run order.
std::vector<std::string> verify_checks(const std::string& suite);

/// Runs the property checks. `progress` (optional) is called after each one.
/// Throws std::invalid_argument for an unknown suite.
std::vector<CheckResult> run_verify(const VerifyOptions& options,
                                    const std::function<void(const CheckResult&)>& progress = {});

struct NamedMeasure {
  std::string name;
  MeasurePtr measure;
  double delta;  // known entropy dimension
};

/// Measures with known entropy dimension used throughout the checks:
/// dirac, uniform, cantor-1/4, cantor-1/3 and the half/half dirac-uniform mixture.
std::vector<NamedMeasure> golden_matrix();

/// The golden matrix plus cantor-1/4 pushed through 2x + sin x and N(0, 1).
std::vector<NamedMeasure> full_matrix();

}  // namespace entdim
