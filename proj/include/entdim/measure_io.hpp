#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "entdim/measure.hpp"

namespace entdim {

/// Malformed measure spec. `field()` is a JSON path such as
/// "components[1].measure.lambda".
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parses a measure spec document. Besides the canonical "atomic", "grid",
/// "bernoulli", "mixture" and "pushforward" types, the shorthands "dirac",
/// "uniform" and "normal" are accepted and expand to canonical measures.
MeasurePtr measure_from_json(const nlohmann::json& doc);
MeasurePtr load_measure(const std::filesystem::path& path);

/// Canonical form; measure_from_json(measure_to_json(m)) reproduces m exactly.
/// Throws std::invalid_argument for maps built from arbitrary callables.
nlohmann::ordered_json measure_to_json(const Measure& mu);

}  // namespace entdim
