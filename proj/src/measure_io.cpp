#include "entdim/measure_io.hpp"

#include <fstream>
#include <sstream>

namespace entdim {

namespace {

using nlohmann::json;

const json& field(const json& doc, const std::string& path, const char* key) {
  if (!doc.is_object()) throw SpecError(path, "expected an object");
  const auto it = doc.find(key);
  if (it == doc.end()) throw SpecError(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double number(const json& doc, const std::string& path, const char* key) {
  const auto& v = field(doc, path, key);
  if (!v.is_number()) throw SpecError(join(path, key), "expected a number");
  return v.get<double>();
}

double number_or(const json& doc, const std::string& path, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  return number(doc, path, key);
}

std::vector<double> numbers(const json& doc, const std::string& path, const char* key) {
  const auto& v = field(doc, path, key);
  if (!v.is_array()) throw SpecError(join(path, key), "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw SpecError(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

MapSpec parse_map(const json& doc, const std::string& path) {
  const auto& kind_v = field(doc, path, "kind");
  if (!kind_v.is_string()) throw SpecError(join(path, "kind"), "expected a string");
  const auto kind = kind_v.get<std::string>();
  try {
    MapSpec map = [&] {
      if (kind == "affine") return MapSpec::affine(number(doc, path, "slope"), number_or(doc, path, "offset", 0.0));
      if (kind == "linear_sine")
        return MapSpec::linear_sine(number(doc, path, "slope"), number_or(doc, path, "offset", 0.0),
                                    number(doc, path, "amplitude"));
      throw SpecError(join(path, "kind"), "unknown map kind '" + kind + "'");
    }();
    if (doc.contains("m") || doc.contains("M"))
      map = map.with_constants(number_or(doc, path, "m", map.lower()), number_or(doc, path, "M", map.upper()));
    return map;
  } catch (const std::invalid_argument& e) {
    throw SpecError(path, e.what());
  }
}

MeasurePtr parse(const json& doc, const std::string& path) {
  const auto& type_v = field(doc, path, "type");
  if (!type_v.is_string()) throw SpecError(join(path, "type"), "expected a string");
  const auto type = type_v.get<std::string>();
  try {
    if (type == "atomic") return Measure::atomic(numbers(doc, path, "positions"), numbers(doc, path, "weights"));
    if (type == "dirac") return Measure::dirac(number_or(doc, path, "at", 0.0));
    if (type == "grid")
      return Measure::grid(number(doc, path, "origin"), number(doc, path, "step"), numbers(doc, path, "values"));
    if (type == "uniform") return Measure::uniform(number(doc, path, "a"), number(doc, path, "b"));
    if (type == "normal")
      return Measure::normal(number_or(doc, path, "mean", 0.0), number_or(doc, path, "sd", 1.0),
                             number_or(doc, path, "step", 1e-3), number_or(doc, path, "halfwidth", 10.0));
    if (type == "bernoulli") {
      const double lambda = number(doc, path, "lambda");
      if (!(lambda > 0.0 && lambda < 0.5)) throw SpecError(join(path, "lambda"), "must lie in (0, 1/2)");
      return Measure::bernoulli(lambda);
    }
    if (type == "mixture") {
      const auto& comps = field(doc, path, "components");
      const auto cpath = join(path, "components");
      if (!comps.is_array()) throw SpecError(cpath, "expected an array");
      std::vector<MixtureComponent> out;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto ipath = cpath + "[" + std::to_string(i) + "]";
        out.push_back({number(comps[i], ipath, "weight"), parse(field(comps[i], ipath, "measure"), join(ipath, "measure"))});
      }
      return Measure::mixture(std::move(out));
    }
    if (type == "pushforward") {
      auto base = parse(field(doc, path, "base"), join(path, "base"));
      return Measure::pushforward(std::move(base), parse_map(field(doc, path, "map"), join(path, "map")));
    }
  } catch (const SpecError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw SpecError(path.empty() ? "<root>" : path, e.what());
  }
  throw SpecError(join(path, "type"), "unknown measure type '" + type + "'");
}

}  // namespace

MeasurePtr measure_from_json(const nlohmann::json& doc) { return parse(doc, ""); }

MeasurePtr load_measure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("<file>", "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return measure_from_json(doc);
}

nlohmann::ordered_json measure_to_json(const Measure& mu) {
  nlohmann::ordered_json out;
  if (const auto* at = mu.as<Atomic>()) {
    out["type"] = "atomic";
    out["positions"] = at->positions;
    out["weights"] = at->weights;
  } else if (const auto* g = mu.as<GridDensity>()) {
    out["type"] = "grid";
    out["origin"] = g->origin;
    out["step"] = g->step;
    out["values"] = g->values;
  } else if (const auto* bc = mu.as<BernoulliConvolution>()) {
    out["type"] = "bernoulli";
    out["lambda"] = bc->lambda;
  } else if (const auto* mix = mu.as<Mixture>()) {
    out["type"] = "mixture";
    auto comps = nlohmann::ordered_json::array();
    for (const auto& c : mix->components) {
      nlohmann::ordered_json item;
      item["weight"] = c.weight;
      item["measure"] = measure_to_json(*c.measure);
      comps.push_back(std::move(item));
    }
    out["components"] = std::move(comps);
  } else {
    const auto& pf = std::get<LipschitzPushforward>(mu.payload());
    const auto& map = pf.map;
    if (map.kind() == "custom") throw std::invalid_argument("measure_to_json: custom maps are not serializable");
    out["type"] = "pushforward";
    out["base"] = measure_to_json(*pf.base);
    nlohmann::ordered_json m;
    m["kind"] = map.kind();
    m["slope"] = map.params()[0];
    m["offset"] = map.params()[1];
    if (map.kind() == "linear_sine") m["amplitude"] = map.params()[2];
    m["m"] = map.lower();
    m["M"] = map.upper();
    out["map"] = std::move(m);
  }
  return out;
}

}  // namespace entdim
