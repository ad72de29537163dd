#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "entdim/bochner.hpp"
#include "entdim/cli.hpp"
#include "entdim/dimension.hpp"
#include "entdim/entropy.hpp"
#include "entdim/fisher.hpp"
#include "entdim/freedim.hpp"
#include "entdim/measure_io.hpp"
#include "entdim/verify.hpp"

namespace py = pybind11;
using namespace entdim;

namespace {

py::dict estimate_dict(const DimensionEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["confidence"] = e.confidence;
  d["method"] = e.method;
  d["flagged"] = e.flagged;
  d["note"] = e.note;
  d["abscissa"] = e.curve.abscissa;
  d["curve"] = e.curve.values;
  return d;
}

std::vector<double> grid_or_default(const std::optional<std::vector<double>>& g, std::vector<double> (*fallback)()) {
  return g ? *g : fallback();
}

// pybind11 holders cannot point to const; the library never mutates a Measure.
using Py = std::shared_ptr<Measure>;
Py mut(MeasurePtr p) { return std::const_pointer_cast<Measure>(std::move(p)); }

SmoothingOptions seeded(std::uint64_t seed) {
  SmoothingOptions o;
  o.seed = seed;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Entropy dimension of probability measures on the real line";

  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);

  py::class_<Measure, Py>(m, "Measure")
      .def_static("dirac", [](double x) { return mut(Measure::dirac(x)); }, py::arg("x") = 0.0)
      .def_static("uniform", [](double a, double b) { return mut(Measure::uniform(a, b)); }, py::arg("a"), py::arg("b"))
      .def_static("normal", [](double mean, double sd, double step, double halfwidth) {
            return mut(Measure::normal(mean, sd, step, halfwidth));
          }, py::arg("mean") = 0.0, py::arg("sd") = 1.0, py::arg("step") = 1e-3,
                  py::arg("halfwidth") = 10.0)
      .def_static("atomic", [](std::vector<double> x, std::vector<double> w) { return mut(Measure::atomic(std::move(x), std::move(w))); }, py::arg("positions"), py::arg("weights"))
      .def_static("bernoulli", [](double lam) { return mut(Measure::bernoulli(lam)); }, py::arg("lam"))
      .def_static(
          "mixture",
          [](const std::vector<std::pair<double, Py>>& parts) {
            std::vector<MixtureComponent> comps;
            for (const auto& [w, mu] : parts) comps.push_back({w, mu});
            return mut(Measure::mixture(std::move(comps)));
          },
          py::arg("components"), "Mixture of (weight, measure) pairs.")
      .def_static(
          "affine_image", [](Py mu, double slope, double offset) {
            return mut(Measure::pushforward(std::move(mu), MapSpec::affine(slope, offset)));
          },
          py::arg("measure"), py::arg("slope"), py::arg("offset"))
      .def_static(
          "linear_sine_image",
          [](Py mu, double slope, double offset, double amplitude) {
            return mut(Measure::pushforward(std::move(mu), MapSpec::linear_sine(slope, offset, amplitude)));
          },
          py::arg("measure"), py::arg("slope"), py::arg("offset"), py::arg("amplitude"))
      .def_static(
          "from_json",
          [](const std::string& text) {
            nlohmann::json doc;
            try {
              doc = nlohmann::json::parse(text);
            } catch (const nlohmann::json::parse_error& e) {
              throw SpecError("<text>", std::string("invalid JSON: ") + e.what());
            }
            return mut(measure_from_json(doc));
          },
          py::arg("text"))
      .def_static(
          "load", [](const std::string& path) { return mut(load_measure(path)); }, py::arg("path"))
      .def("to_json", [](const Measure& mu) { return measure_to_json(mu).dump(); })
      .def_property_readonly("kind", &Measure::kind)
      .def("interval_mass", [](const Measure& mu, double a, double b) { return interval_mass(mu, a, b).value(); },
           py::arg("a"), py::arg("b"))
      .def("__repr__", [](const Measure& mu) { return "<entdim.Measure " + mu.kind() + ">"; });

  m.def(
      "entropy",
      [](const Py& mu, double t, const std::string& kernel, std::uint64_t seed) {
        EntropyOptions o;
        o.smoothing = seeded(seed);
        const auto r = entropy(SmoothedDensity(mu, Kernel::parse(kernel), t, o.smoothing), o);
        py::dict d;
        d["value"] = r.value;
        d["error"] = r.error;
        d["mc_value"] = r.mc_value;
        d["mc_stderr"] = r.mc_stderr;
        d["flagged"] = r.flagged;
        return d;
      },
      py::arg("measure"), py::arg("t"), py::arg("kernel") = "gauss", py::arg("seed") = 42,
      "H(mu_t) = integral of p log p for the smoothed measure.");

  m.def(
      "delta_c_entropy",
      [](const Py& mu, const std::string& kernel, std::optional<std::vector<double>> ts, std::uint64_t seed) {
        CurveOptions o;
        o.entropy.smoothing = seeded(seed);
        return estimate_dict(delta_c_entropy(mu, Kernel::parse(kernel), grid_or_default(ts, default_entropy_grid), o));
      },
      py::arg("measure"), py::arg("kernel") = "gauss", py::arg("ts") = py::none(), py::arg("seed") = 42);

  m.def(
      "delta_c_fractal",
      [](const Py& mu, std::optional<std::vector<double>> ts, std::size_t samples, std::uint64_t seed) {
        FractalOptions o;
        o.samples = samples;
        o.seed = seed;
        return estimate_dict(delta_c_fractal(mu, grid_or_default(ts, default_entropy_grid), o));
      },
      py::arg("measure"), py::arg("ts") = py::none(), py::arg("samples") = 40000, py::arg("seed") = 42);

  m.def(
      "fisher",
      [](const Py& mu, double s, std::uint64_t seed) { return fisher_direct(mu, s, seeded(seed)).value; },
      py::arg("measure"), py::arg("s"), py::arg("seed") = 42, "Fisher information of mu * N(0, s).");

  m.def(
      "fisher_variational",
      [](const Py& mu, double s, std::size_t hermite, bool quadratic) {
        return fisher_variational(mu, s, BasisSpec{hermite, quadratic, false}).value;
      },
      py::arg("measure"), py::arg("s"), py::arg("hermite") = 8, py::arg("quadratic") = false);

  m.def(
      "delta_c_fisher",
      [](const Py& mu, std::optional<std::vector<double>> s, std::uint64_t seed) {
        FisherCurveOptions o;
        o.smoothing = seeded(seed);
        return estimate_dict(delta_c_fisher(mu, grid_or_default(s, default_s_grid), o));
      },
      py::arg("measure"), py::arg("s_grid") = py::none(), py::arg("seed") = 42);

  m.def(
      "delta_square",
      [](const Py& mu, std::optional<std::vector<double>> eps, std::optional<std::vector<double>> n,
         std::uint64_t seed) {
        BochnerOptions o;
        o.smoothing = seeded(seed);
        return estimate_dict(
            delta_square(mu, grid_or_default(eps, default_s_grid), grid_or_default(n, default_n_grid), o));
      },
      py::arg("measure"), py::arg("eps_grid") = py::none(), py::arg("n_grid") = py::none(), py::arg("seed") = 42);

  m.def(
      "optimal_K", [](const Py& mu, double eps, double n) { return optimal_K(mu, eps, n).value; },
      py::arg("measure"), py::arg("eps"), py::arg("n"));

  m.def(
      "dudley_diagnostic",
      [](const Py& mu, double t, double delta) {
        const auto d = dudley_diagnostic(mu, t, delta);
        return py::make_tuple(d.distance, d.reference);
      },
      py::arg("measure"), py::arg("t"), py::arg("delta"),
      "(distance between mu and P_t mu over 1-Lipschitz tests, sqrt((1 - delta) t)).");

  m.def(
      "free_dimension", [](const Py& mu) { return free_dimension_single(*mu); }, py::arg("measure"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the entdim command line; returns (exit code, stdout, stderr).");

  m.def(
      "verify",
      [](const std::string& suite, std::uint64_t seed) {
        VerifyOptions o;
        o.suite = suite;
        o.seed = seed;
        py::list rows;
        for (const auto& r : run_verify(o)) {
          py::dict d;
          d["suite"] = r.suite;
          d["check"] = r.name;
          d["passed"] = r.passed;
          d["detail"] = r.detail;
          rows.append(d);
        }
        return rows;
      },
      py::arg("suite") = "all", py::arg("seed") = 42);
}
