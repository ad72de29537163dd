#include "entdim/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "entdim/bochner.hpp"
#include "entdim/dimension.hpp"
#include "entdim/entropy.hpp"
#include "entdim/fisher.hpp"
#include "entdim/freedim.hpp"
#include "entdim/measure_io.hpp"
#include "entdim/verify.hpp"

namespace entdim {

namespace {

using ordered_json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest round-trip form; independent of the locale.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

struct Grid {
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 0;

  void validate(const std::string& what) const {
    if (!(min > 0.0 && min < max && max <= 1.0))
      throw UsageError(what + " grid needs 0 < min < max <= 1 (got " + num(min) + ", " + num(max) + ")");
    if (points < 4) throw UsageError(what + " grid needs at least 4 points");
  }
  std::vector<double> values() const { return geometric_grid(max, min, points); }
};

struct RunConfig {
  std::string measure;
  std::string kernel = "gauss";
  Grid t{1e-4, 1e-1, 25};
  Grid s{1e-8, 1.0, 30};
  Grid n{0.01, 1.0, 20};
  std::uint64_t seed = 42;
  std::size_t samples = 0;  // 0: command default
  std::string out = "-";
  std::string method = "entropy";
  std::string suite = "all";
};

// Destination for --out: standard output for "-", else a file.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& stdout_) {
    if (path == "-") {
      os_ = &stdout_;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot open output file " + path);
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

SmoothingOptions smoothing(const RunConfig& c) {
  SmoothingOptions o;
  o.seed = c.seed;
  return o;
}

ordered_json estimate_json(const DimensionEstimate& e, const char* abscissa) {
  ordered_json j;
  j["value"] = e.value;
  j["confidence"] = e.confidence;
  j["method"] = e.method;
  j["flagged"] = e.flagged;
  j["note"] = e.note;
  j["slope_early"] = e.slope_early;
  j["slope_late"] = e.slope_late;
  auto curve = ordered_json::array();
  const auto& c = e.curve;
  for (std::size_t i = 0; i < c.abscissa.size(); ++i) {
    ordered_json p;
    p[abscissa] = c.abscissa[i];
    p["value"] = c.values[i];
    p["error"] = c.value_errors[i];
    p["used"] = static_cast<bool>(c.used[i]);
    p["flagged"] = static_cast<bool>(c.flagged[i]);
    curve.push_back(p);
  }
  j["curve"] = curve;
  return j;
}

int cmd_entropy_curve(const RunConfig& c, std::ostream& out) {
  c.t.validate("t");
  const auto kernel = Kernel::parse(c.kernel);
  const auto mu = load_measure(c.measure);
  CurveOptions o;
  o.entropy.smoothing = smoothing(c);
  if (c.samples) o.entropy.check_samples = c.samples;
  const auto curve = entropy_curve(mu, kernel, c.t.values(), o);
  Sink sink(c.out, out);
  *sink << "t,H,H_err,flagged\n";
  for (std::size_t i = 0; i < curve.abscissa.size(); ++i)
    *sink << num(curve.abscissa[i]) << ',' << num(curve.values[i]) << ',' << num(curve.value_errors[i]) << ','
          << (curve.flagged[i] ? 1 : 0) << '\n';
  return std::any_of(curve.flagged.begin(), curve.flagged.end(), [](bool f) { return f; }) ? 1 : 0;
}

int cmd_dimension(const RunConfig& c, std::ostream& out) {
  c.t.validate("t");
  const std::vector<std::string> known{"entropy", "fractal", "both", "fisher", "bochner"};
  if (std::find(known.begin(), known.end(), c.method) == known.end())
    throw UsageError("unknown method '" + c.method + "'");
  if (c.method == "fisher" || c.method == "bochner") c.s.validate("s");
  if (c.method == "bochner") c.n.validate("n");
  const auto kernel = Kernel::parse(c.kernel);
  const auto mu = load_measure(c.measure);
  std::vector<std::pair<DimensionEstimate, const char*>> ests;
  if (c.method == "entropy" || c.method == "both") {
    CurveOptions o;
    o.entropy.smoothing = smoothing(c);
    ests.emplace_back(delta_c_entropy(mu, kernel, c.t.values(), o), "t");
  }
  if (c.method == "fractal" || c.method == "both") {
    FractalOptions o;
    o.seed = c.seed;
    if (c.samples) o.samples = c.samples;
    ests.emplace_back(delta_c_fractal(mu, c.t.values(), o), "t");
  }
  if (c.method == "fisher") {
    FisherCurveOptions o;
    o.smoothing = smoothing(c);
    ests.emplace_back(delta_c_fisher(mu, c.s.values(), o), "s");
  }
  if (c.method == "bochner") {
    BochnerOptions o;
    o.smoothing = smoothing(c);
    ests.emplace_back(delta_square(mu, c.s.values(), c.n.values(), o), "eps");
  }
  ordered_json doc;
  if (ests.size() == 1) {
    doc = estimate_json(ests[0].first, ests[0].second);
  } else {
    doc["method"] = "both";
    doc["difference"] = std::abs(ests[0].first.value - ests[1].first.value);
    doc["combined_confidence"] = ests[0].first.confidence + ests[1].first.confidence;
    doc["estimates"] = ordered_json::array();
    for (const auto& [e, x] : ests) doc["estimates"].push_back(estimate_json(e, x));
  }
  Sink sink(c.out, out);
  *sink << doc.dump(2) << '\n';
  return std::any_of(ests.begin(), ests.end(), [](const auto& e) { return e.first.flagged; }) ? 1 : 0;
}

int cmd_fisher(const RunConfig& c, std::ostream& out, std::ostream& err) {
  c.s.validate("s");
  const auto mu = load_measure(c.measure);
  Sink sink(c.out, out);
  *sink << "s,F_direct,F_var,F_err,sF\n";
  std::optional<std::string> violation;
  const auto grid = c.s.values();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto o = smoothing(c);
    o.seed = derive_seed(c.seed, i);
    const double s = grid[i];
    const auto f = fisher_direct(mu, s, o);
    const auto v = fisher_variational(mu, s, BasisSpec{}, o);
    *sink << num(s) << ',' << num(f.value) << ',' << num(v.value) << ',' << num(f.error + f.std_error) << ','
          << num(s * f.value) << '\n';
    if (!violation && !(f.value >= 0.0 && s * f.value <= 1.05))
      violation = "Fisher bound violated at s=" + num(s) + ": s*F=" + num(s * f.value) + " outside [0, 1.05]";
  }
  if (violation) {
    err << "error: " << *violation << '\n';
    return 1;
  }
  return 0;
}

int cmd_bochner(const RunConfig& c, std::ostream& out, std::ostream& err) {
  c.s.validate("eps");
  c.n.validate("n");
  const auto mu = load_measure(c.measure);
  BochnerOptions o;
  o.smoothing = smoothing(c);
  const auto scan = bochner_scan(mu, c.s.values(), c.n.values(), o);
  Sink sink(c.out, out);
  *sink << "eps,n,K,source\n";
  for (std::size_t i = 0; i < scan.eps.size(); ++i)
    for (std::size_t j = 0; j < scan.n.size(); ++j)
      *sink << num(scan.eps[i]) << ',' << num(scan.n[j]) << ',' << num(scan.K[i][j]) << ','
            << (scan.from_family[i][j] ? "fisher-family" : "eig") << '\n';
  const auto est = delta_square(scan);
  err << "delta_square " << num(est.value) << " +- " << num(est.confidence) << " at n=" << num(scan.n[scan.best])
      << '\n';
  return est.flagged ? 1 : 0;
}

int cmd_freedim(const RunConfig& c, std::ostream& out) {
  const auto mu = load_measure(c.measure);
  Sink sink(c.out, out);
  *sink << "{\"value\": " << ordered_json(free_dimension_single(*mu)).dump() << "}\n";
  return 0;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  const auto suites = verify_suites();
  if (c.suite != "all" && std::find(suites.begin(), suites.end(), c.suite) == suites.end())
    throw UsageError("unknown suite '" + c.suite + "'");
  Sink sink(c.out, out);
  auto& os = *sink;
  os << std::left << std::setw(14) << "suite" << std::setw(36) << "check" << std::setw(6) << "result" << std::right
     << std::setw(9) << "seconds" << "  detail\n";
  std::size_t passed = 0, total = 0;
  VerifyOptions vo;
  vo.suite = c.suite;
  vo.seed = c.seed;
  run_verify(vo, [&](const CheckResult& r) {
    ++total;
    passed += r.passed ? 1 : 0;
    std::ostringstream secs;
    secs << std::fixed << std::setprecision(2) << r.seconds;
    os << std::left << std::setw(14) << r.suite << std::setw(36) << r.name << std::setw(6)
       << (r.passed ? "PASS" : "FAIL") << std::right << std::setw(9) << secs.str() << "  " << r.detail << '\n'
       << std::flush;
  });
  os << passed << "/" << total << " checks passed\n";
  return passed == total ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Entropy dimension of probability measures on the real line", "entdim"};
  app.require_subcommand(1);

  auto measure_opt = [&](CLI::App* sub) {
    sub->add_option("--measure", c.measure, "Measure spec (JSON)")->required();
  };
  auto seed_opt = [&](CLI::App* sub) { sub->add_option("--seed", c.seed, "Random seed")->capture_default_str(); };
  auto out_opt = [&](CLI::App* sub) { sub->add_option("--out", c.out, "Output path, - for stdout")->capture_default_str(); };
  auto t_opts = [&](CLI::App* sub) {
    sub->add_option("--tmin", c.t.min, "Smallest t")->capture_default_str();
    sub->add_option("--tmax", c.t.max, "Largest t")->capture_default_str();
    sub->add_option("--points", c.t.points, "Number of t values")->capture_default_str();
  };
  auto s_opts = [&](CLI::App* sub, const char* points) {
    sub->add_option("--smin", c.s.min, "Smallest variance s")->capture_default_str();
    sub->add_option("--smax", c.s.max, "Largest variance s")->capture_default_str();
    sub->add_option(points, c.s.points, "Number of s values")->capture_default_str();
  };
  auto n_opts = [&](CLI::App* sub) {
    sub->add_option("--nmin", c.n.min, "Smallest n")->capture_default_str();
    sub->add_option("--nmax", c.n.max, "Largest n")->capture_default_str();
    sub->add_option("--n-points", c.n.points, "Number of n values")->capture_default_str();
  };

  auto* curve = app.add_subcommand("entropy-curve", "H(mu_t) over a t-grid (CSV)");
  measure_opt(curve);
  curve->add_option("--kernel", c.kernel, "gauss | box | box01 | file:PATH")->capture_default_str();
  t_opts(curve);
  curve->add_option("--samples", c.samples, "Monte Carlo cross-check draws per point");
  seed_opt(curve);
  out_opt(curve);

  auto* dim = app.add_subcommand("dimension", "Estimate the entropy dimension (JSON)");
  measure_opt(dim);
  dim->add_option("--method", c.method, "entropy | fractal | both | fisher | bochner")->capture_default_str();
  dim->add_option("--kernel", c.kernel, "gauss | box | box01 | file:PATH")->capture_default_str();
  t_opts(dim);
  s_opts(dim, "--s-points");
  n_opts(dim);
  dim->add_option("--samples", c.samples, "Draws for the fractal route");
  seed_opt(dim);
  out_opt(dim);

  auto* fisher = app.add_subcommand("fisher", "Fisher information of P_s mu over an s-grid (CSV)");
  measure_opt(fisher);
  s_opts(fisher, "--points");
  seed_opt(fisher);
  out_opt(fisher);

  auto* bochner = app.add_subcommand("bochner", "Bochner scan K[eps][n] (CSV)");
  measure_opt(bochner);
  bochner->add_option("--emin", c.s.min, "Smallest eps")->capture_default_str();
  bochner->add_option("--emax", c.s.max, "Largest eps")->capture_default_str();
  bochner->add_option("--eps-points", c.s.points, "Number of eps values")->capture_default_str();
  n_opts(bochner);
  seed_opt(bochner);
  out_opt(bochner);

  auto* freedim = app.add_subcommand("freedim", "Free entropy dimension 1 - sum of squared atom masses (JSON)");
  measure_opt(freedim);
  out_opt(freedim);

  auto* verify = app.add_subcommand("verify", "Run the property checks");
  verify->add_option("--suite", c.suite, "all or one suite name")->capture_default_str();
  seed_opt(verify);
  out_opt(verify);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (curve->parsed()) return cmd_entropy_curve(c, out);
    if (dim->parsed()) return cmd_dimension(c, out);
    if (fisher->parsed()) return cmd_fisher(c, out, err);
    if (bochner->parsed()) return cmd_bochner(c, out, err);
    if (freedim->parsed()) return cmd_freedim(c, out);
    return cmd_verify(c, out);
  } catch (const SpecError& e) {
    err << "error: malformed measure spec: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const BoundViolation& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace entdim
