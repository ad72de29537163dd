#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "entdim/dimension.hpp"
#include "entdim/smoothing.hpp"

namespace entdim {

/// f, f' and f'' at a point.
struct FunctionJet {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

/// Finite family of twice differentiable test functions.
class TestFunctionBasis {
 public:
  using Element = std::function<FunctionJet(double)>;

  TestFunctionBasis() = default;

  /// He_k(u) exp(-u^2 / (2 kappa^2)) for k = 0..m-1 with u = (x - center) / scale.
  static TestFunctionBasis hermite(std::size_t m, double center, double scale, double kappa = 4.0);
  /// {x^2 / 2}
  static TestFunctionBasis quadratic();

  void add(std::string name, Element e);
  /// Appends log p of a Gaussian-smoothed density (the maximiser in the
  /// variational form of the Fisher information).
  void add_log_density(const SmoothedDensity& sd);

  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  FunctionJet operator()(std::size_t i, double x) const { return elements_[i](x); }
  /// The first k elements.
  TestFunctionBasis prefix(std::size_t k) const;

 private:
  std::vector<std::string> names_;
  std::vector<Element> elements_;
};

/// How to build a basis for a particular smoothed measure.
struct BasisSpec {
  /// Hermite functions fitted to the padded support (0 for none).
  std::size_t hermite = 8;
  bool quadratic = false;
  /// Include log p_t of the smoothed measure itself.
  bool log_density = false;
};

/// Hermite functions centred on the padded support of the smoothed measure,
/// with u-scale = width/16 and window std = width/4.
TestFunctionBasis make_basis(const BasisSpec& spec, const SmoothedDensity& sd);

/// Moments of a basis against a smoothed measure, normalised by the
/// quadrature mass: b_i = E[g phi_i''], A_ij = E[phi_i' phi_j'],
/// C_ij = E[phi_i'' phi_j''].
struct BasisMoments {
  Eigen::VectorXd b;
  Eigen::MatrixXd A;
  Eigen::MatrixXd C;
  double mass = 0.0;
};

BasisMoments basis_moments(const SmoothedDensity& sd, const TestFunctionBasis& basis,
                           const std::function<double(double)>& g = {});

/// Columns spanning the kept part of range(A) with W^T A W = I. Elements
/// are taken in basis order and dropped when their A-norm residual, relative
/// to their own A-norm squared, is at most `cutoff`.
Eigen::MatrixXd whitening(const Eigen::MatrixXd& A, double cutoff = 1e-8);

struct FisherResult {
  double value = 0.0;
  double error = 0.0;
  /// Monte Carlo standard error where p_t itself is estimated.
  double std_error = 0.0;
  /// Mass of the smoothed measure left out because its density was unreliable.
  double coverage_deficit = 0.0;
  bool bound_violation = false;
  Method method = Method::automatic;
};

/// F(P_s mu), P_s mu = mu * N(0, s), by quadrature of p'^2 / p.
FisherResult fisher_direct(const MeasurePtr& mu, double s, const SmoothingOptions& options = {});

/// E[score(Z)^2] over Z ~ P_s mu.
FisherResult fisher_monte_carlo(const MeasurePtr& mu, double s, std::size_t samples, std::uint64_t seed,
                                const SmoothingOptions& options = {});

struct VariationalResult {
  double value = 0.0;
  std::size_t rank = 0;
  bool flagged = false;
};

/// b^T A^+ b, a lower bound on the Fisher information over span(basis).
VariationalResult fisher_variational(const MeasurePtr& mu, double s, const BasisSpec& spec,
                                     const SmoothingOptions& options = {});
VariationalResult fisher_variational(const SmoothedDensity& sd, const TestFunctionBasis& basis);

struct DeBruijnCheck {
  double lhs = 0.0;  // (H(P_{s+h}) - H(P_{s-h})) / 2h
  double rhs = 0.0;  // -F(P_s) / 2
  double tolerance = 0.0;
  bool holds = false;
};

DeBruijnCheck de_bruijn_check(const MeasurePtr& mu, double s, double h, const SmoothingOptions& options = {});

struct FisherCurveOptions {
  SmoothingOptions smoothing;
  /// Points with s above this are left out of the fit (they still enter
  /// the cumulative integral).
  double fit_smax = 2e-3;
  double bound_slack = 1.05;
};

/// Default s-grid: 30 points from 1 down to 1e-8.
std::vector<double> default_s_grid();

/// Thrown when some F(P_s mu) exceeds bound_slack / s.
class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FisherCurve {
  std::vector<double> s;  // decreasing
  std::vector<FisherResult> fisher;
  /// Integral of F from s to the largest grid point (log-coordinate trapezoid).
  std::vector<double> integral;
};

FisherCurve fisher_curve(const MeasurePtr& mu, const std::vector<double>& s_grid,
                         const FisherCurveOptions& options = {});

/// 1 - slope of the integral of F(P_s mu) over [s, 1] against |log s|.
DimensionEstimate delta_c_fisher(const MeasurePtr& mu, const std::vector<double>& s_grid,
                                 const FisherCurveOptions& options = {});
DimensionEstimate delta_c_fisher(const FisherCurve& curve, double fit_smax);

struct DudleyDiagnostic {
  double t = 0.0;
  /// sup over 1-Lipschitz f of |mu(f) - P_t mu(f)|, i.e. the integral of |F_mu - F_{P_t mu}|.
  double distance = 0.0;
  /// sqrt((1 - delta) t) for the supplied dimension estimate.
  double reference = 0.0;
};

/// Distance between mu and its Gaussian smoothing of variance t, next to the
/// heuristic scale sqrt((1 - delta) t). Nothing is asserted about the pair.
DudleyDiagnostic dudley_diagnostic(const MeasurePtr& mu, double t, double delta);

/// Cumulative integral of y from each x_i to x_0 over a decreasing positive
/// grid, by the trapezoid rule in log x applied to x*y.
std::vector<double> log_trapezoid_tail(const std::vector<double>& x, const std::vector<double>& y);

/// Window mask selecting grid points with x <= xmax (at least the last two).
std::vector<bool> small_scale_window(const std::vector<double>& x, double xmax);

}  // namespace entdim
