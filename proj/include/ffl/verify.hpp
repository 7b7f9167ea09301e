#pragma once

// Verification harness: independent classical-geometry oracle, comparison
// ODE solutions, identity residuals over flow runs, and bound checks.

#include <string>
#include <vector>

#include "ffl/common.hpp"
#include "ffl/flow.hpp"
#include "ffl/geometry.hpp"
#include "ffl/metric.hpp"

namespace ffl {

// Classical curvature of a direction-independent metric, computed without
// the jet pipeline: g(x) by polarization of F^2 in y, Christoffel symbols by
// fourth-order central differences in x, Riemann/Ricci by the coordinate
// formula.  Serves as ground truth for the Riemannian families.
// Throws NotRiemannian when F^2 is not quadratic in y.
CurvatureReport riemannian_oracle(const Metric& m, const double* x, const double* y);

// Flag curvature of the flag (y; V) read off a report's curvature fields.
double report_flag(const CurvatureReport& rep, const VecXd& y, const VecXd& V);

// phi(t) = alpha / (1 + alpha t), the closed-form solution of
// dphi/dt = -phi^2; throws PoleReached at or past the blow-down time.
double bernoulli_solution(double alpha, double t);

// The same ODE integrated by RK4 from phi(0) = alpha, for cross-checking.
double bernoulli_rk4(double alpha, double t, int steps);

// --- Identity residuals -------------------------------------------------

enum class IdentityId { eq1, eq3, eq8, eq6, eq9_4, eq10_margin, gauss9, orthogonality,
                        sm_conversion };
enum class TheoremId { asli1, asli2, asli4, asli5 };
enum class CheckStatus { pass, fail, report_only };

const char* identity_name(IdentityId id);
const char* theorem_name(TheoremId id);
const char* status_name(CheckStatus s);

struct ResidualReport {
  IdentityId id = IdentityId::eq1;
  std::string samples;         // sample-set description
  double max_abs = 0.0;
  double rms = 0.0;
  double dt = 0.0;             // 0 when no time differencing enters
  int nx = 0, ntheta = 0;      // 0 when no grid enters
  double tol = 0.0;            // 0 for report-only entries
  CheckStatus status = CheckStatus::report_only;
};

struct BoundCheck {
  TheoremId id = TheoremId::asli5;
  std::string samples;
  double alpha = 0.0;          // initial infimum of Ric over the sample set
  double k_bound = 0.0;        // uniform Ricci-norm bound over the run
  double fitted_c = 0.0;       // smallest empirical constant (ratio bound)
  std::vector<double> t;       // margin time series
  std::vector<double> margin;
  double min_margin = 0.0;
  double first_violation_t = -1.0;  // < 0: no violation
  bool applicable = true;
  bool passed = true;
};

// The metric at t - dt, t, t + dt, for central time differences.  The
// parametric form is closed-form exact; the grid form takes RK4 steps of
// +-dt from the given state and wraps the interpolant metrics.
struct FlowFrames {
  Metric before, at, after;
  double t = 0.0;
  double dt = 0.0;
};
FlowFrames parametric_frames(const MetricSpec& spec, double t, double dt);
FlowFrames grid_frames(const GridState& s, double dt);

// d/dt[F^2 R(Z,X)] + 2 sum_k F^2 R(e_k,X) Ric(e_k,Z) with the deterministic
// Gram-Schmidt frame e_k of g(t); |residual| / max(|lhs|, |rhs|, 1).
double residual_eq1(const FlowFrames& fr, const double* x, const double* y, const VecXd& Z,
                    const VecXd& X);

// Tensor form of the same identity: max-norm of d/dt Rbar_jk + 2 (Rbar
// g^{-1} Ric)_jk over all components, same normalization.
double residual_eq3(const FlowFrames& fr, const double* x, const double* y);

// Traced form d/dt(F^2 Ric) + 2 F^2 R^{ij} Ric_ij (report-only: the closed
// sphere form shows the trace misses frame-variation terms).
double residual_eq8(const FlowFrames& fr, const double* x, const double* y);

struct Eq6Residual {
  double time_ambient = 0.0;  // |dRic/dt + F^2 R^{ij} d^2 Ric/dy^i dy^j| / scale
  double time_sm = 0.0;       // same with the sphere-bundle operator form
  double conversion = 0.0;    // |ambient form - sphere-bundle form| / scale
  double eq10_margin = 0.0;   // dRic/dt - (sm rhs) + Ric^2 (>= 0 expected)
};
Eq6Residual residual_eq6(const FlowFrames& fr, const double* x, double theta);

// --- Bound checks over monitor series -----------------------------------

// Positivity of min Ric (asli2) or of both min Ric and min flag (asli4).
// Throws NotApplicable when the initial values are not positive.
BoundCheck check_positivity(const std::vector<MonitorSample>& monitors,
                            TheoremId which = TheoremId::asli4);

// margin(t) = min Ric(t) - alpha/(1 + alpha t) >= -1e-9; NotApplicable for
// alpha <= 0.
BoundCheck check_lower_bound(const std::vector<MonitorSample>& monitors, double alpha);

// Smallest empirical C with |log(Rbar_t(V,V)/Rbar_0(V,V))| <= 2 C K t over
// all samples; rbar[s][k] is the sampled value at time t[k].  Asserts only
// finiteness.  NotApplicable when some initial value is not positive.
BoundCheck check_ratio_bounds(const std::vector<double>& t,
                              const std::vector<std::vector<double>>& rbar, double k_bound);

// --- Suite ---------------------------------------------------------------

struct VerifySuiteResult {
  std::vector<ResidualReport> residuals;
  std::vector<BoundCheck> bounds;
  bool ran_bernoulli = false;
  double bernoulli_max_err = 0.0;
  bool bernoulli_pass = true;
  bool ran_oracle = false;
  double oracle_max_rel = 0.0;
  bool oracle_pass = true;
  bool all_hard_checks_pass() const;
};

// Runs every check over the built-in corpus.  `only` filters by section
// name (identity/theorem names plus "bernoulli" and "oracle"); empty = all.
VerifySuiteResult verify_suite(const std::vector<std::string>& only = {});

// Deterministic JSON bundle, 17-significant-digit numbers.
std::string verify_report_json(const VerifySuiteResult& r);

}  // namespace ffl
