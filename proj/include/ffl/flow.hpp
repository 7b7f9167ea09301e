#pragma once

// Time integration of the Finsler Ricci flow d(log F)/dt = -Ric in two
// modes: a spectral grid over the sphere bundle of a periodic chart, and a
// parametric homothety mode (F = r(t) * F_model) with closed-form updates.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ffl/common.hpp"
#include "ffl/metric.hpp"
#include "ffl/spectral.hpp"

namespace ffl {

struct GridState {
  double t = 0.0;
  int nx = 0, ntheta = 0;
  std::vector<double> phi;  // log F(x, e(theta)), row-major (i1, i2, j)
  MetricSpec origin;        // initial family (dim 2, periodic_box)
};

struct ParametricState {
  double t = 0.0;
  double r = 1.0;        // homothety factor, F = r * F_model
  double kappa = 0.0;    // Ricci scalar of the model at r = 1
  MetricSpec origin;
};

struct MonitorSample {
  double t = 0.0;
  double min_ric = 0.0, max_ric = 0.0;
  double min_flag = 0.0;
  double k_bound = 0.0;          // sup of ||Ric_ij||_g over the sample set
  double bernoulli_bound = 0.0;  // alpha / (1 + alpha t), alpha = min Ric at t=0
  double min_eig_g = 0.0;
  double residual_flow_eqv = 0.0;  // max |dt g_jk + 2 Ric_jk| (central diff)
};

struct Snapshot {
  double t = 0.0;
  int nx = 0, ntheta = 0;
  std::vector<double> phi;
};

enum class FlowMode { parametric, grid };

struct FlowConfig {
  FlowMode mode = FlowMode::parametric;
  MetricSpec metric;
  int nx = 32, ntheta = 32;  // grid mode; powers of two >= 16
  double dt = 1e-3;
  double t_end = 0.1;
  double cadence = 0.0;  // <= 0: monitor only at t = 0 and t_end
  std::uint64_t seed = 20260814;  // parametric sample set
  bool keep_snapshots = false;
};

struct FlowResult {
  std::vector<MonitorSample> monitors;
  std::vector<Snapshot> snapshots;
  double t_final = 0.0;
};

// Initial grid state sampled from a family (dim 2, periodic_box).
GridState make_grid_state(const Metric& m, int nx, int ntheta);

// Trigonometric-interpolant metric of the current state.
Metric reconstruct_metric(const GridState& s);

// One classical RK4 step of dphi/dt = -Ric[phi].  Throws CFLViolation when
// dt > 0.5 / max|Ric|, Degeneration when g loses strong convexity.
GridState step_flow_grid(const GridState& s, double dt);

// Parametric state for a homothety-closed family: round_sphere
// (kappa = n-1, r = radius) or euclidean (kappa = 0).
ParametricState make_parametric_state(const MetricSpec& spec);

// Exact update r(t+dt)^2 = r(t)^2 - 2 * model_ric * dt; throws Extinction
// when the radius would vanish (the message carries the extinction time).
ParametricState step_flow_parametric(const ParametricState& s, double model_ric, double dt);

// Pointwise linearized comparator F^2(t) = F0^2 (1 - 2 Ric0(x,y) t); exact
// on constant-flag-curvature homothety families.
double closed_form_predictor(const Metric& initial, const double* x, const double* y, double t);

using MonitorSink = std::function<void(const MonitorSample&)>;

// Integrates to t_end, emitting monitors each cadence (streamed through
// `sink` when given, and collected in the result).  Termination by
// extinction/degeneration/CFL propagates the corresponding exception after
// all earlier monitors have been emitted.
FlowResult run_flow(const FlowConfig& cfg, const MonitorSink& sink = {});

// One CSV row per monitor, 17-significant-digit values, with header
// t,min_ric,max_ric,min_flag,K_bound,bernoulli_bound,min_eig_g,residual_flow_eqv.
std::string monitor_csv(const std::vector<MonitorSample>& rows);

// {"nx":..,"ntheta":..,"t":..,"phi":[..]} for state archival.
std::string snapshot_json(const Snapshot& s);

}  // namespace ffl
