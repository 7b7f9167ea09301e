#include "ffl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "ffl/indicatrix.hpp"
#include "ffl/spectral.hpp"

namespace ffl {
namespace {

using MatFn = std::function<MatXd(const double*)>;

MatXd eval_shifted(const MatFn& f, const double* x, int n, int k, double dk, int l, double dl) {
  std::vector<double> xp(x, x + n);
  xp[k] += dk;
  xp[l] += dl;
  return f(xp.data());
}

// Fourth-order central first derivative in x^k.
MatXd d4(const MatFn& f, const double* x, int n, int k, double h) {
  return (-eval_shifted(f, x, n, k, 2 * h, k, 0) + 8.0 * eval_shifted(f, x, n, k, h, k, 0) -
          8.0 * eval_shifted(f, x, n, k, -h, k, 0) + eval_shifted(f, x, n, k, -2 * h, k, 0)) /
         (12.0 * h);
}

// Fourth-order second derivative d^2/dx^k dx^l (5-point stencil on the
// diagonal, tensor-product stencil off it) -- single-level differencing so
// the truncation error stays at O(h^4) with O(eps/h^2) roundoff.
MatXd dd4(const MatFn& f, const double* x, int n, int k, int l, double h) {
  if (k == l) {
    return (-eval_shifted(f, x, n, k, 2 * h, k, 0) + 16.0 * eval_shifted(f, x, n, k, h, k, 0) -
            30.0 * eval_shifted(f, x, n, k, 0, k, 0) + 16.0 * eval_shifted(f, x, n, k, -h, k, 0) -
            eval_shifted(f, x, n, k, -2 * h, k, 0)) /
           (12.0 * h * h);
  }
  const double w[4] = {-1.0, 8.0, -8.0, 1.0};
  const double s[4] = {2.0, 1.0, -1.0, -2.0};
  MatXd acc;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      MatXd term = w[a] * w[b] * eval_shifted(f, x, n, k, s[a] * h, l, s[b] * h);
      acc = (a == 0 && b == 0) ? term : MatXd(acc + term);
    }
  return acc / (144.0 * h * h);
}

}  // namespace

CurvatureReport riemannian_oracle(const Metric& m, const double* x, const double* y) {
  if (!m.is_riemannian()) {
    throw NotRiemannian("classical oracle needs a direction-independent metric, got family '" +
                        std::string(family_name(m.family())) + "'");
  }
  m.check_chart(x);
  const int n = m.dim();
  const double h = 1e-2;

  // Polarization: exact for quadratic F^2, only metric evaluations needed.
  auto g_at = [&](const double* xq) {
    MatXd g(n, n);
    std::vector<double> ei(n, 0.0), ej(n, 0.0), es(n, 0.0);
    for (int i = 0; i < n; ++i) {
      std::fill(ei.begin(), ei.end(), 0.0);
      ei[i] = 1.0;
      g(i, i) = m.f2(xq, ei.data());
      for (int j = i + 1; j < n; ++j) {
        std::fill(ej.begin(), ej.end(), 0.0);
        ej[j] = 1.0;
        for (int k = 0; k < n; ++k) es[k] = ei[k] + ej[k];
        g(i, j) = g(j, i) = 0.5 * (m.f2(xq, es.data()) - g(i, i) - m.f2(xq, ej.data()));
      }
    }
    return g;
  };

  const MatXd g = g_at(x);
  const MatXd ginv = g.inverse();
  std::vector<MatXd> dg(n);
  for (int k = 0; k < n; ++k) dg[k] = d4(g_at, x, n, k, h);
  std::vector<std::vector<MatXd>> ddg(n, std::vector<MatXd>(n));
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) ddg[k][l] = ddg[l][k] = dd4(g_at, x, n, k, l, h);

  // Gamma^i_{jk} = g^{il} A_{ljk}, A_{ljk} = (d_j g_lk + d_k g_jl - d_l g_jk)/2;
  // its x-derivative follows from dg, ddg and d(g^{-1}) = -g^{-1} dg g^{-1},
  // so no nested differencing is needed.
  Tensor3 low(n);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) low(l, j, k) = 0.5 * (dg[j](l, k) + dg[k](j, l) - dg[l](j, k));
  MatXd gam(n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += ginv(i, l) * low(l, j, k);
        gam(i, j * n + k) = s;
      }
  std::vector<MatXd> dginv(n);
  for (int m = 0; m < n; ++m) dginv[m] = -ginv * dg[m] * ginv;
  std::vector<MatXd> dgam(n, MatXd(n, n * n));  // dgam[m](i, j*n+k) = d_m Gamma^i_jk
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) {
            s += dginv[m](i, l) * low(l, j, k);
            s += ginv(i, l) * 0.5 *
                 (ddg[m][j](l, k) + ddg[m][k](j, l) - ddg[m][l](j, k));
          }
          dgam[m](i, j * n + k) = s;
        }

  Tensor4 riem(n);
  for (int hh = 0; hh < n; ++hh)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = dgam[i](hh, j * n + k) - dgam[j](hh, i * n + k);
          for (int l = 0; l < n; ++l) {
            s += gam(l, j * n + k) * gam(hh, i * n + l);
            s -= gam(l, i * n + k) * gam(hh, j * n + l);
          }
          riem(hh, k, i, j) = s;
        }

  CurvatureReport rep;
  rep.dim = n;
  rep.g = g;
  rep.ginv = ginv;
  rep.cartan = Tensor3(n);  // zero for quadratic F^2
  rep.r_hh = riem;

  VecXd yv(n);
  for (int i = 0; i < n; ++i) yv[i] = y[i];
  rep.f2 = yv.dot(g * yv);

  // Spray and nonlinear connection of the geodesic equation.
  rep.spray = VecXd::Zero(n);
  rep.gj = MatXd::Zero(n, n);
  rep.gamma = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        rep.gamma(i, j, k) = gam(i, j * n + k);
        rep.spray[i] += 0.5 * gam(i, j * n + k) * yv[j] * yv[k];
        rep.gj(i, j) += gam(i, j * n + k) * yv[k];
      }

  // R^i_k = (1/F^2) R^i_{jkm} y^j y^m and its traces.
  rep.r_red = MatXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        for (int mm = 0; mm < n; ++mm) s += riem(i, j, k, mm) * yv[j] * yv[mm];
      rep.r_red(i, k) = s / rep.f2;
    }
  rep.ric = rep.r_red.trace();

  MatXd ric_cl(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += riem(l, i, l, j);
      ric_cl(i, j) = s;
    }
  ric_cl = (0.5 * (ric_cl + ric_cl.transpose())).eval();
  rep.rc_trace = ric_cl;
  rep.ric_az = ric_cl;  // for quadratic F^2 both Ricci tensors coincide
  const MatXd b = ginv * ric_cl;
  rep.ric_norm = std::sqrt(std::max(0.0, (b * b).trace()));
  Eigen::SelfAdjointEigenSolver<MatXd> eig(g);
  rep.min_eig_g = eig.eigenvalues().minCoeff();
  return rep;
}

double report_flag(const CurvatureReport& rep, const VecXd& y, const VecXd& V) {
  const MatXd rlow = rep.g * rep.r_red;
  const double gVV = V.dot(rep.g * V);
  (void)y;
  return V.dot(rlow * V) / gVV;
}

double bernoulli_solution(double alpha, double t) {
  const double denom = 1.0 + alpha * t;
  if (!(denom > 0.0)) {
    throw PoleReached("comparison solution blows down at t = " + fmt17(-1.0 / alpha));
  }
  return alpha / denom;
}

double bernoulli_rk4(double alpha, double t, int steps) {
  double phi = alpha;
  const double dt = t / steps;
  auto f = [](double p) { return -p * p; };
  for (int s = 0; s < steps; ++s) {
    const double k1 = f(phi);
    const double k2 = f(phi + 0.5 * dt * k1);
    const double k3 = f(phi + 0.5 * dt * k2);
    const double k4 = f(phi + dt * k3);
    phi += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return phi;
}

const char* identity_name(IdentityId id) {
  switch (id) {
    case IdentityId::eq1: return "eq1";
    case IdentityId::eq3: return "eq3";
    case IdentityId::eq8: return "eq8";
    case IdentityId::eq6: return "eq6";
    case IdentityId::eq9_4: return "eq9_4";
    case IdentityId::eq10_margin: return "eq10_margin";
    case IdentityId::gauss9: return "gauss9";
    case IdentityId::orthogonality: return "orthogonality";
    case IdentityId::sm_conversion: return "sm_conversion";
  }
  return "?";
}

const char* theorem_name(TheoremId id) {
  switch (id) {
    case TheoremId::asli1: return "asli1";
    case TheoremId::asli2: return "asli2";
    case TheoremId::asli4: return "asli4";
    case TheoremId::asli5: return "asli5";
  }
  return "?";
}

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::report_only: return "report_only";
  }
  return "?";
}

namespace {

double rel_scale(double l, double r) { return std::max({std::abs(l), std::abs(r), 1.0}); }

// Rbar_jk = F^2 g_jh R^h_k, the 2-homogeneous reduced curvature form.
MatXd rbar_low(const Metric& m, const double* x, const double* y) {
  const CurvatureStack s = curvature_stack(m, x, y, 4, Depth::reduced);
  return s.f2() * s.r_red_low();
}

Metric homothety_metric(const MetricSpec& spec, double r) {
  MetricSpec sp = spec;
  if (sp.family == Family::round_sphere) sp.params["radius"] = r;
  return build_metric(sp);
}

}  // namespace

FlowFrames parametric_frames(const MetricSpec& spec, double t, double dt) {
  const ParametricState s0 = make_parametric_state(spec);
  auto radius_at = [&](double tt) {
    const double r2 = s0.r * s0.r - 2.0 * s0.kappa * tt;
    if (!(r2 > 0.0)) {
      throw Extinction("frames requested past extinction at t = " +
                           fmt17(s0.r * s0.r / (2.0 * s0.kappa)),
                       tt);
    }
    return std::sqrt(r2);
  };
  FlowFrames fr{homothety_metric(spec, radius_at(t - dt)), homothety_metric(spec, radius_at(t)),
                homothety_metric(spec, radius_at(t + dt)), t, dt};
  return fr;
}

FlowFrames grid_frames(const GridState& s, double dt) {
  const GridState b = step_flow_grid(s, -dt);
  const GridState a = step_flow_grid(s, dt);
  return FlowFrames{reconstruct_metric(b), reconstruct_metric(s), reconstruct_metric(a), s.t, dt};
}

double residual_eq1(const FlowFrames& fr, const double* x, const double* y, const VecXd& Z,
                    const VecXd& X) {
  const MatXd rb_b = rbar_low(fr.before, x, y);
  const MatXd rb_a = rbar_low(fr.after, x, y);
  const double lhs = Z.dot(((rb_a - rb_b) / (2.0 * fr.dt)) * X);

  const CurvatureStack s = curvature_stack(fr.at, x, y, 6, Depth::full);
  const MatXd rb = s.f2() * s.r_red_low();
  const MatXd az = s.ricci_az();
  const MatXd frame = s.gs_frame();
  double rhs = 0.0;
  for (int k = 0; k < frame.rows(); ++k) {
    const VecXd ek = frame.row(k).transpose();
    rhs -= 2.0 * ek.dot(rb * X) * ek.dot(az * Z);
  }
  return std::abs(lhs - rhs) / rel_scale(lhs, rhs);
}

double residual_eq3(const FlowFrames& fr, const double* x, const double* y) {
  const MatXd dt_rb = (rbar_low(fr.after, x, y) - rbar_low(fr.before, x, y)) / (2.0 * fr.dt);
  const CurvatureStack s = curvature_stack(fr.at, x, y, 6, Depth::full);
  // Frame completeness collapses the basis sum: sum_k e_k e_k^T = g^{-1}.
  const MatXd rhs = -2.0 * s.ricci_az() * s.ginv() * (s.f2() * s.r_red_low());
  const double scale =
      std::max({dt_rb.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff(), 1.0});
  return (dt_rb - rhs).cwiseAbs().maxCoeff() / scale;
}

double residual_eq8(const FlowFrames& fr, const double* x, const double* y) {
  auto f2ric = [&](const Metric& m) {
    const CurvatureStack s = curvature_stack(m, x, y, 4, Depth::reduced);
    return s.f2() * s.ric();
  };
  const double lhs = (f2ric(fr.after) - f2ric(fr.before)) / (2.0 * fr.dt);
  const CurvatureStack s = curvature_stack(fr.at, x, y, 6, Depth::full);
  const MatXd rup = s.r_red() * s.ginv();
  const MatXd az = s.ricci_az();
  const double rhs = -2.0 * s.f2() * (rup.array() * az.array()).sum();
  return std::abs(lhs - rhs) / rel_scale(lhs, rhs);
}

Eq6Residual residual_eq6(const FlowFrames& fr, const double* x, double theta) {
  const double e[2] = {std::cos(theta), std::sin(theta)};
  auto ric_at = [&](const Metric& m) {
    return curvature_stack(m, x, e, 4, Depth::reduced).ric();
  };
  const double dric_dt = (ric_at(fr.after) - ric_at(fr.before)) / (2.0 * fr.dt);
  // Both evolution operators are 0-homogeneous, so the indicatrix values
  // from sm_operators compare directly with the time derivative at e(theta).
  const SmOperators ops = sm_operators(fr.at, x, theta);
  const double rhs_amb = -ops.conv_rhs;
  const double rhs_sm = -ops.conv_lhs;
  Eq6Residual out;
  out.time_ambient = std::abs(dric_dt - rhs_amb) / rel_scale(dric_dt, rhs_amb);
  out.time_sm = std::abs(dric_dt - rhs_sm) / rel_scale(dric_dt, rhs_sm);
  out.conversion = ops.conv_residual / rel_scale(ops.conv_lhs, ops.conv_rhs);
  out.eq10_margin = dric_dt - rhs_sm + ops.ric * ops.ric;
  return out;
}

BoundCheck check_positivity(const std::vector<MonitorSample>& monitors, TheoremId which) {
  if (monitors.empty()) throw ConfigError("positivity check needs monitor rows");
  const bool use_flag = which == TheoremId::asli4;
  auto value = [&](const MonitorSample& m) {
    return use_flag ? std::min(m.min_ric, m.min_flag) : m.min_ric;
  };
  if (!(value(monitors.front()) > 0.0)) {
    throw NotApplicable("initial curvature not positive: " + fmt17(value(monitors.front())));
  }
  BoundCheck bc;
  bc.id = which;
  bc.alpha = monitors.front().min_ric;
  bc.min_margin = std::numeric_limits<double>::infinity();
  for (const MonitorSample& m : monitors) {
    const double v = value(m);
    bc.t.push_back(m.t);
    bc.margin.push_back(v);
    bc.min_margin = std::min(bc.min_margin, v);
    bc.k_bound = std::max(bc.k_bound, m.k_bound);
    if (v <= 0.0 && bc.first_violation_t < 0.0) {
      bc.first_violation_t = m.t;
      bc.passed = false;
    }
  }
  return bc;
}

BoundCheck check_lower_bound(const std::vector<MonitorSample>& monitors, double alpha) {
  if (monitors.empty()) throw ConfigError("lower-bound check needs monitor rows");
  if (!(alpha > 0.0)) throw NotApplicable("initial Ric infimum not positive: " + fmt17(alpha));
  BoundCheck bc;
  bc.id = TheoremId::asli5;
  bc.alpha = alpha;
  bc.min_margin = std::numeric_limits<double>::infinity();
  for (const MonitorSample& m : monitors) {
    const double margin = m.min_ric - bernoulli_solution(alpha, m.t);
    bc.t.push_back(m.t);
    bc.margin.push_back(margin);
    bc.min_margin = std::min(bc.min_margin, margin);
    bc.k_bound = std::max(bc.k_bound, m.k_bound);
    if (margin < -1e-9 && bc.first_violation_t < 0.0) {
      bc.first_violation_t = m.t;
      bc.passed = false;
    }
  }
  return bc;
}

BoundCheck check_ratio_bounds(const std::vector<double>& t,
                              const std::vector<std::vector<double>>& rbar, double k_bound) {
  if (t.empty() || rbar.empty()) throw ConfigError("ratio check needs sampled series");
  BoundCheck bc;
  bc.id = TheoremId::asli1;
  bc.k_bound = k_bound;
  for (const auto& series : rbar) {
    if (series.size() != t.size()) throw ConfigError("ratio series length mismatch");
    if (!(series.front() > 0.0)) {
      throw NotApplicable("initial Rbar(V,V) not positive: " + fmt17(series.front()));
    }
  }
  // Smallest C with |log ratio| <= 2 C K t across all samples and times.
  for (size_t k = 1; k < t.size(); ++k) {
    for (const auto& series : rbar) {
      if (!(series[k] > 0.0)) {
        bc.fitted_c = std::numeric_limits<double>::infinity();
        bc.passed = false;
        if (bc.first_violation_t < 0.0) bc.first_violation_t = t[k];
        continue;
      }
      const double lg = std::abs(std::log(series[k] / series.front()));
      if (lg <= 1e-14) continue;
      const double denom = 2.0 * k_bound * t[k];
      if (!(denom > 0.0)) {
        bc.fitted_c = std::numeric_limits<double>::infinity();
        bc.passed = false;
        if (bc.first_violation_t < 0.0) bc.first_violation_t = t[k];
        continue;
      }
      bc.fitted_c = std::max(bc.fitted_c, lg / denom);
    }
  }
  bc.min_margin = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < t.size(); ++k) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& series : rbar) {
      const double lg = series[k] > 0.0 ? std::abs(std::log(series[k] / series.front()))
                                        : std::numeric_limits<double>::infinity();
      worst = std::min(worst, 2.0 * bc.fitted_c * k_bound * t[k] - lg);
    }
    bc.t.push_back(t[k]);
    bc.margin.push_back(worst);
    bc.min_margin = std::min(bc.min_margin, worst);
  }
  if (!std::isfinite(bc.fitted_c)) bc.passed = false;
  return bc;
}

namespace {

struct SamplePoint {
  std::vector<double> x;
  double theta = 0.0;
};

std::vector<double> suite_base_x(const Metric& m) {
  if (m.spec().chart == Chart::sphere_polar) {
    std::vector<double> x(m.dim());
    x[0] = 1.2;
    for (int i = 1; i < m.dim(); ++i) x[i] = 0.7;
    return x;
  }
  return std::vector<double>{0.9, 2.3};
}

std::vector<double> suite_rand_x(const Metric& m, Rng& rng) {
  const int n = m.dim();
  std::vector<double> x(n);
  if (m.spec().chart == Chart::sphere_polar) {
    for (int i = 0; i < n - 1; ++i) x[i] = rng.uniform(0.4, M_PI - 0.4);
    x[n - 1] = rng.uniform(0.0, 2.0 * M_PI);
  } else {
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(0.0, 2.0 * M_PI);
  }
  return x;
}

VecXd suite_rand_y(int n, Rng& rng) {
  while (true) {
    VecXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.uniform(-1.0, 1.0);
    const double nn = y.norm();
    if (nn > 0.1) return y / nn;
  }
}

struct Accum {
  double max_abs = 0.0;
  double sq_sum = 0.0;
  long long count = 0;
  void add(double v) {
    max_abs = std::max(max_abs, std::abs(v));
    sq_sum += v * v;
    ++count;
  }
  double rms() const { return count ? std::sqrt(sq_sum / static_cast<double>(count)) : 0.0; }
};

ResidualReport finish(IdentityId id, std::string samples, const Accum& a, double tol,
                      bool hard, double dt = 0.0, int nx = 0, int ntheta = 0) {
  ResidualReport r;
  r.id = id;
  r.samples = std::move(samples);
  r.max_abs = a.max_abs;
  r.rms = a.rms();
  r.dt = dt;
  r.nx = nx;
  r.ntheta = ntheta;
  r.tol = hard ? tol : 0.0;
  r.status = hard ? (a.max_abs <= tol ? CheckStatus::pass : CheckStatus::fail)
                  : CheckStatus::report_only;
  return r;
}

// Rbar(V,V) sampled along a run: fixed (x, theta, V) with V the t=0
// g-orthogonal edge, evaluated against each supplied metric.
std::vector<std::vector<double>> rbar_series(const std::vector<Metric>& metrics,
                                             const std::vector<SamplePoint>& pts,
                                             const std::vector<VecXd>& edges) {
  std::vector<std::vector<double>> out(pts.size());
  for (size_t s = 0; s < pts.size(); ++s) {
    const double y[2] = {std::cos(pts[s].theta), std::sin(pts[s].theta)};
    for (const Metric& m : metrics) {
      const CurvatureStack st = curvature_stack(m, pts[s].x.data(), y, 4, Depth::reduced);
      out[s].push_back(st.f2() * edges[s].dot(st.r_red_low() * edges[s]));
    }
  }
  return out;
}

void append_json(std::string& out, const ResidualReport& r) {
  out += "{\"identity\":\"";
  out += identity_name(r.id);
  out += "\",\"samples\":\"" + r.samples + "\",\"max_abs\":" + fmt17(r.max_abs) +
         ",\"rms\":" + fmt17(r.rms) + ",\"dt\":" + fmt17(r.dt) +
         ",\"nx\":" + std::to_string(r.nx) + ",\"ntheta\":" + std::to_string(r.ntheta) +
         ",\"tol\":" + fmt17(r.tol) + ",\"status\":\"" + status_name(r.status) + "\"}";
}

void append_json(std::string& out, const BoundCheck& b) {
  out += "{\"theorem\":\"";
  out += theorem_name(b.id);
  out += "\",\"samples\":\"" + b.samples + "\",\"alpha\":" + fmt17(b.alpha) +
         ",\"k_bound\":" + fmt17(b.k_bound) + ",\"fitted_c\":" + fmt17(b.fitted_c) +
         ",\"min_margin\":" + fmt17(b.min_margin) +
         ",\"first_violation_t\":" + fmt17(b.first_violation_t) + ",\"status\":\"" +
         (b.applicable ? (b.passed ? "pass" : "fail") : "not_applicable") + "\",\"t\":[";
  for (size_t i = 0; i < b.t.size(); ++i) {
    if (i) out += ',';
    out += fmt17(b.t[i]);
  }
  out += "],\"margin\":[";
  for (size_t i = 0; i < b.margin.size(); ++i) {
    if (i) out += ',';
    out += fmt17(b.margin[i]);
  }
  out += "]}";
}

}  // namespace

bool VerifySuiteResult::all_hard_checks_pass() const {
  for (const ResidualReport& r : residuals) {
    if (r.status == CheckStatus::fail) return false;
  }
  for (const BoundCheck& b : bounds) {
    if (b.applicable && !b.passed) return false;
  }
  if (ran_bernoulli && !bernoulli_pass) return false;
  if (ran_oracle && !oracle_pass) return false;
  return true;
}

VerifySuiteResult verify_suite(const std::vector<std::string>& only) {
  auto want = [&](const char* name) {
    if (only.empty()) return true;
    for (const std::string& s : only) {
      if (s == name) return true;
    }
    return false;
  };
  const bool want_param_ids = want("eq1") || want("eq3") || want("eq8") || want("eq6") ||
                              want("eq9_4") || want("eq10_margin");
  const bool want_bounds =
      want("asli1") || want("asli2") || want("asli4") || want("asli5");

  const char* corpus[] = {"euclidean",
                          "torus:amplitude=0.3,amplitude2=0.2",
                          "sphere:radius=1",
                          "sphere:radius=2",
                          "randers:b1=0.2,amplitude=0.3",
                          "randers:b1=0.3,b2=0.1",
                          "conformal:amplitude=0.25,epsilon=0.1"};

  VerifySuiteResult out;

  if (want("orthogonality")) {
    Accum a;
    for (const char* spec : corpus) {
      const Metric m = build_metric(parse_spec_string(spec));
      const std::vector<double> x = suite_base_x(m);
      for (int k = 0; k < 64; ++k) {
        const IndicatrixFrame fr = indicatrix_basis(m, x.data(), 2.0 * M_PI * k / 64);
        a.add(fr.orth_residual.cwiseAbs().maxCoeff());
      }
    }
    out.residuals.push_back(
        finish(IdentityId::orthogonality, "7-family corpus x 64 fiber angles", a, 1e-10, true));
  }

  if (want("gauss9")) {
    Accum a;
    for (const char* spec : corpus) {
      const Metric m = build_metric(parse_spec_string(spec));
      const std::vector<double> x = suite_base_x(m);
      for (int k = 0; k < 64; ++k) {
        a.add(gauss_formula_residual(m, x.data(), 2.0 * M_PI * k / 64));
      }
    }
    out.residuals.push_back(
        finish(IdentityId::gauss9, "7-family corpus x 64 fiber angles", a, 1e-7, true));
  }

  if (want("sm_conversion")) {
    Accum a;
    for (const char* spec : corpus) {
      const Metric m = build_metric(parse_spec_string(spec));
      const std::vector<double> x = suite_base_x(m);
      for (int k = 0; k < 12; ++k) {
        const SmOperators ops = sm_operators(m, x.data(), 2.0 * M_PI * k / 12 + 0.05);
        a.add(ops.conv_residual / rel_scale(ops.conv_lhs, ops.conv_rhs));
      }
    }
    out.residuals.push_back(finish(IdentityId::sm_conversion,
                                   "7-family corpus x 12 fiber angles, relative", a, 1e-6, true));
  }

  if (want_param_ids) {
    const double dt = 1e-3;
    const char* specs[] = {"sphere:radius=1", "sphere:radius=2,dim=3", "euclidean"};
    const double times[] = {0.1, 0.3, 0.1};
    Accum a1, a3, a8, a6, a94, a10;
    Rng rng(101);
    for (int c = 0; c < 3; ++c) {
      const MetricSpec spec = parse_spec_string(specs[c]);
      const FlowFrames fr = parametric_frames(spec, times[c], dt);
      const int n = fr.at.dim();
      for (int p = 0; p < 4; ++p) {
        const std::vector<double> x = suite_rand_x(fr.at, rng);
        const VecXd y = suite_rand_y(n, rng);
        for (int q = 0; q < 2; ++q) {
          const VecXd Z = suite_rand_y(n, rng);
          const VecXd X = suite_rand_y(n, rng);
          a1.add(residual_eq1(fr, x.data(), y.data(), Z, X));
        }
        a3.add(residual_eq3(fr, x.data(), y.data()));
        a8.add(residual_eq8(fr, x.data(), y.data()));
        if (n == 2) {
          const Eq6Residual r6 = residual_eq6(fr, x.data(), rng.uniform(0.0, 2.0 * M_PI));
          a6.add(r6.time_ambient);
          a94.add(r6.time_sm);
          a10.add(std::max(0.0, -r6.eq10_margin));
        }
      }
    }
    const std::string desc = "parametric homothety frames: sphere r=1 (n=2), r=2 (n=3), euclidean";
    if (want("eq1"))
      out.residuals.push_back(finish(IdentityId::eq1, desc + "; 4 pts x 2 flag pairs", a1, 1e-6,
                                     true, dt));
    if (want("eq3"))
      out.residuals.push_back(finish(IdentityId::eq3, desc + "; 4 pts, tensor form", a3, 1e-6,
                                     true, dt));
    if (want("eq8"))
      out.residuals.push_back(finish(IdentityId::eq8, desc + "; 4 pts, traced form", a8, 0.0,
                                     false, dt));
    if (want("eq6"))
      out.residuals.push_back(finish(IdentityId::eq6, desc + "; dim-2 members, ambient operator",
                                     a6, 0.0, false, dt));
    if (want("eq9_4"))
      out.residuals.push_back(finish(IdentityId::eq9_4,
                                     desc + "; dim-2 members, sphere-bundle operator", a94, 0.0,
                                     false, dt));
    if (want("eq10_margin"))
      out.residuals.push_back(finish(IdentityId::eq10_margin,
                                     desc + "; violation magnitude max(0, -margin)", a10, 0.0,
                                     false, dt));
  }

  if (want_param_ids) {
    const double dt = 5e-3;
    GridState s = make_grid_state(build_metric(parse_spec_string("torus:amplitude=0.1")), 16, 16);
    for (int k = 0; k < 4; ++k) s = step_flow_grid(s, dt);
    const FlowFrames fr = grid_frames(s, dt);
    Accum a1, a3, a8, a6, a94, a10;
    Rng rng(202);
    for (int p = 0; p < 6; ++p) {
      const double x[2] = {rng.uniform(0.0, 2.0 * M_PI), rng.uniform(0.0, 2.0 * M_PI)};
      const double th = rng.uniform(0.0, 2.0 * M_PI);
      const double y[2] = {std::cos(th), std::sin(th)};
      const VecXd Z = suite_rand_y(2, rng);
      const VecXd X = suite_rand_y(2, rng);
      a1.add(residual_eq1(fr, x, y, Z, X));
      a3.add(residual_eq3(fr, x, y));
      a8.add(residual_eq8(fr, x, y));
      const Eq6Residual r6 = residual_eq6(fr, x, th);
      a6.add(r6.time_ambient);
      a94.add(r6.time_sm);
      a10.add(std::max(0.0, -r6.eq10_margin));
    }
    const std::string desc = "bump-torus grid flow at t=0.02; 6 random (x, theta)";
    if (want("eq1"))
      out.residuals.push_back(finish(IdentityId::eq1, desc, a1, 0.0, false, dt, 16, 16));
    if (want("eq3"))
      out.residuals.push_back(finish(IdentityId::eq3, desc, a3, 0.0, false, dt, 16, 16));
    if (want("eq8"))
      out.residuals.push_back(finish(IdentityId::eq8, desc, a8, 0.0, false, dt, 16, 16));
    if (want("eq6"))
      out.residuals.push_back(finish(IdentityId::eq6, desc, a6, 0.0, false, dt, 16, 16));
    if (want("eq9_4"))
      out.residuals.push_back(finish(IdentityId::eq9_4, desc, a94, 0.0, false, dt, 16, 16));
    if (want("eq10_margin"))
      out.residuals.push_back(
          finish(IdentityId::eq10_margin, desc, a10, 0.0, false, dt, 16, 16));
  }

  if (want_bounds) {
    // Homothety runs: the closed-form families where the bounds are exact.
    const struct {
      const char* spec;
      double t_end, cadence;
    } runs[] = {{"sphere:radius=1", 0.4, 0.05}, {"sphere:radius=2", 0.5, 0.1}};
    for (const auto& rn : runs) {
      FlowConfig cfg;
      cfg.metric = parse_spec_string(rn.spec);
      cfg.dt = 1e-3;
      cfg.t_end = rn.t_end;
      cfg.cadence = rn.cadence;
      const FlowResult res = run_flow(cfg);
      const std::string desc = std::string(rn.spec) + " parametric run to t=" + fmt17(rn.t_end);
      if (want("asli5")) {
        BoundCheck bc = check_lower_bound(res.monitors, res.monitors.front().min_ric);
        bc.samples = desc;
        out.bounds.push_back(std::move(bc));
      }
      if (want("asli2")) {
        BoundCheck bc = check_positivity(res.monitors, TheoremId::asli2);
        bc.samples = desc;
        out.bounds.push_back(std::move(bc));
      }
      if (want("asli4")) {
        BoundCheck bc = check_positivity(res.monitors, TheoremId::asli4);
        bc.samples = desc;
        out.bounds.push_back(std::move(bc));
      }
      if (want("asli1")) {
        const ParametricState s0 = make_parametric_state(cfg.metric);
        std::vector<Metric> metrics;
        std::vector<double> times;
        for (const MonitorSample& m : res.monitors) {
          times.push_back(m.t);
          metrics.push_back(
              homothety_metric(cfg.metric, std::sqrt(s0.r * s0.r - 2.0 * s0.kappa * m.t)));
        }
        Rng rng(303);
        std::vector<SamplePoint> pts;
        std::vector<VecXd> edges;
        for (int p = 0; p < 4; ++p) {
          SamplePoint sp;
          sp.x = suite_rand_x(metrics.front(), rng);
          sp.theta = rng.uniform(0.0, 2.0 * M_PI);
          const double y[2] = {std::cos(sp.theta), std::sin(sp.theta)};
          const CurvatureStack st =
              curvature_stack(metrics.front(), sp.x.data(), y, 4, Depth::reduced);
          const MatXd g = st.g();
          VecXd yv(2);
          yv << y[0], y[1];
          VecXd seed(2);
          seed << -y[1], y[0];
          edges.push_back(seed - (seed.dot(g * yv) / yv.dot(g * yv)) * yv);
          pts.push_back(std::move(sp));
        }
        double kb = 0.0;
        for (const MonitorSample& m : res.monitors) kb = std::max(kb, m.k_bound);
        BoundCheck bc = check_ratio_bounds(times, rbar_series(metrics, pts, edges), kb);
        bc.samples = desc + "; 4 fixed flags";
        out.bounds.push_back(std::move(bc));
      }
    }

    // Flat family: the theorems do not apply; record that honestly.
    if (want("asli2") || want("asli5")) {
      FlowConfig cfg;
      cfg.metric = parse_spec_string("euclidean");
      cfg.dt = 0.05;
      cfg.t_end = 0.2;
      cfg.cadence = 0.1;
      const FlowResult res = run_flow(cfg);
      auto record_na = [&](TheoremId id, const std::string& why) {
        BoundCheck bc;
        bc.id = id;
        bc.samples = "euclidean parametric run: " + why;
        bc.applicable = false;
        out.bounds.push_back(std::move(bc));
      };
      if (want("asli5")) {
        try {
          check_lower_bound(res.monitors, res.monitors.front().min_ric);
          throw ConfigError("flat run unexpectedly applicable");
        } catch (const NotApplicable& e) {
          record_na(TheoremId::asli5, e.what());
        }
      }
      if (want("asli2")) {
        try {
          check_positivity(res.monitors, TheoremId::asli2);
          throw ConfigError("flat run unexpectedly applicable");
        } catch (const NotApplicable& e) {
          record_na(TheoremId::asli2, e.what());
        }
      }
    }

    // Grid run: empirical ratio constant on the bump torus.
    if (want("asli1")) {
      FlowConfig cfg;
      cfg.metric = parse_spec_string("torus:amplitude=0.1");
      cfg.mode = FlowMode::grid;
      cfg.nx = 16;
      cfg.ntheta = 16;
      cfg.dt = 5e-3;
      cfg.t_end = 0.02;
      cfg.cadence = 0.01;
      cfg.keep_snapshots = true;
      const FlowResult res = run_flow(cfg);
      std::vector<Metric> metrics;
      std::vector<double> times;
      for (const Snapshot& sn : res.snapshots) {
        times.push_back(sn.t);
        metrics.push_back(
            reconstruct_metric(GridState{sn.t, sn.nx, sn.ntheta, sn.phi, cfg.metric}));
      }
      Rng rng(404);
      std::vector<SamplePoint> pts;
      std::vector<VecXd> edges;
      int tries = 0;
      while (pts.size() < 4 && tries < 200) {
        ++tries;
        SamplePoint sp;
        // Positive-curvature region of u = 0.1 cos x1 sits near x1 = 0.
        sp.x = {rng.uniform(-1.0, 1.0), rng.uniform(0.0, 2.0 * M_PI)};
        if (sp.x[0] < 0.0) sp.x[0] += 2.0 * M_PI;
        sp.theta = rng.uniform(0.0, 2.0 * M_PI);
        const double y[2] = {std::cos(sp.theta), std::sin(sp.theta)};
        const CurvatureStack st =
            curvature_stack(metrics.front(), sp.x.data(), y, 4, Depth::reduced);
        const MatXd g = st.g();
        VecXd yv(2);
        yv << y[0], y[1];
        VecXd seed(2);
        seed << -y[1], y[0];
        const VecXd V = seed - (seed.dot(g * yv) / yv.dot(g * yv)) * yv;
        if (st.f2() * V.dot(st.r_red_low() * V) < 0.02) continue;
        pts.push_back(std::move(sp));
        edges.push_back(V);
      }
      double kb = 0.0;
      for (const MonitorSample& m : res.monitors) kb = std::max(kb, m.k_bound);
      BoundCheck bc = check_ratio_bounds(times, rbar_series(metrics, pts, edges), kb);
      bc.samples = "bump-torus grid run to t=0.02; 4 positive-curvature flags";
      out.bounds.push_back(std::move(bc));
    }
  }

  if (want("bernoulli")) {
    out.ran_bernoulli = true;
    for (double alpha : {0.1, 1.0, 2.0}) {
      for (int k = 0; k <= 10; ++k) {
        const double t = 0.5 * k;
        const double err = std::abs(bernoulli_solution(alpha, t) -
                                    (t == 0.0 ? alpha : bernoulli_rk4(alpha, t, 5000)));
        out.bernoulli_max_err = std::max(out.bernoulli_max_err, err);
      }
    }
    out.bernoulli_pass = out.bernoulli_max_err <= 1e-10;
  }

  if (want("oracle")) {
    out.ran_oracle = true;
    const char* riem[] = {"euclidean", "torus:amplitude=0.3,amplitude2=0.2", "sphere:radius=1",
                          "sphere:radius=2", "conformal:amplitude=0.1"};
    Rng rng(505);
    for (const char* spec : riem) {
      const Metric m = build_metric(parse_spec_string(spec));
      for (int p = 0; p < 5; ++p) {
        const std::vector<double> x = suite_rand_x(m, rng);
        const VecXd y = suite_rand_y(m.dim(), rng);
        const CurvatureReport got = curvature_report(m, x.data(), y.data());
        const CurvatureReport ora = riemannian_oracle(m, x.data(), y.data());
        auto rel_mat = [](const MatXd& a, const MatXd& b) {
          const double sc = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-9});
          return (a - b).cwiseAbs().maxCoeff() / sc;
        };
        double v = rel_mat(got.g, ora.g);
        v = std::max(v, rel_mat(got.r_red, ora.r_red));
        v = std::max(v, rel_mat(got.rc_trace, ora.rc_trace));
        v = std::max(v, std::abs(got.ric - ora.ric) /
                            std::max({std::abs(got.ric), std::abs(ora.ric), 1e-9}));
        out.oracle_max_rel = std::max(out.oracle_max_rel, v);
      }
    }
    out.oracle_pass = out.oracle_max_rel <= 1e-6;
  }

  return out;
}

std::string verify_report_json(const VerifySuiteResult& r) {
  std::string out = "{\"residuals\":[";
  for (size_t i = 0; i < r.residuals.size(); ++i) {
    if (i) out += ',';
    append_json(out, r.residuals[i]);
  }
  out += "],\"bounds\":[";
  for (size_t i = 0; i < r.bounds.size(); ++i) {
    if (i) out += ',';
    append_json(out, r.bounds[i]);
  }
  out += "]";
  if (r.ran_bernoulli) {
    out += ",\"bernoulli\":{\"max_abs\":" + fmt17(r.bernoulli_max_err) +
           ",\"tol\":1e-10,\"status\":\"" + (r.bernoulli_pass ? "pass" : "fail") + "\"}";
  }
  if (r.ran_oracle) {
    out += ",\"oracle\":{\"max_rel\":" + fmt17(r.oracle_max_rel) +
           ",\"tol\":1e-06,\"status\":\"" + (r.oracle_pass ? "pass" : "fail") + "\"}";
  }
  out += ",\"all_pass\":";
  out += (r.all_hard_checks_pass() ? "true" : "false");
  out += "}";
  return out;
}

}  // namespace ffl
