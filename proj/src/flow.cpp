#include "ffl/flow.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Dense>

#include "ffl/geometry.hpp"
#include "ffl/spectral.hpp"

namespace ffl {
namespace {

constexpr int kGridOrder = 4;  // jet order per node: enough for R^i_k values

// Per-node geometry of a phi field: Ric, g, flag curvature at the (unique
// up to scale) g-orthogonal edge, and the convexity margin.
struct GridGeometry {
  std::vector<double> ric;
  std::vector<double> g11, g12, g22;
  std::vector<double> flag;
  double min_eig = 0.0;
};

GridGeometry grid_eval(int nx, int nt, const std::vector<double>& phi) {
  SpectralField3 f(nx, nt, phi);
  const int S = kGridOrder + 1;
  std::vector<std::vector<double>> dfield(static_cast<size_t>(S) * S * S);
  for (int a = 0; a <= kGridOrder; ++a)
    for (int b = 0; a + b <= kGridOrder; ++b)
      for (int c = 0; a + b + c <= kGridOrder; ++c)
        dfield[(static_cast<size_t>(a) * S + b) * S + c] = f.derivative_field(a, b, c);

  const size_t nodes = static_cast<size_t>(nx) * nx * nt;
  GridGeometry out;
  out.ric.resize(nodes);
  out.g11.resize(nodes);
  out.g12.resize(nodes);
  out.g22.resize(nodes);
  out.flag.resize(nodes);
  out.min_eig = std::numeric_limits<double>::infinity();

  const JetSpace& sp = JetSpace::get(4, kGridOrder);
  std::vector<double> dphi(static_cast<size_t>(S) * S * S, 0.0);
  for (size_t node = 0; node < nodes; ++node) {
    const int j = static_cast<int>(node % nt);
    for (size_t q = 0; q < dfield.size(); ++q)
      if (!dfield[q].empty()) dphi[q] = dfield[q][node];
    const double th = 2.0 * M_PI * j / nt;
    const double y0[2] = {std::cos(th), std::sin(th)};
    Jet f2 = compose_f2_jet(sp, y0, dphi, kGridOrder);
    VecXd yv(2);
    yv << y0[0], y0[1];
    CurvatureStack s(f2, yv, Depth::reduced);

    out.ric[node] = s.ric();
    const MatXd g = s.g();
    out.g11[node] = g(0, 0);
    out.g12[node] = g(0, 1);
    out.g22[node] = g(1, 1);
    const double half_tr = 0.5 * (g(0, 0) + g(1, 1));
    const double disc = std::sqrt(std::max(0.0, half_tr * half_tr - (g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1))));
    out.min_eig = std::min(out.min_eig, half_tr - disc);

    VecXd seed(2);
    seed << -y0[1], y0[0];
    VecXd v = seed - (seed.dot(g * yv) / yv.dot(g * yv)) * yv;
    out.flag[node] = s.flag_curvature(v);
  }
  return out;
}

// Stability budget for the explicit stepper.  Linearised about a flat state
// the flow damps the (k1, k2, m) Fourier mode of phi at rate
// (k1^2 + k2^2) max(1, m^2/2); modes above the cap are stiff beyond what
// RK4 tolerates at practical dt while carrying only the spectral tail of
// analytic data, so the semi-discrete system drops them from the rate.
// The cap is dt-independent: every run integrates the same projected ODE.
constexpr double kSymbolCap = 270.0;

void stability_projection(int nx, int nt, std::vector<double>& f) {
  std::vector<std::complex<double>> a(f.size());
  for (size_t q = 0; q < f.size(); ++q) a[q] = f[q];
  auto pass = [&](bool inverse) {
    for (int i1 = 0; i1 < nx; ++i1)
      for (int i2 = 0; i2 < nx; ++i2) {
        fft_radix2(&a[(static_cast<size_t>(i1) * nx + i2) * nt], nt, inverse);
      }
    std::vector<std::complex<double>> line(nx);
    for (int i1 = 0; i1 < nx; ++i1)
      for (int j = 0; j < nt; ++j) {
        for (int i2 = 0; i2 < nx; ++i2) line[i2] = a[(static_cast<size_t>(i1) * nx + i2) * nt + j];
        fft_radix2(line.data(), nx, inverse);
        for (int i2 = 0; i2 < nx; ++i2) a[(static_cast<size_t>(i1) * nx + i2) * nt + j] = line[i2];
      }
    for (int i2 = 0; i2 < nx; ++i2)
      for (int j = 0; j < nt; ++j) {
        for (int i1 = 0; i1 < nx; ++i1) line[i1] = a[(static_cast<size_t>(i1) * nx + i2) * nt + j];
        fft_radix2(line.data(), nx, inverse);
        for (int i1 = 0; i1 < nx; ++i1) a[(static_cast<size_t>(i1) * nx + i2) * nt + j] = line[i1];
      }
  };
  pass(false);
  for (int i1 = 0; i1 < nx; ++i1) {
    const int k1 = i1 <= nx / 2 ? i1 : i1 - nx;
    for (int i2 = 0; i2 < nx; ++i2) {
      const int k2 = i2 <= nx / 2 ? i2 : i2 - nx;
      for (int j = 0; j < nt; ++j) {
        const int m = j <= nt / 2 ? j : j - nt;
        const double rate =
            static_cast<double>(k1 * k1 + k2 * k2) * std::max(1.0, 0.5 * m * m);
        if (rate > kSymbolCap) a[(static_cast<size_t>(i1) * nx + i2) * nt + j] = 0.0;
      }
    }
  }
  pass(true);
  for (size_t q = 0; q < f.size(); ++q) f[q] = a[q].real();
}

std::vector<double> grid_rhs(const GridState& s, const std::vector<double>& phi) {
  GridGeometry geo;
  try {
    geo = grid_eval(s.nx, s.ntheta, phi);
  } catch (const DegenerateMetric& e) {
    throw Degeneration(std::string("flow left the strongly convex cone: ") + e.what(), s.t);
  }
  std::vector<double> rhs(geo.ric.size());
  for (size_t i = 0; i < rhs.size(); ++i) rhs[i] = -geo.ric[i];
  stability_projection(s.nx, s.ntheta, rhs);
  return rhs;
}

std::vector<double> axpy(const std::vector<double>& base, double a, const std::vector<double>& d) {
  std::vector<double> out(base);
  for (size_t i = 0; i < out.size(); ++i) out[i] += a * d[i];
  return out;
}

// Akbar-Zadeh Ricci tensors on a theta ring from q = F^2 Ric at |y| = 1:
// the 2-homogeneous extension |y|^2 q(theta) has the closed-form Hessian
// Hess_ij = 2 delta_ij q + q'' eta_i eta_j + q' (y_i eta_j + y_j eta_i),
// eta = (-y2, y1); Ric_ij = Hess_ij / 2.
void ring_ricci_tensor(const std::vector<double>& q, std::vector<Mat2d>& out) {
  const int nt = static_cast<int>(q.size());
  std::vector<std::complex<double>> hat(q.begin(), q.end());
  fft_radix2(hat.data(), nt, false);
  std::vector<std::complex<double>> d1(nt), d2(nt);
  for (int j = 0; j < nt; ++j) {
    const int k = (j <= nt / 2) ? j : j - nt;
    const bool nyq = (j == nt / 2);
    d1[j] = nyq ? 0.0 : hat[j] * std::complex<double>(0.0, k);
    d2[j] = hat[j] * static_cast<double>(-k * k);
  }
  fft_radix2(d1.data(), nt, true);
  fft_radix2(d2.data(), nt, true);
  out.resize(nt);
  for (int j = 0; j < nt; ++j) {
    const double th = 2.0 * M_PI * j / nt;
    const double y1 = std::cos(th), y2 = std::sin(th);
    const double e1 = -y2, e2 = y1;
    const double qp = d1[j].real(), qpp = d2[j].real();
    Mat2d& m = out[j];
    m(0, 0) = 0.5 * (2.0 * q[j] + qpp * e1 * e1 + 2.0 * qp * y1 * e1);
    m(1, 1) = 0.5 * (2.0 * q[j] + qpp * e2 * e2 + 2.0 * qp * y2 * e2);
    m(0, 1) = m(1, 0) = 0.5 * (qpp * e1 * e2 + qp * (y1 * e2 + y2 * e1));
  }
}

struct PSample {
  std::vector<double> x, y;
};

std::vector<PSample> monitor_samples(const Metric& m, std::uint64_t seed) {
  Rng rng(seed);
  const int n = m.dim();
  std::vector<PSample> out;
  for (int s = 0; s < 16; ++s) {
    PSample p;
    p.x.resize(n);
    if (m.spec().chart == Chart::sphere_polar) {
      for (int i = 0; i < n - 1; ++i) p.x[i] = rng.uniform(0.3, M_PI - 0.3);
      p.x[n - 1] = rng.uniform(0.0, 2.0 * M_PI);
    } else {
      for (int i = 0; i < n; ++i) p.x[i] = rng.uniform(0.0, 2.0 * M_PI);
    }
    while (true) {
      p.y.resize(n);
      double norm = 0.0;
      for (int i = 0; i < n; ++i) {
        p.y[i] = rng.uniform(-1.0, 1.0);
        norm += p.y[i] * p.y[i];
      }
      if (norm > 1e-2) {
        norm = std::sqrt(norm);
        for (auto& v : p.y) v /= norm;
        break;
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

Metric parametric_metric(const ParametricState& s) {
  MetricSpec spec = s.origin;
  if (spec.family == Family::round_sphere) spec.params["radius"] = s.r;
  return build_metric(spec);
}

double min_eig_sym(const MatXd& g) {
  Eigen::SelfAdjointEigenSolver<MatXd> eig(g);
  return eig.eigenvalues().minCoeff();
}

MonitorSample parametric_monitor(const ParametricState& s, const std::vector<PSample>& samples,
                                 double dt) {
  const Metric m = parametric_metric(s);
  // Central states for the flow-equivalence residual; the backward step is
  // always safe, the forward one shrinks near extinction.
  double h = dt;
  if (s.kappa > 0.0) h = std::min(h, s.r * s.r / (8.0 * s.kappa));
  ParametricState sm = s, sp = s;
  sm.r = std::sqrt(s.r * s.r + 2.0 * s.kappa * h);
  sp.r = std::sqrt(s.r * s.r - 2.0 * s.kappa * h);
  const Metric mp = parametric_metric(sp);
  const Metric mm = parametric_metric(sm);

  MonitorSample ms;
  ms.t = s.t;
  ms.min_ric = std::numeric_limits<double>::infinity();
  ms.max_ric = -ms.min_ric;
  ms.min_flag = ms.min_ric;
  ms.min_eig_g = ms.min_ric;
  for (const PSample& p : samples) {
    CurvatureStack st = curvature_stack(m, p.x.data(), p.y.data(), 6, Depth::full);
    const double ric = st.ric();
    ms.min_ric = std::min(ms.min_ric, ric);
    ms.max_ric = std::max(ms.max_ric, ric);
    const MatXd g = st.g();
    VecXd yv(m.dim());
    for (int i = 0; i < m.dim(); ++i) yv[i] = p.y[i];
    for (int a = 0; a < m.dim() - 1; ++a) {
      VecXd seed = VecXd::Zero(m.dim());
      seed[(a + 1) % m.dim()] = 1.0;
      seed[a] = -p.y[(a + 1) % m.dim()];
      VecXd v = seed - (seed.dot(g * yv) / yv.dot(g * yv)) * yv;
      if (v.dot(g * v) > 1e-8) ms.min_flag = std::min(ms.min_flag, st.flag_curvature(v));
    }
    ms.k_bound = std::max(ms.k_bound, st.ricci_norm());
    ms.min_eig_g = std::min(ms.min_eig_g, min_eig_sym(g));

    const MatXd az = st.ricci_az();
    const MatXd gp = curvature_stack(mp, p.x.data(), p.y.data(), 2, Depth::spray).g();
    const MatXd gm = curvature_stack(mm, p.x.data(), p.y.data(), 2, Depth::spray).g();
    const MatXd res = (gp - gm) / (2.0 * h) + 2.0 * az;
    ms.residual_flow_eqv = std::max(ms.residual_flow_eqv, res.cwiseAbs().maxCoeff());
  }
  return ms;
}

MonitorSample grid_monitor(const GridState& s, double dt) {
  GridGeometry geo = grid_eval(s.nx, s.ntheta, s.phi);
  MonitorSample ms;
  ms.t = s.t;
  ms.min_ric = *std::min_element(geo.ric.begin(), geo.ric.end());
  ms.max_ric = *std::max_element(geo.ric.begin(), geo.ric.end());
  ms.min_flag = *std::min_element(geo.flag.begin(), geo.flag.end());
  ms.min_eig_g = geo.min_eig;

  // Euler states phi -/+ dt*Ric for the central time difference; the Euler
  // truncation enters at the same O(dt^2) as the difference itself.
  std::vector<double> phip(s.phi), phim(s.phi);
  for (size_t i = 0; i < phip.size(); ++i) {
    phip[i] -= dt * geo.ric[i];
    phim[i] += dt * geo.ric[i];
  }
  GridGeometry geop = grid_eval(s.nx, s.ntheta, phip);
  GridGeometry geom = grid_eval(s.nx, s.ntheta, phim);

  const int nt = s.ntheta;
  std::vector<double> q(nt);
  std::vector<Mat2d> ricci;
  for (int i1 = 0; i1 < s.nx; ++i1)
    for (int i2 = 0; i2 < s.nx; ++i2) {
      const size_t base = (static_cast<size_t>(i1) * s.nx + i2) * nt;
      for (int j = 0; j < nt; ++j) q[j] = std::exp(2.0 * s.phi[base + j]) * geo.ric[base + j];
      ring_ricci_tensor(q, ricci);
      for (int j = 0; j < nt; ++j) {
        const size_t node = base + j;
        Mat2d g;
        g << geo.g11[node], geo.g12[node], geo.g12[node], geo.g22[node];
        const Mat2d a = g.inverse() * ricci[j];
        const double knorm = std::sqrt(std::max(0.0, (a * a).trace()));
        ms.k_bound = std::max(ms.k_bound, knorm);
        Mat2d dg;
        dg << geop.g11[node] - geom.g11[node], geop.g12[node] - geom.g12[node],
            geop.g12[node] - geom.g12[node], geop.g22[node] - geom.g22[node];
        const Mat2d res = dg / (2.0 * dt) + 2.0 * ricci[j];
        ms.residual_flow_eqv = std::max(ms.residual_flow_eqv, res.cwiseAbs().maxCoeff());
      }
    }
  return ms;
}

}  // namespace

GridState make_grid_state(const Metric& m, int nx, int ntheta) {
  if (nx < 16 || ntheta < 16) {
    throw ConfigError("grid sizes must be >= 16, got " + std::to_string(nx) + " x " +
                      std::to_string(ntheta));
  }
  GridState s;
  s.t = 0.0;
  s.nx = nx;
  s.ntheta = ntheta;
  s.phi = sample_log_f(m, nx, ntheta).values();
  s.origin = m.spec();
  return s;
}

Metric reconstruct_metric(const GridState& s) {
  return reconstruct_metric(SpectralField3(s.nx, s.ntheta, s.phi), s.origin);
}

GridState step_flow_grid(const GridState& s, double dt) {
  if (dt == 0.0 || !std::isfinite(dt)) throw ConfigError("dt must be nonzero and finite");
  const std::vector<double> k1 = grid_rhs(s, s.phi);
  double max_ric = 0.0;
  for (double v : k1) max_ric = std::max(max_ric, std::abs(v));
  if (max_ric > 0.0 && std::abs(dt) > 0.5 / max_ric) {
    throw CFLViolation("dt = " + fmt17(std::abs(dt)) + " exceeds 0.5/max|Ric| = " +
                           fmt17(0.5 / max_ric),
                       s.t);
  }
  const std::vector<double> k2 = grid_rhs(s, axpy(s.phi, 0.5 * dt, k1));
  const std::vector<double> k3 = grid_rhs(s, axpy(s.phi, 0.5 * dt, k2));
  const std::vector<double> k4 = grid_rhs(s, axpy(s.phi, dt, k3));
  GridState out = s;
  out.t = s.t + dt;
  for (size_t i = 0; i < out.phi.size(); ++i)
    out.phi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

ParametricState make_parametric_state(const MetricSpec& spec) {
  const Metric m = build_metric(spec);
  ParametricState s;
  s.origin = m.spec();
  switch (m.family()) {
    case Family::round_sphere:
      s.r = m.param("radius");
      s.kappa = static_cast<double>(m.dim() - 1);
      break;
    case Family::euclidean:
      s.r = 1.0;
      s.kappa = 0.0;
      break;
    default:
      throw ConfigError("parametric mode needs a homothety-closed family "
                        "(round_sphere or euclidean)");
  }
  return s;
}

ParametricState step_flow_parametric(const ParametricState& s, double model_ric, double dt) {
  if (dt == 0.0 || !std::isfinite(dt)) throw ConfigError("dt must be nonzero and finite");
  const double r2 = s.r * s.r - 2.0 * model_ric * dt;
  if (!(r2 > 0.0)) {
    const double t_ext = s.t + s.r * s.r / (2.0 * model_ric);
    throw Extinction("homothety factor vanishes at t = " + fmt17(t_ext), s.t);
  }
  ParametricState out = s;
  out.t = s.t + dt;
  out.r = std::sqrt(r2);
  return out;
}

double closed_form_predictor(const Metric& initial, const double* x, const double* y, double t) {
  CurvatureStack s = curvature_stack(initial, x, y, 4, Depth::reduced);
  const double fac = 1.0 - 2.0 * s.ric() * t;
  if (!(fac > 0.0)) {
    throw Extinction("predictor vanishes at t = " + fmt17(0.5 / s.ric()), 0.5 / s.ric());
  }
  return s.f2() * fac;
}

FlowResult run_flow(const FlowConfig& cfg, const MonitorSink& sink) {
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  const Metric m = build_metric(cfg.metric);

  FlowResult out;
  double alpha = 0.0;
  bool have_alpha = false;
  auto emit = [&](MonitorSample ms) {
    if (!have_alpha) {
      alpha = ms.min_ric;
      have_alpha = true;
    }
    ms.bernoulli_bound = alpha / (1.0 + alpha * ms.t);
    out.monitors.push_back(ms);
    if (sink) sink(ms);
  };
  const long long stride =
      cfg.cadence > 0.0 ? std::max(1LL, std::llround(cfg.cadence / cfg.dt))
                        : std::numeric_limits<long long>::max();

  if (cfg.mode == FlowMode::parametric) {
    ParametricState s = make_parametric_state(cfg.metric);
    const std::vector<PSample> samples = monitor_samples(m, cfg.seed);
    emit(parametric_monitor(s, samples, cfg.dt));
    long long k = 0;
    while (s.t < cfg.t_end - 1e-12) {
      const double step = std::min(cfg.dt, cfg.t_end - s.t);
      s = step_flow_parametric(s, s.kappa, step);
      ++k;
      if (k % stride == 0 || s.t >= cfg.t_end - 1e-12) {
        emit(parametric_monitor(s, samples, cfg.dt));
      }
    }
    out.t_final = s.t;
    return out;
  }

  GridState s = make_grid_state(m, cfg.nx, cfg.ntheta);
  auto snap = [&](const GridState& st) {
    if (cfg.keep_snapshots) out.snapshots.push_back({st.t, st.nx, st.ntheta, st.phi});
  };
  emit(grid_monitor(s, cfg.dt));
  snap(s);
  long long k = 0;
  while (s.t < cfg.t_end - 1e-12) {
    const double step = std::min(cfg.dt, cfg.t_end - s.t);
    s = step_flow_grid(s, step);
    ++k;
    if (k % stride == 0 || s.t >= cfg.t_end - 1e-12) {
      emit(grid_monitor(s, cfg.dt));
      snap(s);
    }
  }
  out.t_final = s.t;
  return out;
}

std::string monitor_csv(const std::vector<MonitorSample>& rows) {
  std::ostringstream os;
  os << "t,min_ric,max_ric,min_flag,K_bound,bernoulli_bound,min_eig_g,residual_flow_eqv\n";
  for (const MonitorSample& r : rows) {
    os << fmt17(r.t) << ',' << fmt17(r.min_ric) << ',' << fmt17(r.max_ric) << ','
       << fmt17(r.min_flag) << ',' << fmt17(r.k_bound) << ',' << fmt17(r.bernoulli_bound) << ','
       << fmt17(r.min_eig_g) << ',' << fmt17(r.residual_flow_eqv) << '\n';
  }
  return os.str();
}

std::string snapshot_json(const Snapshot& s) {
  std::ostringstream os;
  os << "{\"nx\":" << s.nx << ",\"ntheta\":" << s.ntheta << ",\"t\":" << fmt17(s.t)
     << ",\"phi\":[";
  for (size_t i = 0; i < s.phi.size(); ++i) {
    if (i) os << ',';
    os << fmt17(s.phi[i]);
  }
  os << "]}";
  return os.str();
}

}  // namespace ffl
