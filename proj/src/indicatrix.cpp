#include "ffl/indicatrix.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace ffl {
namespace {

std::vector<Jet> const_jets(const JetSpace& sp, const double* v, int n) {
  std::vector<Jet> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(Jet::constant(sp, v[i]));
  return out;
}

void require_dim(const Metric& m, int n, const char* what) {
  if (m.dim() != n) {
    throw BadParams(std::string(what) + " needs dim = " + std::to_string(n) + ", metric has dim " +
                    std::to_string(m.dim()));
  }
}

}  // namespace

VecXd indicatrix_point(const Metric& m, const double* x, double theta) {
  require_dim(m, 2, "single-angle indicatrix point");
  m.check_chart(x);
  const double e[2] = {std::cos(theta), std::sin(theta)};
  const double F = std::sqrt(m.f2(x, e));
  if (!(F > 0.0) || !std::isfinite(F)) {
    throw DegenerateMetric("F(x, e(theta)) = " + fmt17(F) + " at theta = " + fmt17(theta));
  }
  VecXd y(2);
  y << e[0] / F, e[1] / F;
  return y;
}

VecXd indicatrix_point3(const Metric& m, const double* x, double t1, double t2) {
  require_dim(m, 3, "two-angle indicatrix point");
  m.check_chart(x);
  const double e[3] = {std::cos(t1), std::sin(t1) * std::cos(t2), std::sin(t1) * std::sin(t2)};
  const double F = std::sqrt(m.f2(x, e));
  if (!(F > 0.0) || !std::isfinite(F)) {
    throw DegenerateMetric("F(x, e(t)) = " + fmt17(F));
  }
  VecXd y(3);
  y << e[0] / F, e[1] / F, e[2] / F;
  return y;
}

IndicatrixFrame indicatrix_basis(const Metric& m, const double* x, double theta) {
  require_dim(m, 2, "single-angle indicatrix basis");
  m.check_chart(x);
  const JetSpace& sp = JetSpace::get(1, 1);
  Jet th = Jet::variable(sp, 0, theta);
  std::vector<Jet> e = {cos(th), sin(th)};
  std::vector<Jet> xj = const_jets(sp, x, 2);
  Jet rF = recip(sqrt(m.f2_of(xj, e)));
  Jet y0 = e[0] * rF, y1 = e[1] * rF;

  IndicatrixFrame fr;
  fr.n = 2;
  fr.fiber_dim = 1;
  fr.y = VecXd(2);
  fr.y << y0.value(), y1.value();
  fr.y_alpha = MatXd(2, 1);
  fr.y_alpha << y0.deriv({1}), y1.deriv({1});

  CurvatureStack s = curvature_stack(m, x, fr.y.data(), 4, Depth::full);
  fr.g = s.g();
  fr.a_tensor = s.cartan_up();  // F = 1 on the indicatrix
  fr.g_induced = MatXd(1, 1);
  fr.g_induced(0, 0) = fr.y_alpha.col(0).dot(fr.g * fr.y_alpha.col(0));
  fr.orth_residual = VecXd(1);
  fr.orth_residual[0] = fr.y.dot(fr.g * fr.y_alpha.col(0));
  if (!(fr.g_induced(0, 0) > 0.0)) {
    throw DegenerateMetric("induced fiber metric not positive at theta = " + fmt17(theta));
  }
  return fr;
}

IndicatrixFrame indicatrix_basis3(const Metric& m, const double* x, double t1, double t2) {
  require_dim(m, 3, "two-angle indicatrix basis");
  m.check_chart(x);
  const JetSpace& sp = JetSpace::get(2, 1);
  Jet a1 = Jet::variable(sp, 0, t1);
  Jet a2 = Jet::variable(sp, 1, t2);
  std::vector<Jet> e = {cos(a1), sin(a1) * cos(a2), sin(a1) * sin(a2)};
  std::vector<Jet> xj = const_jets(sp, x, 3);
  Jet rF = recip(sqrt(m.f2_of(xj, e)));
  std::vector<Jet> y = {e[0] * rF, e[1] * rF, e[2] * rF};

  IndicatrixFrame fr;
  fr.n = 3;
  fr.fiber_dim = 2;
  fr.y = VecXd(3);
  fr.y << y[0].value(), y[1].value(), y[2].value();
  fr.y_alpha = MatXd(3, 2);
  for (int i = 0; i < 3; ++i) {
    fr.y_alpha(i, 0) = y[i].deriv({1, 0});
    fr.y_alpha(i, 1) = y[i].deriv({0, 1});
  }

  CurvatureStack s = curvature_stack(m, x, fr.y.data(), 4, Depth::full);
  fr.g = s.g();
  fr.a_tensor = s.cartan_up();
  fr.g_induced = fr.y_alpha.transpose() * fr.g * fr.y_alpha;
  fr.orth_residual = fr.y_alpha.transpose() * fr.g * fr.y;
  Eigen::SelfAdjointEigenSolver<MatXd> eig(fr.g_induced);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw DegenerateMetric("induced fiber metric not positive definite");
  }
  return fr;
}

double gauss_formula_residual(const Metric& m, const double* x, double theta) {
  require_dim(m, 2, "fiber Gauss formula");
  m.check_chart(x);
  // Variables: 0,1 = ambient dy offsets, 2 = fiber angle offset.
  const JetSpace& sp = JetSpace::get(3, 3);
  Jet th = Jet::variable(sp, 2, theta);
  std::vector<Jet> e = {cos(th), sin(th)};
  std::vector<Jet> xj = const_jets(sp, x, 2);
  Jet rF = recip(sqrt(m.f2_of(xj, e)));
  std::vector<Jet> yfib = {e[0] * rF, e[1] * rF};
  std::vector<Jet> yfull = {yfib[0] + Jet::variable(sp, 0, 0.0),
                            yfib[1] + Jet::variable(sp, 1, 0.0)};
  Jet f2 = m.f2_of(xj, yfull);

  // Fundamental tensor along the fiber, still depending on the angle.
  std::vector<Jet> gij(4, Jet());
  for (int i = 0; i < 2; ++i) {
    Jet di = f2.derivative(i);
    for (int j = 0; j < 2; ++j) gij[i * 2 + j] = di.derivative(j) * 0.5;
  }
  Mat2d gv, ginv;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) gv(i, j) = gij[i * 2 + j].value();
  ginv = gv.inverse();

  // Lowered Cartan tensor at the base point.
  double clow[2][2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) clow[i][j][k] = 0.5 * gij[i * 2 + j].derivative(k).value();

  Jet yth[2] = {yfib[0].derivative(2), yfib[1].derivative(2)};  // order 2
  double ythv[2] = {yth[0].value(), yth[1].value()};
  double ythth[2] = {yth[0].derivative(2).value(), yth[1].derivative(2).value()};

  // Induced metric as a jet of the angle: exact product of angle-dependent
  // factors, so its derivative carries every chain-rule term.
  Jet gtt(f2.space().at_order(1));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) gtt += gij[i * 2 + j] * yth[i].to_order(1) * yth[j].to_order(1);
  const double gtt_v = gtt.value();
  const double christoffel_ind = 0.5 * gtt.derivative(2).value() / gtt_v;

  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    double r = ythth[i] - christoffel_ind * ythv[i] + gtt_v * yfib[i].value();
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        double cup = 0.0;
        for (int h = 0; h < 2; ++h) cup += ginv(i, h) * clow[h][j][k];
        r += cup * ythv[j] * ythv[k];  // A^i_jk = F C^i_jk with F = 1
      }
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

SmOperators sm_operators(const Metric& m, const double* x, double theta) {
  require_dim(m, 2, "fiber Ricci operators");
  m.check_chart(x);
  // Variables: 0,1 = base point, 2,3 = ambient dy offsets, 4 = fiber angle.
  const JetSpace& sp = JetSpace::get(5, 6);
  Jet th = Jet::variable(sp, 4, theta);
  std::vector<Jet> e = {cos(th), sin(th)};
  std::vector<Jet> xconst = const_jets(sp, x, 2);
  Jet rF = recip(sqrt(m.f2_of(xconst, e)));
  std::vector<Jet> yfib = {e[0] * rF, e[1] * rF};
  std::vector<Jet> yfull = {yfib[0] + Jet::variable(sp, 2, 0.0),
                            yfib[1] + Jet::variable(sp, 3, 0.0)};
  std::vector<Jet> xj = {Jet::variable(sp, 0, x[0]), Jet::variable(sp, 1, x[1])};
  Jet f2 = m.f2_of(xj, yfull);

  VecXd y0(2);
  y0 << yfib[0].value(), yfib[1].value();
  CurvatureStack s(f2, y0, yfull, Depth::full);

  SmOperators out;
  const Jet& ric = s.ric_jet();  // order 2, angle variable alive
  out.ric = ric.value();
  Jet ric_th = ric.derivative(4);
  out.dric_dtheta = ric_th.value();
  const double ric_thth = ric_th.derivative(4).value();

  double ricp[2], ricpp[2][2];
  for (int i = 0; i < 2; ++i) {
    Jet d = ric.derivative(2 + i);
    ricp[i] = d.value();
    for (int j = 0; j < 2; ++j) ricpp[i][j] = d.derivative(2 + j).value();
  }

  // Fiber tangent and induced metric (with its angle derivative).
  double yth[2];
  {
    Jet a = yfib[0].derivative(4), b = yfib[1].derivative(4);
    yth[0] = a.value();
    yth[1] = b.value();
    const double ythth[2] = {a.derivative(4).value(), b.derivative(4).value()};
    std::vector<Jet> gij(4, Jet());
    for (int i = 0; i < 2; ++i) {
      Jet di = f2.derivative(2 + i);
      for (int j = 0; j < 2; ++j) gij[i * 2 + j] = di.derivative(2 + j) * 0.5;
    }
    Jet gtt(f2.space().at_order(4));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const Jet& yi = i == 0 ? a : b;
        const Jet& yj = j == 0 ? a : b;
        gtt += gij[i * 2 + j] * yi.to_order(4) * yj.to_order(4);
      }
    out.g_theta_theta = gtt.value();
    // Connection coefficient of the vertical covariant derivative restricted
    // to the fiber.  Its Cartan part is the defect of d(g_tt)/2 against
    // g(y_tt, y_t), so the whole coefficient comes from fiber data alone and
    // this route shares nothing with the ambient one below.
    const MatXd gv = s.g();
    double gdot = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) gdot += gv(i, j) * ythth[i] * yth[j];
    const double christoffel_vert = (gtt.derivative(4).value() - gdot) / gtt.value();
    out.hess_theta = ric_thth - christoffel_vert * out.dric_dtheta;
  }

  // Ambient route for the same covariant fiber Hessian (F = 1, A = C).
  const Tensor3 cup = s.cartan_up();
  out.hess_ambient = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out.hess_ambient += yth[i] * yth[j] * ricpp[i][j];
      for (int k = 0; k < 2; ++k) out.hess_ambient -= 2.0 * cup(k, i, j) * yth[i] * yth[j] * ricp[k];
    }
  out.hess_residual = std::abs(out.hess_theta - out.hess_ambient);

  // Evolution operator, fiber form vs ambient form.
  const MatXd rup = s.r_red() * s.ginv();  // R^{ij} = R^i_a g^{aj}
  const MatXd g = s.g();
  VecXd ythv(2);
  ythv << yth[0], yth[1];
  const VecXd ydual = (g * ythv) / out.g_theta_theta;  // y^theta_k
  double rtt = 0.0;                                    // R^{theta theta}
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) rtt += rup(i, j) * ydual[i] * ydual[j];
  double drift = 0.0;  // A^k_ij R^{ij} y^theta_k
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) drift += cup(k, i, j) * rup(i, j) * ydual[k];
  out.h_theta = -2.0 * drift;
  out.conv_lhs = rtt * out.hess_theta + 2.0 * drift * out.dric_dtheta;
  out.conv_rhs = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.conv_rhs += rup(i, j) * ricpp[i][j];
  out.conv_residual = std::abs(out.conv_lhs - out.conv_rhs);
  return out;
}

SmHessian sm_hessian_ric(const Metric& m, const double* x, double theta) {
  SmOperators ops = sm_operators(m, x, theta);
  return {ops.hess_theta, ops.dric_dtheta, ops.hess_residual};
}

double h_vector(const Metric& m, const double* x, double theta) {
  return sm_operators(m, x, theta).h_theta;
}

}  // namespace ffl
