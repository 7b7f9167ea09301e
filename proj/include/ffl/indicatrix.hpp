#pragma once

// Indicatrix (unit sphere bundle) geometry.  The fiber over x is
// parameterized by coordinate angle: y(theta) = e(theta) / F(x, e(theta)),
// which puts F(x, y(theta)) = 1 identically, so the orthogonality of y to
// the fiber tangents holds analytically rather than by constraint solving.
// For n = 3 the pointwise parameterization uses two angles
// e(t1,t2) = (cos t1, sin t1 cos t2, sin t1 sin t2).

#include <vector>

#include "ffl/common.hpp"
#include "ffl/geometry.hpp"
#include "ffl/metric.hpp"

namespace ffl {

struct IndicatrixFrame {
  int n = 0;
  int fiber_dim = 0;
  VecXd y;             // indicatrix point, F(x, y) = 1
  MatXd y_alpha;       // column alpha holds y^i_alpha = dy^i/dt^alpha
  MatXd g;             // ambient fundamental tensor at (x, y)
  MatXd g_induced;     // g_ab = g_ij y^i_a y^j_b
  Tensor3 a_tensor;    // A^i_jk = F C^i_jk (F = 1 here)
  VecXd orth_residual; // g_ij y^j y^i_alpha, analytically zero
};

// n = 2 single-angle forms.
VecXd indicatrix_point(const Metric& m, const double* x, double theta);
IndicatrixFrame indicatrix_basis(const Metric& m, const double* x, double theta);

// n = 3 two-angle forms (pointwise only).
VecXd indicatrix_point3(const Metric& m, const double* x, double t1, double t2);
IndicatrixFrame indicatrix_basis3(const Metric& m, const double* x, double t1, double t2);

// Max-abs residual of the fiber Gauss formula at (x, theta), n = 2: the
// second fundamental form of the indicatrix circle against the vertical
// covariant derivative of its tangent, all terms from exact jets.
double gauss_formula_residual(const Metric& m, const double* x, double theta);

// Ricci-scalar operators on the fiber at (x, theta), n = 2.  Two independent
// routes to the covariant fiber Hessian are evaluated: differentiating Ric
// along theta, and contracting ambient y-derivatives of Ric with the frame.
struct SmOperators {
  double ric = 0.0;           // Ric at (x, y(theta))
  double dric_dtheta = 0.0;   // fiber derivative of Ric
  double hess_theta = 0.0;    // covariant fiber Hessian, theta route
  double hess_ambient = 0.0;  // same, ambient route
  double hess_residual = 0.0; // |theta route - ambient route|
  double conv_lhs = 0.0;      // fiber-form evolution operator
  double conv_rhs = 0.0;      // ambient-form evolution operator
  double conv_residual = 0.0; // |fiber form - ambient form|
  double h_theta = 0.0;       // drift H^theta = -2 A^k_ij R^ij y^theta_k
  double g_theta_theta = 0.0; // induced fiber metric
};
SmOperators sm_operators(const Metric& m, const double* x, double theta);

// (covariant fiber Hessian of Ric, fiber derivative of Ric) plus the
// two-route residual, per the operator contract.
struct SmHessian {
  double hess = 0.0;
  double dric = 0.0;
  double residual = 0.0;
};
SmHessian sm_hessian_ric(const Metric& m, const double* x, double theta);

// H^theta at (x, theta); identically zero for direction-independent metrics.
double h_vector(const Metric& m, const double* x, double theta);

}  // namespace ffl
