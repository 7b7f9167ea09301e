#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "ffl/indicatrix.hpp"

using namespace ffl;

namespace {

Metric make(const std::string& s) { return build_metric(parse_spec_string(s)); }

const std::vector<std::string> corpus2 = {
    "euclidean",
    "torus:amplitude=0.3,amplitude2=0.2",
    "sphere:radius=1",
    "sphere:radius=2",
    "randers:b1=0.2,amplitude=0.3",
    "randers:b1=0.3,b2=0.1",
    "conformal:amplitude=0.25,epsilon=0.1",
};

std::vector<double> base_point(const Metric& m) {
  if (m.spec().chart == Chart::sphere_polar) return {1.2, 0.7};
  return {0.9, 2.3};
}

}  // namespace

TEST_CASE("indicatrix points match closed forms") {
  const double x_box[2] = {0.0, 0.0};

  VecXd y = indicatrix_point(make("euclidean"), x_box, 0.0);
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(y[1]) <= 1e-15);

  const double equator[2] = {M_PI / 2.0, 0.3};
  y = indicatrix_point(make("sphere:radius=2"), equator, 0.0);
  CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(y[1]) <= 1e-15);

  y = indicatrix_point(make("randers:b1=0.2"), x_box, 0.0);
  CHECK(y[0] == doctest::Approx(1.0 / 1.2).epsilon(1e-14));
  CHECK(std::abs(y[1]) <= 1e-15);

  // Against the fiber direction the same slope shortens the vector.
  y = indicatrix_point(make("randers:b1=0.2"), x_box, M_PI);
  CHECK(y[0] == doctest::Approx(-1.0 / 0.8).epsilon(1e-14));
}

TEST_CASE("indicatrix point rejects vanishing F and wrong dimension") {
  const double x[2] = {0.0, 0.0};
  Metric flat = make("randers:b1=1.0");
  CHECK_THROWS_AS(indicatrix_point(flat, x, M_PI), DegenerateMetric);

  Metric m3 = make("torus:dim=3");
  CHECK_THROWS_AS(indicatrix_point(m3, x, 0.0), BadParams);
  const double x3[3] = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(indicatrix_point3(make("euclidean"), x3, 1.0, 1.0), BadParams);

  const double pole[2] = {0.01, 0.3};
  CHECK_THROWS_AS(indicatrix_point(make("sphere:radius=1"), pole, 0.0), ChartBoundary);
}

TEST_CASE("frame orthogonality and unit norm over the corpus") {
  for (const auto& spec : corpus2) {
    CAPTURE(spec);
    Metric m = make(spec);
    const auto x = base_point(m);
    for (int k = 0; k < 64; ++k) {
      const double theta = 2.0 * M_PI * k / 64.0;
      IndicatrixFrame fr = indicatrix_basis(m, x.data(), theta);
      // F(x, y) = 1 by construction.
      CHECK(m.f2(x.data(), fr.y.data()) == doctest::Approx(1.0).epsilon(1e-12));
      // nabla-dot of F along the fiber tangent vanishes: g(y, y_theta) = 0.
      CHECK(std::abs(fr.orth_residual[0]) <= 1e-10);
      CHECK(fr.g_induced(0, 0) > 0.0);
      // Cartan tensor annihilates the radial direction.
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double s = 0.0;
          for (int h = 0; h < 2; ++h) s += fr.a_tensor(i, j, h) * fr.y[h];
          CHECK(std::abs(s) <= 1e-9);
        }
    }
  }
}

TEST_CASE("euclidean frame is the unit circle") {
  Metric m = make("euclidean");
  const double x[2] = {0.4, 5.1};
  for (double theta : {0.0, 0.7, 2.0, 4.4}) {
    IndicatrixFrame fr = indicatrix_basis(m, x, theta);
    CHECK(fr.y[0] == doctest::Approx(std::cos(theta)).epsilon(1e-14));
    CHECK(fr.y[1] == doctest::Approx(std::sin(theta)).epsilon(1e-14));
    CHECK(fr.y_alpha(0, 0) == doctest::Approx(-std::sin(theta)).epsilon(1e-13));
    CHECK(fr.y_alpha(1, 0) == doctest::Approx(std::cos(theta)).epsilon(1e-13));
    CHECK(fr.g_induced(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("riemannian indicatrix has circumference 2 pi") {
  // The induced circle is isometric to the standard unit circle for any
  // positive-definite quadratic form, so the trapezoid rule over one period
  // must reproduce 2 pi to spectral accuracy.
  for (const auto& spec : {"euclidean", "torus:amplitude=0.3,amplitude2=0.2", "sphere:radius=2"}) {
    CAPTURE(spec);
    Metric m = make(spec);
    const auto x = base_point(m);
    const int nq = 256;
    double length = 0.0;
    for (int k = 0; k < nq; ++k) {
      const double theta = 2.0 * M_PI * k / nq;
      IndicatrixFrame fr = indicatrix_basis(m, x.data(), theta);
      length += std::sqrt(fr.g_induced(0, 0)) * (2.0 * M_PI / nq);
    }
    CHECK(length == doctest::Approx(2.0 * M_PI).epsilon(1e-12));
  }
}

TEST_CASE("two-angle forms for dim 3") {
  Metric m = make("euclidean:dim=3");
  const double x[3] = {0.1, 0.2, 0.3};

  VecXd y = indicatrix_point3(m, x, M_PI / 2.0, 0.0);
  CHECK(std::abs(y[0]) <= 1e-15);
  CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(y[2]) <= 1e-15);

  const double t1 = 1.1, t2 = 0.8;
  IndicatrixFrame fr = indicatrix_basis3(m, x, t1, t2);
  CHECK(fr.n == 3);
  CHECK(fr.fiber_dim == 2);
  // Euclidean indicatrix carries the round metric diag(1, sin^2 t1).
  CHECK(fr.g_induced(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(fr.g_induced(0, 1)) <= 1e-13);
  const double s2 = std::sin(t1) * std::sin(t1);
  CHECK(fr.g_induced(1, 1) == doctest::Approx(s2).epsilon(1e-13));
  CHECK(fr.orth_residual.cwiseAbs().maxCoeff() <= 1e-10);

  Metric t3 = make("torus:dim=3,amplitude=0.2,amplitude2=0.15,amplitude3=0.1");
  IndicatrixFrame fr3 = indicatrix_basis3(t3, x, 1.0, 2.0);
  CHECK(t3.f2(x, fr3.y.data()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fr3.orth_residual.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("fiber Gauss formula closes over the corpus") {
  for (const auto& spec : corpus2) {
    CAPTURE(spec);
    Metric m = make(spec);
    const auto x = base_point(m);
    const double tol = m.is_riemannian() ? 1e-8 : 1e-7;
    for (int k = 0; k < 16; ++k) {
      const double theta = 2.0 * M_PI * (k + 0.37) / 16.0;
      CHECK(gauss_formula_residual(m, x.data(), theta) <= tol);
    }
  }
}

TEST_CASE("two routes to the covariant fiber Hessian agree") {
  for (const auto& spec : corpus2) {
    CAPTURE(spec);
    Metric m = make(spec);
    const auto x = base_point(m);
    for (int k = 0; k < 8; ++k) {
      const double theta = 2.0 * M_PI * (k + 0.21) / 8.0;
      SmOperators ops = sm_operators(m, x.data(), theta);
      CHECK(ops.hess_residual <= 1e-6);
      CHECK(ops.conv_residual <= 1e-6);
      CHECK(ops.g_theta_theta > 0.0);

      SmHessian h = sm_hessian_ric(m, x.data(), theta);
      CHECK(h.hess == ops.hess_theta);
      CHECK(h.dric == ops.dric_dtheta);
    }
  }
}

TEST_CASE("sphere fiber operators are constant and drift-free") {
  Metric m = make("sphere:radius=2");
  const double x[2] = {1.1, 0.4};
  for (double theta : {0.3, 1.9, 3.7, 5.5}) {
    SmOperators ops = sm_operators(m, x, theta);
    // Ric = (n - 1) K = 1/r^2 everywhere on the sphere bundle.
    CHECK(ops.ric == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(std::abs(ops.dric_dtheta) <= 1e-10);
    CHECK(std::abs(ops.hess_theta) <= 1e-9);
    CHECK(std::abs(ops.h_theta) <= 1e-10);
    CHECK(std::abs(ops.conv_lhs) <= 1e-9);
    CHECK(std::abs(ops.conv_rhs) <= 1e-9);
  }
}

TEST_CASE("drift vector vanishes exactly when the Cartan tensor does") {
  const double x[2] = {0.9, 2.3};
  for (const auto& spec : {"euclidean", "torus:amplitude=0.3,amplitude2=0.2"}) {
    CAPTURE(spec);
    Metric m = make(spec);
    for (double theta : {0.0, 1.3, 2.9, 4.8}) CHECK(std::abs(h_vector(m, x, theta)) <= 1e-10);
  }
  // Genuinely Finslerian metrics with curvature carry a nonzero drift.
  Metric r = make("randers:b1=0.2,amplitude=0.3");
  double peak = 0.0;
  for (int k = 0; k < 16; ++k)
    peak = std::max(peak, std::abs(h_vector(r, x, 2.0 * M_PI * k / 16.0)));
  CHECK(peak > 1e-6);
}

TEST_CASE("fiber derivative of Ric matches a finite difference") {
  Metric m = make("randers:b1=0.2,amplitude=0.3");
  const double x[2] = {0.9, 2.3};
  for (double theta : {0.5, 2.2, 4.1}) {
    const double h = 1e-3;
    auto ric_at = [&](double t) { return sm_operators(m, x, t).ric; };
    const double fd =
        (ric_at(theta - 2 * h) - 8 * ric_at(theta - h) + 8 * ric_at(theta + h) - ric_at(theta + 2 * h)) /
        (12 * h);
    SmOperators ops = sm_operators(m, x, theta);
    CHECK(ops.dric_dtheta == doctest::Approx(fd).epsilon(1e-8));
  }
}
