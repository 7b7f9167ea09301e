#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ffl/geometry.hpp"
#include "ffl/verify.hpp"

using namespace ffl;

namespace {

Metric make(const std::string& s) { return build_metric(parse_spec_string(s)); }

std::vector<double> sample_x(const Metric& m, Rng& rng) {
  const int n = m.dim();
  std::vector<double> x(n);
  if (m.spec().chart == Chart::sphere_polar) {
    for (int i = 0; i < n - 1; ++i) x[i] = rng.uniform(0.3, M_PI - 0.3);
    x[n - 1] = rng.uniform(0.0, 2.0 * M_PI);
  } else {
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(0.0, 2.0 * M_PI);
  }
  return x;
}

std::vector<double> sample_y(int n, Rng& rng) {
  while (true) {
    std::vector<double> y(n);
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      y[i] = rng.uniform(-1.0, 1.0);
      norm += y[i] * y[i];
    }
    if (norm > 1e-2) {
      norm = std::sqrt(norm);
      for (auto& v : y) v /= norm;
      return y;
    }
  }
}

VecXd to_vec(const std::vector<double>& v) {
  VecXd out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

// A vector g-orthogonal to y obtained by projecting a seed direction.
VecXd orthogonal_edge(const CurvatureStack& s, const VecXd& seed) {
  const MatXd g = s.g();
  const VecXd y = s.y();
  VecXd v = seed - (seed.dot(g * y) / y.dot(g * y)) * y;
  return v;
}

double rel_diff(const MatXd& a, const MatXd& b) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-12});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("euclidean: every curvature quantity vanishes") {
  Metric m = make("euclidean");
  const double x[2] = {0.3, 1.7};
  const double y[2] = {0.8, -0.6};
  CurvatureStack s = curvature_stack(m, x, y, 6);
  CHECK(s.spray().cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(s.gj().cwiseAbs().maxCoeff() <= 1e-15);
  for (double v : s.cartan().a) CHECK(std::abs(v) <= 1e-15);
  for (double v : s.gamma().a) CHECK(std::abs(v) <= 1e-15);
  CHECK(s.r_red().cwiseAbs().maxCoeff() <= 1e-15);
  for (double v : s.r_hh().a) CHECK(std::abs(v) <= 1e-15);
  CHECK(std::abs(s.ric()) <= 1e-15);
  CHECK(s.ricci_az().cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(s.ricci_norm() <= 1e-15);
}

TEST_CASE("round sphere: constant curvature closed forms") {
  for (double r : {1.0, 2.0}) {
    Metric m = make("sphere:r=" + std::to_string(r));
    Rng rng(31);
    const double K = 1.0 / (r * r);
    for (int trial = 0; trial < 12; ++trial) {
      const auto x = sample_x(m, rng);
      const auto y = sample_y(2, rng);
      CurvatureStack s = curvature_stack(m, x.data(), y.data(), 6);
      // Flag curvature of every admissible flag equals 1/r^2.
      VecXd seed(2);
      seed << rng.uniform(-1, 1), rng.uniform(-1, 1);
      VecXd V = orthogonal_edge(s, seed);
      if (V.norm() < 1e-6) continue;
      CHECK(s.flag_curvature(V) == doctest::Approx(K).epsilon(1e-9));
      CHECK(s.ric() == doctest::Approx(K).epsilon(1e-9));  // (n-1)/r^2, n = 2
      CHECK(rel_diff(s.ricci_az(), K * s.g()) <= 1e-9);
      CHECK(rel_diff(s.ricci_trace_sym(), K * s.g()) <= 1e-9);
      CHECK(s.ricci_norm() == doctest::Approx(std::sqrt(2.0) * K).epsilon(1e-9));
    }
  }
  // n = 3: Ric = 2/r^2 and Ric_ij = (2/r^2) g_ij.
  Metric m3 = make("sphere:r=1.5,dim=3");
  const double x3[3] = {1.1, 1.9, 0.7};
  const double y3[3] = {0.5, -0.4, 0.8};
  CurvatureStack s3 = curvature_stack(m3, x3, y3, 6);
  const double K3 = 1.0 / 2.25;
  CHECK(s3.ric() == doctest::Approx(2.0 * K3).epsilon(1e-9));
  CHECK(rel_diff(s3.ricci_az(), 2.0 * K3 * s3.g()) <= 1e-9);
  CHECK(s3.ricci_norm() == doctest::Approx(2.0 * K3 * std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("conformal torus: Gaussian curvature closed form") {
  // For e^{2u} delta with u = a cos x1 the Gaussian curvature is
  // -e^{-2u} (u_11 + u_22) = a cos(x1) e^{-2a cos x1}.
  const double a = 0.1;
  Metric m = make("torus:a=0.1");
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = sample_x(m, rng);
    const auto y = sample_y(2, rng);
    CurvatureStack s = curvature_stack(m, x.data(), y.data(), 4);
    const double want = a * std::cos(x[0]) * std::exp(-2.0 * a * std::cos(x[0]));
    VecXd seed(2);
    seed << rng.uniform(-1, 1), rng.uniform(-1, 1);
    VecXd V = orthogonal_edge(s, seed);
    if (V.norm() < 1e-6) continue;
    CHECK(s.flag_curvature(V) == doctest::Approx(want).epsilon(1e-9));
    CHECK(s.ric() == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("classical oracle agreement on the Riemannian corpus") {
  Rng rng(5);
  for (const std::string name :
       {"sphere:r=1", "sphere:r=2", "torus:a=0.1", "torus:a=0.1,a2=0.07",
        "torus:a=0.08,a2=0.05,a3=0.03,dim=3", "sphere:r=1.5,dim=3"}) {
    Metric m = make(name);
    const int n = m.dim();
    for (int trial = 0; trial < 8; ++trial) {
      const auto x = sample_x(m, rng);
      const auto y = sample_y(n, rng);
      CurvatureReport mine = curvature_report(m, x.data(), y.data());
      CurvatureReport oracle = riemannian_oracle(m, x.data(), y.data());
      INFO(name);
      CHECK(rel_diff(mine.g, oracle.g) <= 1e-10);
      MatXd gam_a(n, n * n), gam_b(n, n * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            gam_a(i, j * n + k) = mine.gamma(i, j, k);
            gam_b(i, j * n + k) = oracle.gamma(i, j, k);
          }
      CHECK(rel_diff(gam_a, gam_b) <= 1e-7);
      CHECK(rel_diff(mine.r_red, oracle.r_red) <= 1e-6);
      CHECK(std::abs(mine.ric - oracle.ric) <=
            1e-6 * std::max(1.0, std::abs(oracle.ric)));
      CHECK(rel_diff(mine.rc_trace, oracle.rc_trace) <= 1e-6);
      CHECK(rel_diff(mine.ric_az, oracle.ric_az) <= 1e-6);
      // Cartan tensor of a quadratic norm is exactly zero.
      for (double v : mine.cartan.a) CHECK(std::abs(v) <= 1e-12);
    }
  }
}

TEST_CASE("cross-path equivalence: reduced curvature vs hh-contraction") {
  Rng rng(2024);
  int done = 0;
  for (const std::string name : {"randers:b=0.3,b2=0.1,a=0.05", "torus:a=0.1,a2=0.07"}) {
    Metric m = make(name);
    for (int trial = 0; trial < 100; ++trial, ++done) {
      const auto x = sample_x(m, rng);
      const auto y = sample_y(2, rng);
      CurvatureStack s = curvature_stack(m, x.data(), y.data(), 4);
      const Tensor4 rhh = s.r_hh();
      const double F2 = s.f2();
      MatXd via_hh(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
          double acc = 0.0;
          for (int j = 0; j < 2; ++j)
            for (int mm = 0; mm < 2; ++mm) acc += y[j] * rhh(i, j, k, mm) * y[mm];
          via_hh(i, k) = acc / F2;
        }
      CHECK(rel_diff(via_hh, s.r_red()) <= 1e-7);
    }
  }
  CHECK(done == 200);
}

TEST_CASE("symmetries and annihilation identities") {
  Rng rng(99);
  for (const std::string name :
       {"randers:b=0.3,b2=0.1,a=0.05", "torus:a=0.1,a2=0.07", "conformal:a=0.05,eps=0.05",
        "sphere:r=2", "randers:b=0.2,b2=0.1,b3=0.05,a=0.04,dim=3"}) {
    Metric m = make(name);
    const int n = m.dim();
    INFO(name);
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = sample_x(m, rng);
      const auto y = sample_y(n, rng);
      CurvatureStack s = curvature_stack(m, x.data(), y.data(), 4);
      const Tensor3 c = s.cartan();
      const MatXd g = s.g();
      const MatXd rred = s.r_red();
      const Tensor4 rhh = s.r_hh();
      const VecXd yv = to_vec(y);
      const double cscale = 1.0;

      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          for (int k = 0; k < n; ++k) {
            // Total symmetry of the Cartan tensor.
            CHECK(std::abs(c(i, j, k) - c(j, i, k)) <= 1e-8 * cscale);
            CHECK(std::abs(c(i, j, k) - c(i, k, j)) <= 1e-8 * cscale);
          }
          // C_ijk y^k = 0.
          double cy = 0.0;
          for (int k = 0; k < n; ++k) cy += c(i, j, k) * y[k];
          CHECK(std::abs(cy) <= 1e-9);
        }

      // R^i_k y^k = 0 and y_i R^i_k = 0.
      const VecXd ry = rred * yv;
      const VecXd ylow = g * yv;
      const VecXd yr = rred.transpose() * ylow;
      CHECK(ry.cwiseAbs().maxCoeff() <= 1e-9);
      CHECK(yr.cwiseAbs().maxCoeff() <= 1e-9);

      // Lowered hh-curvature R_{tkij} = g_{th} R^h_{kij} is skew in (t,k)
      // and in (i,j).
      double skew = 0.0, scale = 0.0;
      for (int t = 0; t < n; ++t)
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              double low_tk = 0.0, low_kt = 0.0, low_ji = 0.0;
              for (int h = 0; h < n; ++h) {
                low_tk += g(t, h) * rhh(h, k, i, j);
                low_kt += g(k, h) * rhh(h, t, i, j);
                low_ji += g(t, h) * rhh(h, k, j, i);
              }
              skew = std::max({skew, std::abs(low_tk + low_kt), std::abs(low_tk + low_ji)});
              scale = std::max(scale, std::abs(low_tk));
            }
      CHECK(skew <= 1e-8 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("homogeneity ladder in y") {
  Metric m = make("randers:b=0.3,b2=0.1,a=0.05");
  Rng rng(4);
  for (int trial = 0; trial < 15; ++trial) {
    const auto x = sample_x(m, rng);
    const auto y = sample_y(2, rng);
    CurvatureStack s1 = curvature_stack(m, x.data(), y.data(), 4);
    for (double lam : {0.5, 2.0}) {
      double ly[2] = {lam * y[0], lam * y[1]};
      CurvatureStack s2 = curvature_stack(m, x.data(), ly, 4);
      // G^i is 2-homogeneous, G^i_j is 1-homogeneous, R^i_k is 0-homogeneous.
      CHECK(rel_diff(s2.spray(), lam * lam * s1.spray()) <= 1e-10);
      CHECK(rel_diff(s2.gj(), lam * s1.gj()) <= 1e-10);
      CHECK(rel_diff(s2.r_red(), s1.r_red()) <= 1e-10);
      CHECK(s2.ric() == doctest::Approx(s1.ric()).epsilon(1e-10));
    }
  }
}

TEST_CASE("flag curvature: orthogonality gate and projective invariance") {
  Metric m = make("randers:b=0.3,b2=0.1,a=0.05");
  const double x[2] = {1.2, 0.8};
  const double y[2] = {0.9, 0.3};
  CurvatureStack s = curvature_stack(m, x, y, 4);
  VecXd seed(2);
  seed << 0.2, 1.0;
  VecXd V = orthogonal_edge(s, seed);
  const double k1 = s.flag_curvature(V);
  CHECK(s.flag_curvature(3.0 * V) == doctest::Approx(k1).epsilon(1e-10));
  CHECK(s.flag_curvature(-2.5 * V) == doctest::Approx(k1).epsilon(1e-10));
  VecXd bad(2);
  bad << 0.9, 0.3;  // parallel to the flagpole
  CHECK_THROWS_AS(s.flag_curvature(bad), NotOrthogonal);
}

TEST_CASE("ricci scalar equals the flag-curvature trace over any completion") {
  Metric m = make("randers:b=0.25,b2=0.05,a=0.03");
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = sample_x(m, rng);
    const auto y = sample_y(2, rng);
    CurvatureStack s = curvature_stack(m, x.data(), y.data(), 4);
    // Two different orthonormal completions of l give the same K-sum.
    double sums[2];
    for (int rep = 0; rep < 2; ++rep) {
      VecXd seed(2);
      seed << rng.uniform(-1, 1), rng.uniform(-1, 1);
      VecXd V = orthogonal_edge(s, seed);
      if (V.norm() < 1e-6) {
        seed << 1.0, 0.3;
        V = orthogonal_edge(s, seed);
      }
      sums[rep] = s.flag_curvature(V);
    }
    CHECK(sums[0] == doctest::Approx(sums[1]).epsilon(1e-10));
    CHECK(s.ric() == doctest::Approx(sums[0]).epsilon(1e-10));

    // The deterministic frame satisfies g(e_a, e_b) = delta_ab.
    const MatXd frame = s.gs_frame();
    const MatXd gram = frame * s.g() * frame.transpose();
    CHECK(rel_diff(gram, MatXd::Identity(2, 2)) <= 1e-12);
  }
}

TEST_CASE("az-Ricci tensor contracts back to F^2 Ric") {
  Metric m = make("randers:b=0.3,b2=0.1,a=0.05");
  Rng rng(21);
  for (int trial = 0; trial < 12; ++trial) {
    const auto x = sample_x(m, rng);
    const auto y = sample_y(2, rng);
    CurvatureStack s = curvature_stack(m, x.data(), y.data(), 6);
    const VecXd yv = to_vec(y);
    const double contracted = yv.dot(s.ricci_az() * yv);
    const double want = s.f2() * s.ric();
    CHECK(std::abs(contracted - want) <= 1e-7 * std::max(1.0, std::abs(want)));
    // Symmetry of the Hessian.
    CHECK(rel_diff(s.ricci_az(), s.ricci_az().transpose()) <= 1e-12);
  }
}

TEST_CASE("covariant derivatives: metric compatibility both ways") {
  Rng rng(3);
  for (const std::string name : {"randers:b=0.3,b2=0.1,a=0.05", "conformal:a=0.05,eps=0.05"}) {
    Metric m = make(name);
    for (int trial = 0; trial < 8; ++trial) {
      const auto x = sample_x(m, rng);
      const auto y = sample_y(2, rng);
      CurvatureStack s = curvature_stack(m, x.data(), y.data(), 4);
      std::vector<Jet> gj;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) gj.push_back(s.g_jet(i, j));
      TensorDerivs d = covariant_derivatives(s, gj, 0, 2);
      for (int l = 0; l < 2; ++l)
        for (double v : d.horizontal[l]) CHECK(std::abs(v) <= 1e-8);
      for (int l = 0; l < 2; ++l)
        for (double v : d.vertical[l]) CHECK(std::abs(v) <= 1e-8);
    }
  }
}

TEST_CASE("covariant derivative reduces to the classical one on Riemannian input") {
  Metric m = make("torus:a=0.1,a2=0.07");
  const double x[2] = {1.3, 2.1};
  const double y[2] = {0.6, 0.8};
  CurvatureStack s = curvature_stack(m, x, y, 4);

  // T^i_j(x) = diag(sin x1, cos x2): y-independent (1,1) tensor field.
  const JetSpace& sp = JetSpace::get(4, 2);
  Jet x1 = Jet::variable(sp, 0, x[0]);
  Jet x2 = Jet::variable(sp, 1, x[1]);
  std::vector<Jet> T = {sin(x1), Jet(sp), Jet(sp), cos(x2)};
  TensorDerivs d = covariant_derivatives(s, T, 1, 1);

  CurvatureReport oracle = riemannian_oracle(m, x, y);
  double tv[2][2] = {{std::sin(x[0]), 0.0}, {0.0, std::cos(x[1])}};
  double dt[2][2][2] = {};  // dT^i_j/dx^l
  dt[0][0][0] = std::cos(x[0]);
  dt[1][1][1] = -std::sin(x[1]);
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double want = dt[i][j][l];
        for (int ss = 0; ss < 2; ++ss) {
          want += tv[ss][j] * oracle.gamma(i, ss, l);
          want -= tv[i][ss] * oracle.gamma(ss, j, l);
        }
        CHECK(d.horizontal[l][i * 2 + j] == doctest::Approx(want).epsilon(1e-6));
      }

  CHECK_THROWS_AS(covariant_derivatives(s, T, 2, 0), ValenceUnsupported);
  std::vector<Jet> big(8, Jet(sp));
  CHECK_THROWS_AS(covariant_derivatives(s, big, 1, 3), ValenceUnsupported);
}

TEST_CASE("degenerate input is rejected") {
  Metric m = build_metric(parse_spec_string("randers:b=1.0"));
  const double x[2] = {0.0, 0.0};
  const double y[2] = {-1.0, 0.0};
  CHECK_THROWS_AS(curvature_stack(m, x, y, 4), DegenerateMetric);
}
