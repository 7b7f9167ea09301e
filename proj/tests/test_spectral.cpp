#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "ffl/geometry.hpp"
#include "ffl/spectral.hpp"

using namespace ffl;

namespace {

Metric make(const std::string& s) { return build_metric(parse_spec_string(s)); }

// Band-limited test field and its exact partials.
double field(double x1, double x2, double th) {
  return std::sin(x1) + 0.5 * std::cos(2.0 * x2) + 0.3 * std::sin(3.0 * th) +
         0.2 * std::cos(x1) * std::cos(th);
}

double field_d(double x1, double x2, double th, int a, int b, int c) {
  auto dsin = [](double v, int k, double f) { return std::pow(f, k) * std::sin(f * v + k * M_PI / 2.0); };
  auto dcos = [](double v, int k, double f) { return std::pow(f, k) * std::cos(f * v + k * M_PI / 2.0); };
  double out = 0.0;
  if (b == 0 && c == 0) out += dsin(x1, a, 1.0);
  if (a == 0 && c == 0) out += 0.5 * dcos(x2, b, 2.0);
  if (a == 0 && b == 0) out += 0.3 * dsin(th, c, 3.0);
  if (b == 0) out += 0.2 * dcos(x1, a, 1.0) * dcos(th, c, 1.0);
  return out;
}

std::vector<double> sample_field(int nx, int nt) {
  std::vector<double> v(static_cast<size_t>(nx) * nx * nt);
  for (int i1 = 0; i1 < nx; ++i1)
    for (int i2 = 0; i2 < nx; ++i2)
      for (int j = 0; j < nt; ++j) {
        v[(static_cast<size_t>(i1) * nx + i2) * nt + j] =
            field(2.0 * M_PI * i1 / nx, 2.0 * M_PI * i2 / nx, 2.0 * M_PI * j / nt);
      }
  return v;
}

double rel(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

}  // namespace

TEST_CASE("fft round trip and impulse") {
  const int n = 32;
  Rng rng(7);
  std::vector<std::complex<double>> a(n), orig(n);
  for (int i = 0; i < n; ++i) a[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  orig = a;
  fft_radix2(a.data(), n, false);
  fft_radix2(a.data(), n, true);
  for (int i = 0; i < n; ++i) CHECK(std::abs(a[i] - orig[i]) <= 1e-12);

  std::vector<std::complex<double>> d(n, 0.0);
  d[0] = 1.0;
  fft_radix2(d.data(), n, false);
  for (int i = 0; i < n; ++i) CHECK(std::abs(d[i] - std::complex<double>(1.0)) <= 1e-14);
}

TEST_CASE("derivative fields are exact on band-limited data") {
  const int nx = 16, nt = 16;
  SpectralField3 f(nx, nt, sample_field(nx, nt));
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; a + b <= 3; ++b)
      for (int c = 0; a + b + c <= 3; ++c) {
        const std::vector<double> d = f.derivative_field(a, b, c);
        for (int i1 = 0; i1 < nx; i1 += 5)
          for (int i2 = 0; i2 < nx; i2 += 5)
            for (int j = 0; j < nt; j += 5) {
              const double x1 = 2.0 * M_PI * i1 / nx, x2 = 2.0 * M_PI * i2 / nx,
                           th = 2.0 * M_PI * j / nt;
              CHECK(std::abs(d[(static_cast<size_t>(i1) * nx + i2) * nt + j] -
                             field_d(x1, x2, th, a, b, c)) <= 1e-10);
            }
      }
}

TEST_CASE("off-grid derivatives match the interpolant") {
  const int nx = 16, nt = 16;
  SpectralField3 f(nx, nt, sample_field(nx, nt));
  const double pts[3][3] = {{0.37, 1.91, 4.2}, {2.0 * M_PI - 0.1, 0.05, 1.0}, {3.3, 5.9, 0.6}};
  for (const auto& p : pts) {
    const std::vector<double> d = f.derivatives_at(p[0], p[1], p[2], 4);
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; a + b <= 4; ++b)
        for (int c = 0; a + b + c <= 4; ++c) {
          const double got = d[(static_cast<size_t>(a) * 5 + b) * 5 + c];
          CHECK(std::abs(got - field_d(p[0], p[1], p[2], a, b, c)) <= 1e-9);
          CHECK(std::abs(f.derivative_at(p[0], p[1], p[2], a, b, c) - got) <= 1e-12);
        }
  }
}

TEST_CASE("Nyquist mode: odd derivatives dropped, even kept") {
  const int nx = 16, nt = 16;
  std::vector<double> v(static_cast<size_t>(nx) * nx * nt);
  for (int i1 = 0; i1 < nx; ++i1)
    for (int i2 = 0; i2 < nx; ++i2)
      for (int j = 0; j < nt; ++j)
        v[(static_cast<size_t>(i1) * nx + i2) * nt + j] = std::cos(8.0 * (2.0 * M_PI * j / nt));
  SpectralField3 f(nx, nt, v);
  const std::vector<double> d1 = f.derivative_field(0, 0, 1);
  const std::vector<double> d2 = f.derivative_field(0, 0, 2);
  for (size_t i = 0; i < v.size(); ++i) {
    CHECK(std::abs(d1[i]) <= 1e-10);
    CHECK(std::abs(d2[i] + 64.0 * v[i]) <= 1e-9);
  }
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(SpectralField3(12, 16, std::vector<double>(12 * 12 * 16, 0.0)), ConfigError);
  CHECK_THROWS_AS(SpectralField3(16, 16, std::vector<double>(7, 0.0)), ConfigError);
  std::vector<double> bad(16 * 16 * 16, 0.0);
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SpectralField3(16, 16, std::move(bad)), NonPositive);
}

TEST_CASE("composed F^2 jets match the family jets at grid nodes") {
  const int order = 4;
  const JetSpace& sp = JetSpace::get(4, order);
  const struct {
    const char* spec;
    int nx, nt;
    double tol;
  } cases[] = {
      {"torus:amplitude=0.3,amplitude2=0.2", 16, 16, 1e-10},
      {"randers:b1=0.3,b2=0.1", 32, 64, 1e-8},
  };
  for (const auto& c : cases) {
    CAPTURE(c.spec);
    const Metric m = make(c.spec);
    SpectralField3 f = sample_log_f(m, c.nx, c.nt);
    Rng rng(11);
    for (int trial = 0; trial < 12; ++trial) {
      const int i1 = static_cast<int>(rng.uniform(0.0, c.nx)) % c.nx;
      const int i2 = static_cast<int>(rng.uniform(0.0, c.nx)) % c.nx;
      const int j = static_cast<int>(rng.uniform(0.0, c.nt)) % c.nt;
      const double x[2] = {2.0 * M_PI * i1 / c.nx, 2.0 * M_PI * i2 / c.nx};
      const double th = 2.0 * M_PI * j / c.nt;
      const double y0[2] = {std::cos(th), std::sin(th)};
      const Jet got = compose_f2_jet(sp, y0, f.derivatives_at(x[0], x[1], th, order), order);
      const int xv[2] = {0, 1}, yv[2] = {2, 3};
      const Jet want = m.f2_jet(sp, x, y0, xv, yv);
      double scale = 1e-12;
      for (int k = 0; k < sp.dim(); ++k) scale = std::max(scale, std::abs(want.raw(k)));
      for (int k = 0; k < sp.dim(); ++k) {
        CHECK(std::abs(got.raw(k) - want.raw(k)) / scale <= c.tol);
      }
    }
  }
}

TEST_CASE("reconstructed metric matches the family off grid") {
  const Metric m = make("randers:b1=0.3,b2=0.1");
  const Metric r = reconstruct_metric(sample_log_f(m, 32, 64), m.spec());
  CHECK(r.is_reconstruction());
  CHECK_FALSE(r.is_riemannian());
  Rng rng(3);
  const JetSpace& sp = JetSpace::get(4, 4);
  for (int trial = 0; trial < 8; ++trial) {
    const double x[2] = {rng.uniform(0.0, 2.0 * M_PI), rng.uniform(0.0, 2.0 * M_PI)};
    double y[2];
    do {
      y[0] = rng.uniform(-2.0, 2.0);
      y[1] = rng.uniform(-2.0, 2.0);
    } while (y[0] * y[0] + y[1] * y[1] < 0.1);
    const int xv[2] = {0, 1}, yv[2] = {2, 3};
    const Jet a = r.f2_jet(sp, x, y, xv, yv);
    const Jet b = m.f2_jet(sp, x, y, xv, yv);
    double scale = 1e-12;
    for (int k = 0; k < sp.dim(); ++k) scale = std::max(scale, std::abs(b.raw(k)));
    for (int k = 0; k < sp.dim(); ++k) CHECK(std::abs(a.raw(k) - b.raw(k)) / scale <= 1e-8);
  }
}

TEST_CASE("reconstruction curvature matches the family") {
  const Metric m = make("randers:b1=0.3,b2=0.1");
  const Metric r = reconstruct_metric(sample_log_f(m, 32, 64), m.spec());
  Rng rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const double x[2] = {rng.uniform(0.0, 2.0 * M_PI), rng.uniform(0.0, 2.0 * M_PI)};
    const double th = rng.uniform(0.0, 2.0 * M_PI);
    const double y[2] = {std::cos(th), std::sin(th)};
    const CurvatureStack a = curvature_stack(r, x, y, 4, Depth::reduced);
    const CurvatureStack b = curvature_stack(m, x, y, 4, Depth::reduced);
    CHECK(rel(a.ric(), b.ric()) <= 1e-6);
  }
}

TEST_CASE("reconstruction is 2-homogeneous") {
  const Metric m = make("randers:b1=0.25");
  const Metric r = reconstruct_metric(sample_log_f(m, 16, 64), m.spec());
  const JetSpace& sp = JetSpace::get(4, 2);
  Rng rng(9);
  for (int trial = 0; trial < 6; ++trial) {
    const double x[2] = {rng.uniform(0.0, 2.0 * M_PI), rng.uniform(0.0, 2.0 * M_PI)};
    const double th = rng.uniform(0.0, 2.0 * M_PI);
    const double lam = rng.uniform(0.3, 3.0);
    const double y[2] = {std::cos(th), std::sin(th)};
    const double ys[2] = {lam * y[0], lam * y[1]};
    // Euler: y^i dF^2/dy^i = 2 F^2, and g is 0-homogeneous in y.
    const int xv[2] = {0, 1}, yv[2] = {2, 3};
    const Jet f2 = r.f2_jet(sp, x, y, xv, yv);
    int a2[4] = {0, 0, 1, 0};
    int a3[4] = {0, 0, 0, 1};
    const double euler = y[0] * f2.raw(sp.index_of(a2)) + y[1] * f2.raw(sp.index_of(a3));
    CHECK(std::abs(euler - 2.0 * f2.value()) <= 1e-10);
    const MatXd g1 = curvature_stack(r, x, y, 2, Depth::spray).g();
    const MatXd g2 = curvature_stack(r, x, ys, 2, Depth::spray).g();
    CHECK((g1 - g2).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(std::abs(r.f2(x, ys) - lam * lam * r.f2(x, y)) <= 1e-10 * lam * lam * r.f2(x, y));
  }
}

TEST_CASE("zero field reconstructs the euclidean metric") {
  MetricSpec origin = parse_spec_string("euclidean");
  SpectralField3 zero(16, 16, std::vector<double>(16 * 16 * 16, 0.0));
  const Metric r = reconstruct_metric(zero, origin);
  const double x[2] = {1.1, 2.7};
  const double y[2] = {0.6, -0.8};
  CHECK(std::abs(r.f2(x, y) - 1.0) <= 1e-14);
  const CurvatureStack s = curvature_stack(r, x, y, 4, Depth::reduced);
  CHECK(std::abs(s.ric()) <= 1e-12);
  CHECK(s.spray().cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sampling rejects unsupported charts") {
  CHECK_THROWS_AS(sample_log_f(make("sphere:radius=1"), 16, 16), ConfigError);
}
