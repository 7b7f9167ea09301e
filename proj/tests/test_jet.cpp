#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ffl/jet.hpp"

using ffl::Jet;
using ffl::JetSpace;

namespace {
double binom(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}
}  // namespace

TEST_CASE("space dimensions match binomial counts") {
    CHECK(JetSpace::get(1, 6).dim() == 7);
    CHECK(JetSpace::get(2, 3).dim() == 10);
    CHECK(JetSpace::get(4, 4).dim() == 70);
    CHECK(JetSpace::get(4, 6).dim() == 210);
    CHECK(JetSpace::get(5, 6).dim() == 462);
    CHECK(JetSpace::get(6, 6).dim() == 924);
}

TEST_CASE("binomial expansion of (1+x)^6") {
    const JetSpace& s = JetSpace::get(1, 6);
    Jet u = Jet::variable(s, 0, 1.0);
    Jet p = ffl::pow_int(u, 6);
    for (int k = 0; k <= 6; ++k) CHECK(p.coeff({k}) == doctest::Approx(binom(6, k)).epsilon(1e-15));
}

TEST_CASE("product of bivariate polynomials is exact") {
    const JetSpace& s = JetSpace::get(2, 4);
    Jet x = Jet::variable(s, 0, 0.5);
    Jet y = Jet::variable(s, 1, -2.0);
    // (x^2 + 3y) * (x - y^2): compare one hand-expanded coefficient set
    Jet a = x * x + 3.0 * y;
    Jet b = x - y * y;
    Jet p = a * b;
    auto val = [&](double xv, double yv) { return (xv * xv + 3 * yv) * (xv - yv * yv); };
    CHECK(p.value() == doctest::Approx(val(0.5, -2.0)).epsilon(1e-15));
    const double h = 1e-6;
    CHECK(p.deriv({1, 0}) ==
          doctest::Approx((val(0.5 + h, -2) - val(0.5 - h, -2)) / (2 * h)).epsilon(1e-8));
    // expanded: p = x^3 - x^2 y^2 + 3xy - 3y^3, so d3p/dx dy2 = -4x exactly
    CHECK(p.deriv({1, 2}) == doctest::Approx(-4.0 * 0.5).epsilon(1e-13));
}

TEST_CASE("derivative operator lowers the order and is exact") {
    const JetSpace& s = JetSpace::get(2, 5);
    Jet x = Jet::variable(s, 0, 0.3);
    Jet y = Jet::variable(s, 1, 0.7);
    Jet f = ffl::sin(x * y);
    Jet fx = f.derivative(0);
    CHECK(fx.space().order() == 4);
    CHECK(fx.value() == doctest::Approx(0.7 * std::cos(0.21)).epsilon(1e-14));
    // second derivative through two applications vs coefficient extraction
    Jet fxy = fx.derivative(1);
    CHECK(fxy.value() == doctest::Approx(f.deriv({1, 1})).epsilon(1e-14));
}

TEST_CASE("analytic functions match closed-form Taylor coefficients") {
    const JetSpace& s = JetSpace::get(1, 6);
    const double x0 = 1.7;
    Jet x = Jet::variable(s, 0, x0);

    Jet e = ffl::exp(x);
    Jet l = ffl::log(x);
    Jet q = ffl::sqrt(x);
    Jet r = ffl::recip(x);
    Jet sn = ffl::sin(x);
    Jet at = ffl::atan(x);

    double fac = 1.0;
    for (int m = 0; m <= 6; ++m) {
        if (m > 0) fac *= m;
        CHECK(e.coeff({m}) == doctest::Approx(std::exp(x0) / fac).epsilon(1e-14));
        CHECK(r.coeff({m}) == doctest::Approx(std::pow(-1.0, m) / std::pow(x0, m + 1)).epsilon(1e-13));
    }
    CHECK(l.coeff({0}) == doctest::Approx(std::log(x0)));
    CHECK(l.coeff({1}) == doctest::Approx(1.0 / x0));
    CHECK(l.coeff({2}) == doctest::Approx(-0.5 / (x0 * x0)));
    CHECK(l.coeff({3}) == doctest::Approx(1.0 / (3 * x0 * x0 * x0)));
    CHECK(q.coeff({1}) == doctest::Approx(0.5 / std::sqrt(x0)));
    CHECK(q.coeff({2}) == doctest::Approx(-0.125 * std::pow(x0, -1.5)));
    CHECK(sn.coeff({1}) == doctest::Approx(std::cos(x0)));
    CHECK(sn.coeff({3}) == doctest::Approx(-std::cos(x0) / 6.0));
    CHECK(at.coeff({1}) == doctest::Approx(1.0 / (1 + x0 * x0)));
    CHECK(at.coeff({2}) == doctest::Approx(-x0 / ((1 + x0 * x0) * (1 + x0 * x0))));

    // functional identities confirm the full coefficient vectors
    Jet id1 = ffl::exp(ffl::log(x));
    Jet id2 = ffl::sqrt(x) * ffl::sqrt(x);
    Jet id3 = x * ffl::recip(x);
    Jet id4 = ffl::sin(x) * ffl::sin(x) + ffl::cos(x) * ffl::cos(x);
    for (int m = 0; m <= 6; ++m) {
        const double want1 = m == 0 ? x0 : (m == 1 ? 1.0 : 0.0);
        CHECK(id1.coeff({m}) == doctest::Approx(want1).epsilon(1e-13));
        CHECK(id2.coeff({m}) == doctest::Approx(want1).epsilon(1e-13));
        const double want0 = m == 0 ? 1.0 : 0.0;
        CHECK(id3.coeff({m}) == doctest::Approx(want0).epsilon(1e-13));
        CHECK(id4.coeff({m}) == doctest::Approx(want0).epsilon(1e-13));
    }
}

TEST_CASE("atan with zero base value reproduces the arctangent series") {
    const JetSpace& s = JetSpace::get(1, 6);
    Jet w = Jet::variable(s, 0, 0.0);
    Jet a = ffl::atan(w);
    const double want[7] = {0, 1, 0, -1.0 / 3, 0, 1.0 / 5, 0};
    for (int m = 0; m <= 6; ++m) CHECK(a.coeff({m}) == doctest::Approx(want[m]).epsilon(1e-15));
}

TEST_CASE("truncation and extension are prefix operations") {
    const JetSpace& s = JetSpace::get(3, 5);
    Jet x = Jet::variable(s, 0, 0.2);
    Jet y = Jet::variable(s, 1, 0.4);
    Jet z = Jet::variable(s, 2, 0.6);
    Jet f = ffl::exp(x * y + z * z * x);
    Jet t = f.to_order(3);
    CHECK(t.space().order() == 3);
    for (int i = 0; i < t.dim(); ++i) CHECK(t.raw(i) == f.raw(i));
    Jet back = t.to_order(5);
    for (int i = 0; i < t.dim(); ++i) CHECK(back.raw(i) == f.raw(i));
    for (int i = t.dim(); i < back.dim(); ++i) CHECK(back.raw(i) == 0.0);
}

TEST_CASE("truncated product agrees with product of truncations") {
    const JetSpace& s = JetSpace::get(2, 6);
    Jet x = Jet::variable(s, 0, 1.1);
    Jet y = Jet::variable(s, 1, -0.4);
    Jet a = ffl::exp(x) * ffl::cos(y) + x * y;
    Jet b = ffl::recip(1.0 + x * x + y * y);
    Jet full = (a * b).to_order(3);
    Jet part = a.to_order(3) * b.to_order(3);
    for (int i = 0; i < full.dim(); ++i)
        CHECK(full.raw(i) == doctest::Approx(part.raw(i)).epsilon(1e-13));
}

TEST_CASE("five-variable chain rule against nested univariate jets") {
    // f(x1..x5) = sqrt(x1^2 + x2^2) * exp(x3) + atan(x4 * x5)
    const JetSpace& s = JetSpace::get(5, 4);
    double v[5] = {0.8, -0.6, 0.25, 0.5, 1.5};
    Jet x1 = Jet::variable(s, 0, v[0]), x2 = Jet::variable(s, 1, v[1]);
    Jet x3 = Jet::variable(s, 2, v[2]), x4 = Jet::variable(s, 3, v[3]);
    Jet x5 = Jet::variable(s, 4, v[4]);
    Jet f = ffl::sqrt(x1 * x1 + x2 * x2) * ffl::exp(x3) + ffl::atan(x4 * x5);

    auto fv = [](const double* w) {
        return std::sqrt(w[0] * w[0] + w[1] * w[1]) * std::exp(w[2]) + std::atan(w[3] * w[4]);
    };
    CHECK(f.value() == doctest::Approx(fv(v)).epsilon(1e-15));
    const double h = 1e-5;
    for (int a = 0; a < 5; ++a) {
        double wp[5], wm[5];
        for (int i = 0; i < 5; ++i) wp[i] = wm[i] = v[i];
        wp[a] += h;
        wm[a] -= h;
        int idx[5] = {0, 0, 0, 0, 0};
        idx[a] = 1;
        Jet d = f.derivative(a);
        CHECK(d.value() == doctest::Approx((fv(wp) - fv(wm)) / (2 * h)).epsilon(1e-9));
    }
    // one mixed fourth-order coefficient against nested finite differences of
    // the analytic second derivative
    Jet d2 = f.derivative(3).derivative(4);  // d2f/dx4 dx5
    auto d2v = [&](double a4, double a5) {
        // d2/dx4 dx5 atan(x4 x5)
        const double u = a4 * a5;
        const double q = 1 + u * u;
        return 1.0 / q - u * 2 * u / (q * q);
    };
    CHECK(d2.value() == doctest::Approx(d2v(v[3], v[4])).epsilon(1e-12));
}
