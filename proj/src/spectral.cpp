#include "ffl/spectral.hpp"

#include <cmath>
#include <memory>

namespace ffl {
namespace {

using cd = std::complex<double>;

bool power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

// (i k)^order for DFT bin j of an n-point transform; Nyquist odd orders -> 0.
cd freq_pow(int j, int n, int order) {
  if (order == 0) return cd(1.0, 0.0);
  if (j == n / 2 && (order & 1)) return cd(0.0, 0.0);
  const int k = (j <= n / 2) ? j : j - n;
  cd r(1.0, 0.0);
  const cd ik(0.0, static_cast<double>(k));
  for (int c = 0; c < order; ++c) r *= ik;
  return r;
}

// FFT along one axis of a (n1, n2, n3) row-major array.
void fft_axis(std::vector<cd>& a, int n1, int n2, int n3, int axis, bool inverse) {
  if (axis == 2) {
    for (int i = 0; i < n1 * n2; ++i) fft_radix2(&a[static_cast<size_t>(i) * n3], n3, inverse);
    return;
  }
  const int len = axis == 0 ? n1 : n2;
  const size_t stride = axis == 0 ? static_cast<size_t>(n2) * n3 : static_cast<size_t>(n3);
  std::vector<cd> buf(len);
  const int outer = axis == 0 ? n2 : n1;
  for (int o = 0; o < outer; ++o)
    for (int i3 = 0; i3 < n3; ++i3) {
      const size_t base = (axis == 0 ? static_cast<size_t>(o) * n3 : static_cast<size_t>(o) * n2 * n3) + i3;
      for (int l = 0; l < len; ++l) buf[l] = a[base + stride * l];
      fft_radix2(buf.data(), len, inverse);
      for (int l = 0; l < len; ++l) a[base + stride * l] = buf[l];
    }
}

void fft3(std::vector<cd>& a, int n1, int n2, int n3, bool inverse) {
  fft_axis(a, n1, n2, n3, 2, inverse);
  fft_axis(a, n1, n2, n3, 1, inverse);
  fft_axis(a, n1, n2, n3, 0, inverse);
}

double inv_factorial(int k) {
  static const double table[] = {1.0, 1.0, 0.5, 1.0 / 6, 1.0 / 24, 1.0 / 120, 1.0 / 720};
  return table[k];
}

}  // namespace

void fft_radix2(std::complex<double>* a, int n, bool inverse) {
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / len;
    const cd wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      cd w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const cd u = a[i + k];
        const cd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double s = 1.0 / n;
    for (int i = 0; i < n; ++i) a[i] *= s;
  }
}

SpectralField3::SpectralField3(int nx, int ntheta, std::vector<double> values)
    : nx_(nx), nt_(ntheta), val_(std::move(values)) {
  if (!power_of_two(nx_) || !power_of_two(nt_)) {
    throw ConfigError("spectral grid sizes must be powers of two, got " + std::to_string(nx_) +
                      " x " + std::to_string(nt_));
  }
  if (val_.size() != static_cast<size_t>(nx_) * nx_ * nt_) {
    throw ConfigError("field size does not match nx*nx*ntheta");
  }
  for (double v : val_) {
    if (!std::isfinite(v)) throw NonPositive("field contains a non-finite value");
  }
  hat_.assign(val_.begin(), val_.end());
  fft3(hat_, nx_, nx_, nt_, false);
}

std::vector<double> SpectralField3::derivative_field(int a, int b, int c) const {
  std::vector<cd> tmp(hat_);
  std::vector<cd> m1(nx_), m2(nx_), m3(nt_);
  for (int j = 0; j < nx_; ++j) m1[j] = freq_pow(j, nx_, a);
  for (int j = 0; j < nx_; ++j) m2[j] = freq_pow(j, nx_, b);
  for (int j = 0; j < nt_; ++j) m3[j] = freq_pow(j, nt_, c);
  size_t idx = 0;
  for (int j1 = 0; j1 < nx_; ++j1)
    for (int j2 = 0; j2 < nx_; ++j2) {
      const cd m12 = m1[j1] * m2[j2];
      for (int j3 = 0; j3 < nt_; ++j3) tmp[idx++] *= m12 * m3[j3];
    }
  fft3(tmp, nx_, nx_, nt_, true);
  std::vector<double> out(tmp.size());
  for (size_t i = 0; i < tmp.size(); ++i) out[i] = tmp[i].real();
  return out;
}

std::vector<double> SpectralField3::derivatives_at(double x1, double x2, double theta,
                                                   int order) const {
  const int S = order + 1;
  // Stage the sums innermost-axis first so each extra derivative order costs
  // one pass, not a full 3-D sum.
  std::vector<std::vector<cd>> w(3);
  auto fill = [&](int axis, int n, double coord) {
    w[axis].resize(static_cast<size_t>(S) * n);
    for (int j = 0; j < n; ++j) {
      const int k = (j <= n / 2) ? j : j - n;
      const cd ph(std::cos(k * coord), std::sin(k * coord));
      for (int d = 0; d < S; ++d) w[axis][static_cast<size_t>(d) * n + j] = freq_pow(j, n, d) * ph;
    }
  };
  fill(0, nx_, x1);
  fill(1, nx_, x2);
  fill(2, nt_, theta);

  std::vector<cd> A(static_cast<size_t>(S) * nx_ * nx_, cd(0.0, 0.0));
  size_t idx = 0;
  for (int j1 = 0; j1 < nx_; ++j1)
    for (int j2 = 0; j2 < nx_; ++j2) {
      const size_t cell = static_cast<size_t>(j1) * nx_ + j2;
      for (int j3 = 0; j3 < nt_; ++j3) {
        const cd h = hat_[idx++];
        for (int d = 0; d < S; ++d) A[static_cast<size_t>(d) * nx_ * nx_ + cell] += h * w[2][static_cast<size_t>(d) * nt_ + j3];
      }
    }
  std::vector<cd> B(static_cast<size_t>(S) * S * nx_, cd(0.0, 0.0));
  for (int c = 0; c < S; ++c)
    for (int j1 = 0; j1 < nx_; ++j1)
      for (int j2 = 0; j2 < nx_; ++j2) {
        const cd h = A[static_cast<size_t>(c) * nx_ * nx_ + static_cast<size_t>(j1) * nx_ + j2];
        for (int b = 0; b + c < S; ++b)
          B[(static_cast<size_t>(b) * S + c) * nx_ + j1] += h * w[1][static_cast<size_t>(b) * nx_ + j2];
      }
  std::vector<double> out(static_cast<size_t>(S) * S * S, 0.0);
  const double norm = 1.0 / (static_cast<double>(nx_) * nx_ * nt_);
  for (int b = 0; b < S; ++b)
    for (int c = 0; b + c < S; ++c)
      for (int j1 = 0; j1 < nx_; ++j1) {
        const cd h = B[(static_cast<size_t>(b) * S + c) * nx_ + j1];
        for (int a = 0; a + b + c < S; ++a)
          out[(static_cast<size_t>(a) * S + b) * S + c] +=
              (h * w[0][static_cast<size_t>(a) * nx_ + j1]).real() * norm;
      }
  return out;
}

double SpectralField3::derivative_at(double x1, double x2, double theta, int a, int b,
                                     int c) const {
  const int order = a + b + c;
  const int S = order + 1;
  return derivatives_at(x1, x2, theta, order)[(static_cast<size_t>(a) * S + b) * S + c];
}

Jet compose_f2_jet(const JetSpace& sp, const double* y0, const std::vector<double>& dphi,
                   int order) {
  const int K = sp.order();
  const int S = order + 1;
  Jet dy1 = Jet::variable(sp, 2, 0.0);
  Jet dy2 = Jet::variable(sp, 3, 0.0);
  // theta(y) - theta(y0) around the base direction, exact as a series.
  Jet u = dy2 * y0[0] - dy1 * y0[1];
  Jet v = dy1 * y0[0] + dy2 * y0[1] + (y0[0] * y0[0] + y0[1] * y0[1]);
  Jet dth = atan(u * recip(v));

  std::vector<Jet> thp(K + 1, Jet());
  thp[0] = Jet::constant(sp, 1.0);
  for (int c = 1; c <= K; ++c) thp[c] = thp[c - 1] * dth;

  // phi(x0+dx, theta0+dth): the dx-dependence is polynomial in the pure
  // variables dx1, dx2, so each Taylor block is a dth-series shifted by the
  // monomial dx1^a dx2^b -- a coefficient move, not a jet product.
  Jet phi(sp);
  const int nv = sp.nvars();
  int tgt[kJetMaxVars];
  for (int a = 0; a <= K; ++a)
    for (int b = 0; a + b <= K; ++b) {
      Jet q(sp);
      bool any = false;
      for (int c = 0; a + b + c <= K; ++c) {
        const double coef = dphi[(static_cast<size_t>(a) * S + b) * S + c] * inv_factorial(a) *
                            inv_factorial(b) * inv_factorial(c);
        if (coef == 0.0) continue;
        q += thp[c] * coef;
        any = true;
      }
      if (!any) continue;
      if (a == 0 && b == 0) {
        phi += q;
        continue;
      }
      for (int m = 0; m < sp.dim(); ++m) {
        const double cm = q.raw(m);
        if (cm == 0.0) continue;
        const auto& al = sp.alpha(m);
        for (int vv = 0; vv < nv; ++vv) tgt[vv] = al[vv];
        tgt[0] += a;
        tgt[1] += b;
        const int im = sp.index_of(tgt);
        if (im >= 0) phi.raw(im) += cm;
      }
    }
  Jet y1 = dy1 + y0[0];
  Jet y2 = dy2 + y0[1];
  return (y1 * y1 + y2 * y2) * exp(phi * 2.0);
}

SpectralField3 sample_log_f(const Metric& m, int nx, int ntheta) {
  if (m.dim() != 2 || m.spec().chart != Chart::periodic_box) {
    throw ConfigError("grid sampling needs a dim-2 metric on the periodic box chart");
  }
  std::vector<double> phi(static_cast<size_t>(nx) * nx * ntheta);
  size_t idx = 0;
  for (int i1 = 0; i1 < nx; ++i1)
    for (int i2 = 0; i2 < nx; ++i2) {
      const double x[2] = {2.0 * M_PI * i1 / nx, 2.0 * M_PI * i2 / nx};
      for (int j = 0; j < ntheta; ++j) {
        const double th = 2.0 * M_PI * j / ntheta;
        const double e[2] = {std::cos(th), std::sin(th)};
        const double f2 = m.f2(x, e);
        if (!(f2 > 0.0) || !std::isfinite(f2)) {
          throw DegenerateMetric("F^2 = " + fmt17(f2) + " at a grid node");
        }
        phi[idx++] = 0.5 * std::log(f2);
      }
    }
  return SpectralField3(nx, ntheta, std::move(phi));
}

Metric reconstruct_metric(const SpectralField3& phi, const MetricSpec& origin) {
  if (origin.dim != 2 || origin.chart != Chart::periodic_box) {
    throw ConfigError("reconstruction needs a dim-2 periodic-box origin spec");
  }
  auto field = std::make_shared<const SpectralField3>(phi);
  return Metric::with_evaluator(origin, [field](const std::vector<Jet>& x,
                                                const std::vector<Jet>& y) -> Jet {
    const JetSpace& sp = x.at(0).space();
    const int K = sp.order();
    const double x0[2] = {x[0].value(), x[1].value()};
    const double y0[2] = {y[0].value(), y[1].value()};
    const double n0 = y0[0] * y0[0] + y0[1] * y0[1];
    if (!(n0 > 0.0)) throw DegenerateMetric("reconstruction evaluated at y = 0");
    const double th0 = std::atan2(y0[1], y0[0]);
    const std::vector<double> dphi = field->derivatives_at(x0[0], x0[1], th0, K);
    const int S = K + 1;

    Jet dx1 = x[0] - x0[0];
    Jet dx2 = x[1] - x0[1];
    Jet u = y[1] * y0[0] - y[0] * y0[1];
    Jet v = y[0] * y0[0] + y[1] * y0[1];
    Jet dth = atan(u * recip(v));

    std::vector<Jet> p1(K + 1, Jet()), p2(K + 1, Jet()), pt(K + 1, Jet());
    p1[0] = p2[0] = pt[0] = Jet::constant(sp, 1.0);
    for (int c = 1; c <= K; ++c) {
      p1[c] = p1[c - 1] * dx1;
      p2[c] = p2[c - 1] * dx2;
      pt[c] = pt[c - 1] * dth;
    }
    Jet phj(sp);
    for (int a = 0; a <= K; ++a)
      for (int b = 0; a + b <= K; ++b) {
        Jet q(sp);
        bool any = false;
        for (int c = 0; a + b + c <= K; ++c) {
          const double coef = dphi[(static_cast<size_t>(a) * S + b) * S + c] * inv_factorial(a) *
                              inv_factorial(b) * inv_factorial(c);
          if (coef == 0.0) continue;
          q += pt[c] * coef;
          any = true;
        }
        if (any) phj += q * p1[a] * p2[b];
      }
    return (y[0] * y[0] + y[1] * y[1]) * exp(phj * 2.0);
  });
}

}  // namespace ffl
