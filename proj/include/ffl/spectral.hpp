#pragma once

// Fourier machinery for periodic sphere-bundle fields.  A real field
// phi(x1, x2, theta) on a uniform [0,2pi)^3 grid is differentiated through
// its trigonometric interpolant (exact for band-limited data), and the
// 2-homogeneous extension F^2(x, y) = |y|^2 exp(2 phi(x, theta(y))) is
// assembled as a jet so the whole curvature pipeline applies to grid data.

#include <complex>
#include <vector>

#include "ffl/common.hpp"
#include "ffl/jet.hpp"
#include "ffl/metric.hpp"

namespace ffl {

// In-place iterative radix-2 FFT; n must be a power of two.  The inverse
// transform divides by n, so forward-then-inverse is the identity.
void fft_radix2(std::complex<double>* a, int n, bool inverse);

// Real scalar field on an nx * nx * ntheta grid, row-major (i1, i2, j).
// Spectral derivative convention: the Nyquist mode is kept as a cosine, so
// its odd-order derivatives are dropped (keeps real data real).
class SpectralField3 {
 public:
  SpectralField3(int nx, int ntheta, std::vector<double> values);

  int nx() const { return nx_; }
  int ntheta() const { return nt_; }
  const std::vector<double>& values() const { return val_; }

  // d^{a+b+c} phi / dx1^a dx2^b dtheta^c on every grid node.
  std::vector<double> derivative_field(int a, int b, int c) const;

  // All partials with a + b + c <= order at one (off-grid) point, packed as
  // [(a * (order+1) + b) * (order+1) + c]; entries beyond the order are 0.
  std::vector<double> derivatives_at(double x1, double x2, double theta, int order) const;
  double derivative_at(double x1, double x2, double theta, int a, int b, int c) const;

 private:
  int nx_, nt_;
  std::vector<double> val_;
  std::vector<std::complex<double>> hat_;  // forward DFT, unnormalized
};

// F^2 jet at base (x, y0) from packed phi partials at (x, theta(y0)) in the
// derivatives_at layout.  The space must carry the standard coordinate
// layout: slots 0,1 are x offsets and slots 2,3 are y offsets, all pure
// variables; `order` bounds the partial table (>= space order).
Jet compose_f2_jet(const JetSpace& sp, const double* y0, const std::vector<double>& dphi,
                   int order);

// phi = log F(x, e(theta)) of a family sampled on the grid (dim 2,
// periodic_box chart only).
SpectralField3 sample_log_f(const Metric& m, int nx, int ntheta);

// Metric backed by the trigonometric interpolant of phi: positively
// 1-homogeneous by construction, smooth, and usable by every geometry
// operation.  `origin` records the provenance spec (dim 2, periodic_box).
Metric reconstruct_metric(const SpectralField3& phi, const MetricSpec& origin);

}  // namespace ffl
