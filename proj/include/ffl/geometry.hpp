#pragma once

// Curvature pipeline.  Everything is computed from a single truncated Taylor
// expansion of F^2 at a point of the slit tangent bundle, using the fixed
// variable layout: jet variables 0..n-1 carry x^1..x^n and n..2n-1 carry
// y^1..y^n (further variables, e.g. a fiber angle, ride along untouched).
// Quantities are kept as jets at the highest order the source
// expansion supports, so callers can keep differentiating (e.g. in y for the
// Ricci-tensor Hessian, or along the indicatrix for conversion checks).
//
// Orders consumed from an F^2 expansion of total order K:
//   g, g^{-1}, spray G^i                  -> K-2
//   G^i_j, Cartan C, Gamma                -> K-3
//   reduced R^i_k, hh-curvature, Ric      -> K-4
// K = 4 yields curvature values; K = 6 additionally yields y-Hessians of Ric.

#include <string>
#include <vector>

#include "ffl/common.hpp"
#include "ffl/jet.hpp"
#include "ffl/metric.hpp"

namespace ffl {

// How far down the pipeline to compute.  `reduced` skips the Cartan
// christoffels and the full hh-curvature (the flow stepper only needs the
// trace of R^i_k), `full` computes everything.
enum class Depth { spray, reduced, full };

class CurvatureStack {
 public:
  // f2 must live in the 2n-variable layout above with order >= 2 (depth
  // spray) or >= 4 (reduced/full); y is the base direction (nonzero).
  // Throws DegenerateMetric when F^2 <= 0 or g drops rank at the point.
  CurvatureStack(const Jet& f2, const VecXd& y, Depth depth = Depth::full);

  // Same, but with the y coordinate jets given explicitly.  Required when
  // the y slots are seeded along a path of extra variables (the plain form
  // assumes y^j = y_j + dy_j, which drops the path dependence from every
  // formula that references y^j itself).
  CurvatureStack(const Jet& f2, const VecXd& y, std::vector<Jet> y_coord,
                 Depth depth = Depth::full);

  int n() const { return n_; }
  int order() const { return order_; }
  Depth depth() const { return depth_; }
  const VecXd& y() const { return y_; }

  // Jets (orders as listed in the header comment).
  const Jet& f2_jet() const { return f2_; }
  const Jet& g_jet(int i, int j) const { return g_[i * n_ + j]; }
  const Jet& ginv_jet(int i, int j) const { return ginv_[i * n_ + j]; }
  const Jet& spray_jet(int i) const { return spray_[i]; }
  const Jet& gj_jet(int i, int j) const { return gj_[i * n_ + j]; }
  const Jet& cartan_jet(int i, int j, int k) const { return clow_[(i * n_ + j) * n_ + k]; }
  const Jet& cartan_up_jet(int i, int j, int k) const { return cup_[(i * n_ + j) * n_ + k]; }
  const Jet& gamma_jet(int i, int j, int k) const { return gamma_[(i * n_ + j) * n_ + k]; }
  const Jet& r_red_jet(int i, int k) const { return rred_[i * n_ + k]; }
  const Jet& ric_jet() const { return ric_; }

  // Point values.
  double f2() const { return f2_.value(); }
  double ric() const { return ric_.value(); }
  MatXd g() const;
  MatXd ginv() const;
  VecXd spray() const;
  MatXd gj() const;
  Tensor3 cartan() const;      // lowered C_ijk
  Tensor3 cartan_up() const;   // C^i_jk
  Tensor3 gamma() const;       // Gamma^i_jk
  MatXd r_red() const;         // R^i_k, row i
  MatXd r_red_low() const;     // R_jk = g_jh R^h_k
  Tensor4 r_hh() const;        // R^h_kij (depth full only)

  // dRic/dy^i and d^2 Ric/dy^i dy^j; need source order >= 5 resp. 6.
  VecXd ric_y() const;
  MatXd ric_yy() const;
  // Ric_ij = 1/2 [F^2 Ric]_{y^i y^j} (needs order >= 6), and its g-norm.
  MatXd ricci_az() const;
  double ricci_norm() const;
  // Rc_ij = 1/2 (R_ij + R_ji) with R_ij the (l,i,l,j) trace of R^h_kij.
  MatXd ricci_trace_sym() const;

  // Flag curvature of the flag (y; V).  V must be g-orthogonal to y:
  // |g(V,y)| <= tol * F * |V|_g, else NotOrthogonal.
  double flag_curvature(const VecXd& V, double tol = 1e-8) const;

  // Deterministic g-orthonormal frame: row 0 is l = y/F, rows 1..n-1 come
  // from Gram-Schmidt over the coordinate vectors in index order.
  MatXd gs_frame() const;

 private:
  int n_ = 0;
  int order_ = 0;
  Depth depth_ = Depth::full;
  VecXd y_;
  Jet f2_;
  Jet ric_;
  std::vector<Jet> g_, ginv_, spray_, gj_, clow_, cup_, gamma_, rred_, rhh_;
};

// F^2 jet of an analytic family at (x, y) in the pipeline layout; checks the
// chart first.
Jet tangent_f2_jet(const Metric& m, const double* x, const double* y, int order);

CurvatureStack curvature_stack(const Metric& m, const double* x, const double* y, int order,
                               Depth depth = Depth::full);

// Horizontal and vertical covariant derivatives of a tensor with `up` (<=1)
// contravariant and `down` (<=2) covariant slots.  `comps` holds one jet per
// component (order >= 1, same variable layout), flattened row-major with the
// contravariant index first.  Entry [l][c] of a result is the l-th covariant
// derivative of component c.
struct TensorDerivs {
  std::vector<std::vector<double>> horizontal;  // nabla_l, Gamma connection
  std::vector<std::vector<double>> vertical;    // vertical nabla_l, C connection
};
TensorDerivs covariant_derivatives(const CurvatureStack& s, const std::vector<Jet>& comps, int up,
                                   int down);

// Flat summary of every pointwise quantity, for CLI output and oracle diffs.
struct CurvatureReport {
  int dim = 0;
  double f2 = 0.0;
  double min_eig_g = 0.0;
  MatXd g, ginv;
  Tensor3 cartan;
  VecXd spray;
  MatXd gj;
  Tensor3 gamma;
  MatXd r_red;
  Tensor4 r_hh;
  double ric = 0.0;
  MatXd ric_az;
  MatXd rc_trace;
  double ric_norm = 0.0;
};

CurvatureReport curvature_report(const Metric& m, const double* x, const double* y);
std::string report_json(const CurvatureReport& rep);

}  // namespace ffl
