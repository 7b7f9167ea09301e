#include "ffl/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace ffl {
namespace {

// y^j as a jet in `sp`; an order-0 space carries it as a plain constant.
Jet coord_jet(const JetSpace& sp, int var, double val) {
  return sp.order() >= 1 ? Jet::variable(sp, var, val) : Jet::constant(sp, val);
}

// Adjugate/determinant inverse of a symmetric jet matrix, n = 2 or 3.
std::vector<Jet> invert_jet_matrix(const std::vector<Jet>& m, int n) {
  std::vector<Jet> inv;
  inv.reserve(static_cast<size_t>(n) * n);
  if (n == 2) {
    Jet r = recip(m[0] * m[3] - m[1] * m[2]);
    inv.push_back(m[3] * r);
    inv.push_back(-m[1] * r);
    inv.push_back(-m[2] * r);
    inv.push_back(m[0] * r);
    return inv;
  }
  auto at = [&](int i, int j) -> const Jet& { return m[i * 3 + j]; };
  auto cof = [&](int i, int j) {
    const int r0 = (i + 1) % 3, r1 = (i + 2) % 3;
    const int c0 = (j + 1) % 3, c1 = (j + 2) % 3;
    return at(r0, c0) * at(r1, c1) - at(r0, c1) * at(r1, c0);
  };
  Jet det = at(0, 0) * cof(0, 0) + at(0, 1) * cof(0, 1) + at(0, 2) * cof(0, 2);
  Jet r = recip(det);
  inv.resize(9, Jet());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) inv[i * 3 + j] = cof(j, i) * r;  // adjugate transpose
  return inv;
}

}  // namespace

CurvatureStack::CurvatureStack(const Jet& f2, const VecXd& y, Depth depth)
    : CurvatureStack(f2, y, std::vector<Jet>(), depth) {}

CurvatureStack::CurvatureStack(const Jet& f2, const VecXd& y, std::vector<Jet> y_coord, Depth depth)
    : n_(static_cast<int>(y.size())), order_(f2.space().order()), depth_(depth), y_(y), f2_(f2) {
  const int n = n_;
  const int K = order_;
  if (y_coord.empty()) {
    for (int j = 0; j < n; ++j) y_coord.push_back(coord_jet(f2.space(), n + j, y[j]));
  }
  if (static_cast<int>(y_coord.size()) != n) {
    throw std::invalid_argument("curvature stack: need one y coordinate jet per dimension");
  }
  for (int j = 0; j < n; ++j) {
    if (!y_coord[j].valid() || &y_coord[j].space() != &f2.space() ||
        y_coord[j].value() != y[j]) {
      throw std::invalid_argument("curvature stack: y coordinate jets inconsistent with base y");
    }
  }
  // Extra variables beyond the 2n coordinate slots (e.g. a fiber angle) are
  // allowed; they ride along through every jet operation.
  if (f2.space().nvars() < 2 * n) {
    throw std::invalid_argument("curvature stack: jet needs at least 2*dim variables");
  }
  if (K < (depth == Depth::spray ? 2 : 4)) {
    throw std::invalid_argument("curvature stack: expansion order too low for requested depth");
  }
  if (!(f2.value() > 0.0) || !std::isfinite(f2.value())) {
    throw DegenerateMetric("F^2 = " + fmt17(f2.value()) + " is not positive");
  }

  // --- order K-2: fundamental tensor, its inverse, spray ------------------
  g_.reserve(static_cast<size_t>(n) * n);
  {
    std::vector<Jet> rows;
    rows.reserve(n);
    for (int i = 0; i < n; ++i) rows.push_back(f2_.derivative(n + i));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g_.push_back(rows[i].derivative(n + j) * 0.5);
  }
  {
    MatXd gv(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gv(i, j) = g_[i * n + j].value();
    Eigen::SelfAdjointEigenSolver<MatXd> eig(gv);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 1e-10 * hi)) {
      throw DegenerateMetric("fundamental tensor degenerate: eigenvalues [" + fmt17(lo) + ", " +
                             fmt17(hi) + "]");
    }
  }
  ginv_ = invert_jet_matrix(g_, n);

  const JetSpace& spA = f2.space().at_order(K - 2);
  {
    std::vector<Jet> yA;
    yA.reserve(n);
    for (int j = 0; j < n; ++j) yA.push_back(y_coord[j].to_order(K - 2));
    std::vector<Jet> gv;  // G_h := d^2F2/(dy^h dx^j) y^j - dF2/dx^h
    gv.reserve(n);
    for (int h = 0; h < n; ++h) {
      Jet dh = f2_.derivative(n + h);
      Jet s(spA);
      for (int j = 0; j < n; ++j) s += dh.derivative(j) * yA[j];
      s -= f2_.derivative(h).to_order(K - 2);
      gv.push_back(s);
    }
    spray_.reserve(n);
    for (int i = 0; i < n; ++i) {
      Jet gi(spA);
      for (int h = 0; h < n; ++h) gi += ginv_[i * n + h] * gv[h];
      spray_.push_back(gi * 0.25);
    }
  }
  if (depth == Depth::spray) return;

  // --- order K-3: nonlinear connection, Cartan tensor, christoffels -------
  gj_.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gj_.push_back(spray_[i].derivative(n + j));

  clow_.reserve(static_cast<size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) clow_.push_back(g_[i * n + j].derivative(n + k) * 0.5);

  const JetSpace& spB = f2.space().at_order(K - 3);
  std::vector<Jet> ginvB;
  ginvB.reserve(static_cast<size_t>(n) * n);
  for (const Jet& e : ginv_) ginvB.push_back(e.to_order(K - 3));

  if (depth == Depth::full) {
    cup_.reserve(static_cast<size_t>(n) * n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Jet s(spB);
          for (int h = 0; h < n; ++h) s += ginvB[i * n + h] * clow_[(h * n + j) * n + k];
          cup_.push_back(s);
        }

    // delta_k g_{hj} = d_{x^k} g_{hj} - G^m_k d_{y^m} g_{hj}
    std::vector<Jet> dg(static_cast<size_t>(n) * n * n, Jet());
    for (int k = 0; k < n; ++k)
      for (int h = 0; h < n; ++h)
        for (int j = 0; j < n; ++j) {
          Jet s = g_[h * n + j].derivative(k);
          for (int m = 0; m < n; ++m)
            s -= gj_[m * n + k] * (clow_[(h * n + j) * n + m] * 2.0);
          dg[(k * n + h) * n + j] = s;
        }
    gamma_.reserve(static_cast<size_t>(n) * n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Jet s(spB);
          for (int h = 0; h < n; ++h) {
            s += ginvB[i * n + h] *
                 (dg[(j * n + h) * n + k] + dg[(k * n + j) * n + h] - dg[(h * n + j) * n + k]);
          }
          gamma_.push_back(s * 0.5);
        }
  }

  // --- order K-4: curvature ------------------------------------------------
  const JetSpace& spC = f2.space().at_order(K - 4);
  Jet rf2 = recip(f2_.to_order(K - 4));
  std::vector<Jet> yC, sprayC, gjC;
  yC.reserve(n);
  sprayC.reserve(n);
  gjC.reserve(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) yC.push_back(y_coord[j].to_order(K - 4));
  for (int j = 0; j < n; ++j) sprayC.push_back(spray_[j].to_order(K - 4));
  for (const Jet& e : gj_) gjC.push_back(e.to_order(K - 4));

  rred_.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      Jet t = spray_[i].derivative(k).to_order(K - 4) * 2.0;
      Jet dik = gj_[i * n + k];  // G^i_k at K-3
      for (int j = 0; j < n; ++j) {
        t -= dik.derivative(j) * yC[j];
        t += dik.derivative(n + j) * sprayC[j] * 2.0;
        t -= gjC[i * n + j] * gjC[j * n + k];
      }
      rred_.push_back(rf2 * t);
    }
  }
  ric_ = Jet(spC);
  for (int i = 0; i < n; ++i) ric_ += rred_[i * n + i];

  if (depth != Depth::full) return;

  // delta_i G^l_j - delta_j G^l_i (the curvature of the nonlinear connection)
  auto delta_of = [&](const Jet& s, int i) {
    Jet d = s.derivative(i);
    for (int m = 0; m < n; ++m) d -= gjC[m * n + i] * s.derivative(n + m);
    return d;
  };
  std::vector<Jet> rnc(static_cast<size_t>(n) * n * n, Jet());  // (l, i, j)
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rnc[(l * n + i) * n + j] = delta_of(gj_[l * n + j], i) - delta_of(gj_[l * n + i], j);

  std::vector<Jet> gammaC, cupC;
  gammaC.reserve(gamma_.size());
  cupC.reserve(cup_.size());
  for (const Jet& e : gamma_) gammaC.push_back(e.to_order(K - 4));
  for (const Jet& e : cup_) cupC.push_back(e.to_order(K - 4));

  rhh_.reserve(static_cast<size_t>(n) * n * n * n);
  for (int h = 0; h < n; ++h)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Jet t = delta_of(gamma_[(h * n + j) * n + k], i) - delta_of(gamma_[(h * n + i) * n + k], j);
          for (int l = 0; l < n; ++l) {
            t += gammaC[(l * n + j) * n + k] * gammaC[(h * n + i) * n + l];
            t -= gammaC[(l * n + i) * n + k] * gammaC[(h * n + j) * n + l];
            t += rnc[(l * n + i) * n + j] * cupC[(h * n + l) * n + k];
          }
          rhh_.push_back(t);
        }
}

MatXd CurvatureStack::g() const {
  MatXd m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = g_[i * n_ + j].value();
  return m;
}

MatXd CurvatureStack::ginv() const {
  MatXd m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = ginv_[i * n_ + j].value();
  return m;
}

VecXd CurvatureStack::spray() const {
  VecXd v(n_);
  for (int i = 0; i < n_; ++i) v[i] = spray_[i].value();
  return v;
}

MatXd CurvatureStack::gj() const {
  MatXd m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = gj_[i * n_ + j].value();
  return m;
}

Tensor3 CurvatureStack::cartan() const {
  Tensor3 t(n_);
  for (size_t c = 0; c < clow_.size(); ++c) t.a[c] = clow_[c].value();
  return t;
}

Tensor3 CurvatureStack::cartan_up() const {
  Tensor3 t(n_);
  for (size_t c = 0; c < cup_.size(); ++c) t.a[c] = cup_[c].value();
  return t;
}

Tensor3 CurvatureStack::gamma() const {
  Tensor3 t(n_);
  for (size_t c = 0; c < gamma_.size(); ++c) t.a[c] = gamma_[c].value();
  return t;
}

MatXd CurvatureStack::r_red() const {
  MatXd m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < n_; ++k) m(i, k) = rred_[i * n_ + k].value();
  return m;
}

MatXd CurvatureStack::r_red_low() const { return g() * r_red(); }

Tensor4 CurvatureStack::r_hh() const {
  Tensor4 t(n_);
  for (size_t c = 0; c < rhh_.size(); ++c) t.a[c] = rhh_[c].value();
  return t;
}

VecXd CurvatureStack::ric_y() const {
  VecXd v(n_);
  for (int i = 0; i < n_; ++i) v[i] = ric_.derivative(n_ + i).value();
  return v;
}

MatXd CurvatureStack::ric_yy() const {
  MatXd m(n_, n_);
  for (int i = 0; i < n_; ++i) {
    Jet d = ric_.derivative(n_ + i);
    for (int j = 0; j < n_; ++j) m(i, j) = d.derivative(n_ + j).value();
  }
  return m;
}

MatXd CurvatureStack::ricci_az() const {
  Jet h = f2_.to_order(order_ - 4) * ric_;
  MatXd m(n_, n_);
  for (int i = 0; i < n_; ++i) {
    Jet d = h.derivative(n_ + i);
    for (int j = 0; j < n_; ++j) m(i, j) = 0.5 * d.derivative(n_ + j).value();
  }
  return m;
}

double CurvatureStack::ricci_norm() const {
  const MatXd b = ginv() * ricci_az();
  return std::sqrt(std::max(0.0, (b * b).trace()));
}

MatXd CurvatureStack::ricci_trace_sym() const {
  MatXd r(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      double s = 0.0;
      for (int l = 0; l < n_; ++l) s += rhh_[((l * n_ + i) * n_ + l) * n_ + j].value();
      r(i, j) = s;
    }
  return 0.5 * (r + r.transpose());
}

double CurvatureStack::flag_curvature(const VecXd& V, double tol) const {
  const MatXd gv = g();
  const double gVV = V.dot(gv * V);
  if (!(gVV > 0.0)) throw NotOrthogonal("flag edge V must be nonzero");
  const double F = std::sqrt(f2_.value());
  const double gVy = V.dot(gv * y_);
  if (std::abs(gVy) > tol * F * std::sqrt(gVV)) {
    throw NotOrthogonal("flag edge not orthogonal to the flagpole: g(V,y) = " + fmt17(gVy));
  }
  const MatXd rlow = r_red_low();
  return V.dot(rlow * V) / gVV;
}

MatXd CurvatureStack::gs_frame() const {
  const MatXd gv = g();
  MatXd frame(n_, n_);
  const double F = std::sqrt(f2_.value());
  frame.row(0) = (y_ / F).transpose();
  int have = 1;
  for (int c = 0; c < n_ && have < n_; ++c) {
    VecXd v = VecXd::Zero(n_);
    v[c] = 1.0;
    for (int r = 0; r < have; ++r) {
      const VecXd fr = frame.row(r).transpose();
      v -= fr.dot(gv * v) * fr;
    }
    const double nv = v.dot(gv * v);
    if (nv > 1e-12) {
      frame.row(have++) = (v / std::sqrt(nv)).transpose();
    }
  }
  if (have < n_) throw DegenerateMetric("could not complete an orthonormal frame");
  return frame;
}

Jet tangent_f2_jet(const Metric& m, const double* x, const double* y, int order) {
  m.check_chart(x);
  const int n = m.dim();
  std::vector<int> xv(n), yv(n);
  for (int i = 0; i < n; ++i) {
    xv[i] = i;
    yv[i] = n + i;
  }
  return m.f2_jet(JetSpace::get(2 * n, order), x, y, xv.data(), yv.data());
}

CurvatureStack curvature_stack(const Metric& m, const double* x, const double* y, int order,
                               Depth depth) {
  VecXd yv(m.dim());
  for (int i = 0; i < m.dim(); ++i) yv[i] = y[i];
  return CurvatureStack(tangent_f2_jet(m, x, y, order), yv, depth);
}

TensorDerivs covariant_derivatives(const CurvatureStack& s, const std::vector<Jet>& comps, int up,
                                   int down) {
  if (up < 0 || up > 1 || down < 0 || down > 2) {
    throw ValenceUnsupported("covariant derivatives support valence at most (1,2), got (" +
                             std::to_string(up) + "," + std::to_string(down) + ")");
  }
  const int n = s.n();
  size_t count = 1;
  for (int r = 0; r < up + down; ++r) count *= n;
  if (comps.size() != count) {
    throw std::invalid_argument("covariant derivatives: component count mismatch");
  }
  const MatXd gjv = s.gj();
  const Tensor3 gam = s.gamma();
  const Tensor3 cgam = s.cartan_up();

  const int slots = up + down;
  std::vector<size_t> stride(slots, 1);
  for (int r = slots - 2; r >= 0; --r) stride[r] = stride[r + 1] * n;

  TensorDerivs out;
  out.horizontal.assign(n, std::vector<double>(count, 0.0));
  out.vertical.assign(n, std::vector<double>(count, 0.0));
  std::vector<int> digit(slots, 0);
  for (size_t c = 0; c < count; ++c) {
    size_t rem = c;
    for (int r = 0; r < slots; ++r) {
      digit[r] = static_cast<int>(rem / stride[r]);
      rem %= stride[r];
    }
    std::vector<double> dx(n), dy(n);
    for (int l = 0; l < n; ++l) {
      dx[l] = comps[c].derivative(l).value();
      dy[l] = comps[c].derivative(n + l).value();
    }
    for (int l = 0; l < n; ++l) {
      double h = dx[l];
      for (int m = 0; m < n; ++m) h -= gjv(m, l) * dy[m];
      double v = dy[l];
      for (int r = 0; r < slots; ++r) {
        const int a = digit[r];
        for (int sub = 0; sub < n; ++sub) {
          const size_t cc =
              static_cast<size_t>(static_cast<long long>(c) +
                                  static_cast<long long>(sub - a) *
                                      static_cast<long long>(stride[r]));
          const double sv = comps[cc].value();
          if (r < up) {
            h += sv * gam(a, sub, l);
            v += sv * cgam(a, sub, l);
          } else {
            h -= sv * gam(sub, a, l);
            v -= sv * cgam(sub, a, l);
          }
        }
      }
      out.horizontal[l][c] = h;
      out.vertical[l][c] = v;
    }
  }
  return out;
}

CurvatureReport curvature_report(const Metric& m, const double* x, const double* y) {
  CurvatureStack s = curvature_stack(m, x, y, 6, Depth::full);
  CurvatureReport rep;
  rep.dim = s.n();
  rep.f2 = s.f2();
  rep.g = s.g();
  rep.ginv = s.ginv();
  rep.cartan = s.cartan();
  rep.spray = s.spray();
  rep.gj = s.gj();
  rep.gamma = s.gamma();
  rep.r_red = s.r_red();
  rep.r_hh = s.r_hh();
  rep.ric = s.ric();
  rep.ric_az = s.ricci_az();
  rep.rc_trace = s.ricci_trace_sym();
  rep.ric_norm = s.ricci_norm();
  Eigen::SelfAdjointEigenSolver<MatXd> eig(rep.g);
  rep.min_eig_g = eig.eigenvalues().minCoeff();
  return rep;
}

namespace {

void write_matrix(std::ostringstream& o, const MatXd& m) {
  o << "[";
  for (int i = 0; i < m.rows(); ++i) {
    if (i) o << ",";
    o << "[";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) o << ",";
      o << fmt17(m(i, j));
    }
    o << "]";
  }
  o << "]";
}

void write_vector(std::ostringstream& o, const VecXd& v) {
  o << "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i) o << ",";
    o << fmt17(v[i]);
  }
  o << "]";
}

void write_tensor3(std::ostringstream& o, const Tensor3& t) {
  o << "[";
  for (int i = 0; i < t.n; ++i) {
    if (i) o << ",";
    o << "[";
    for (int j = 0; j < t.n; ++j) {
      if (j) o << ",";
      o << "[";
      for (int k = 0; k < t.n; ++k) {
        if (k) o << ",";
        o << fmt17(t(i, j, k));
      }
      o << "]";
    }
    o << "]";
  }
  o << "]";
}

void write_tensor4(std::ostringstream& o, const Tensor4& t) {
  o << "[";
  for (int h = 0; h < t.n; ++h) {
    if (h) o << ",";
    o << "[";
    for (int k = 0; k < t.n; ++k) {
      if (k) o << ",";
      o << "[";
      for (int i = 0; i < t.n; ++i) {
        if (i) o << ",";
        o << "[";
        for (int j = 0; j < t.n; ++j) {
          if (j) o << ",";
          o << fmt17(t(h, k, i, j));
        }
        o << "]";
      }
      o << "]";
    }
    o << "]";
  }
  o << "]";
}

}  // namespace

std::string report_json(const CurvatureReport& rep) {
  std::ostringstream o;
  o << "{\"dim\":" << rep.dim;
  o << ",\"f2\":" << fmt17(rep.f2);
  o << ",\"min_eig_g\":" << fmt17(rep.min_eig_g);
  o << ",\"g\":";
  write_matrix(o, rep.g);
  o << ",\"g_inv\":";
  write_matrix(o, rep.ginv);
  o << ",\"cartan\":";
  write_tensor3(o, rep.cartan);
  o << ",\"spray\":";
  write_vector(o, rep.spray);
  o << ",\"nonlinear_connection\":";
  write_matrix(o, rep.gj);
  o << ",\"cartan_christoffel\":";
  write_tensor3(o, rep.gamma);
  o << ",\"reduced_curvature\":";
  write_matrix(o, rep.r_red);
  o << ",\"hh_curvature\":";
  write_tensor4(o, rep.r_hh);
  o << ",\"ric\":" << fmt17(rep.ric);
  o << ",\"ricci_tensor_az1\":";
  write_matrix(o, rep.ric_az);
  o << ",\"ricci_tensor_trace\":";
  write_matrix(o, rep.rc_trace);
  o << ",\"ricci_norm\":" << fmt17(rep.ric_norm);
  o << "}";
  return o.str();
}

}  // namespace ffl
