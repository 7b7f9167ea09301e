#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <vector>

namespace ffl {

// Truncated multivariate Taylor polynomials ("jets") over 1..6 variables up
// to total degree 6.  All metric derivatives in the main computation path
// come from jet arithmetic; finite differences appear only in test oracles.
//
// Coefficients are stored in graded order: degree 0 first, then degree 1,
// and so on, with a fixed enumeration inside each degree that depends only
// on the variable count.  Consequence: a jet of order L in a given variable
// count is exactly the first dim(L) coefficients of the same jet at any
// higher order, so truncation and zero-extension are prefix copies.

inline constexpr int kJetMaxVars = 6;
inline constexpr int kJetMaxOrder = 6;
inline constexpr int kJetMaxCoeffs = 924;  // C(6+6,6), the largest space used

class JetSpace {
public:
    // Interned; spaces compare by pointer.
    static const JetSpace& get(int nvars, int order);

    int nvars() const { return nvars_; }
    int order() const { return order_; }
    int dim() const { return dim_; }
    // Coefficient count of the same variable set truncated at degree d.
    int dim_at_order(int d) const { return dim_by_order_[d]; }
    const JetSpace& lowered() const;            // order-1 space
    const JetSpace& at_order(int d) const;      // same vars, order d

    // Position of a multi-index, or -1 if its degree exceeds the order.
    int index_of(const int* alpha) const;
    const std::array<uint8_t, kJetMaxVars>& alpha(int idx) const { return alphas_[idx]; }
    int degree(int idx) const { return degree_[idx]; }
    double factorial_of(int idx) const { return alpha_factorial_[idx]; }

    // Product table in output-major CSR form: for target coefficient k, the
    // (i,j) source pairs occupy prod_pairs[prod_off[k] .. prod_off[k+1]).
    const std::vector<int32_t>& prod_off() const { return prod_off_; }
    const std::vector<int32_t>& prod_pairs() const { return prod_pairs_; }

    // Derivative table for variable v: entry m of the lowered space reads
    // source coefficient diff_src[v][m] scaled by diff_fac[v][m].
    const std::vector<int32_t>& diff_src(int v) const { return diff_src_[v]; }
    const std::vector<double>& diff_fac(int v) const { return diff_fac_[v]; }

private:
    JetSpace(int nvars, int order);
    int nvars_, order_, dim_;
    std::array<int, kJetMaxOrder + 2> dim_by_order_{};
    std::vector<std::array<uint8_t, kJetMaxVars>> alphas_;
    std::vector<int> degree_;
    std::vector<double> alpha_factorial_;
    std::vector<int32_t> prod_off_, prod_pairs_;
    std::array<std::vector<int32_t>, kJetMaxVars> diff_src_;
    std::array<std::vector<double>, kJetMaxVars> diff_fac_;
};

class Jet {
public:
    Jet() : sp_(nullptr) {}
    explicit Jet(const JetSpace& s) : sp_(&s) { std::memset(c_.data(), 0, sizeof(double) * s.dim()); }
    Jet(const JetSpace& s, double value) : Jet(s) { c_[0] = value; }

    Jet(const Jet& o) : sp_(o.sp_) {
        if (sp_) std::memcpy(c_.data(), o.c_.data(), sizeof(double) * sp_->dim());
    }
    Jet& operator=(const Jet& o) {
        sp_ = o.sp_;
        if (sp_) std::memmove(c_.data(), o.c_.data(), sizeof(double) * sp_->dim());
        return *this;
    }

    static Jet constant(const JetSpace& s, double v) { return Jet(s, v); }
    // v0 + (variable var); var must have nonzero presence, i.e. order >= 1.
    static Jet variable(const JetSpace& s, int var, double v0);

    const JetSpace& space() const { return *sp_; }
    bool valid() const { return sp_ != nullptr; }
    int dim() const { return sp_->dim(); }

    double value() const { return c_[0]; }
    double& raw(int i) { return c_[i]; }
    double raw(int i) const { return c_[i]; }

    // Taylor coefficient / partial derivative for a multi-index given as one
    // exponent per variable.
    double coeff(std::initializer_list<int> alpha) const;
    double deriv(std::initializer_list<int> alpha) const;

    // Exact partial derivative; result lives in the lowered space.
    Jet derivative(int var) const;
    // Prefix truncation to a lower order (or zero-padded extension upward).
    Jet to_order(int ord) const;

    Jet operator-() const;
    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator+=(double s) { c_[0] += s; return *this; }
    Jet& operator-=(double s) { c_[0] -= s; return *this; }
    Jet& operator*=(double s);

    friend Jet operator+(Jet a, const Jet& b) { a += b; return a; }
    friend Jet operator-(Jet a, const Jet& b) { a -= b; return a; }
    friend Jet operator+(Jet a, double s) { a += s; return a; }
    friend Jet operator+(double s, Jet a) { a += s; return a; }
    friend Jet operator-(Jet a, double s) { a -= s; return a; }
    friend Jet operator-(double s, const Jet& a) { Jet r = -a; r += s; return r; }
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator*(Jet a, double s) { a *= s; return a; }
    friend Jet operator*(double s, Jet a) { a *= s; return a; }
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator/(Jet a, double s) { a *= 1.0 / s; return a; }
    friend Jet operator/(double s, const Jet& b);

    // Composition with univariate analytic maps.  `series[m]` must hold
    // f^(m)(value())/m!; the perturbation part is raised through Horner.
    Jet compose(const double* series, int count) const;

private:
    const JetSpace* sp_;
    std::array<double, kJetMaxCoeffs> c_;
};

Jet sqrt(const Jet& u);
Jet exp(const Jet& u);
Jet log(const Jet& u);
Jet sin(const Jet& u);
Jet cos(const Jet& u);
Jet recip(const Jet& u);
// Arctangent of a jet with arbitrary base value.
Jet atan(const Jet& u);
Jet pow_int(const Jet& u, int k);

}  // namespace ffl
