#include "ffl/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace ffl {

namespace {

// Pack exponents (each <= kJetMaxOrder, so 4 bits suffice) for index lookup.
uint32_t pack_alpha(const uint8_t* a, int nvars) {
    uint32_t key = 0;
    for (int v = 0; v < nvars; ++v) key |= static_cast<uint32_t>(a[v]) << (4 * v);
    return key;
}

void enumerate_degree(int nvars, int deg, int var, std::array<uint8_t, kJetMaxVars>& cur,
                      std::vector<std::array<uint8_t, kJetMaxVars>>& out) {
    if (var == nvars - 1) {
        cur[var] = static_cast<uint8_t>(deg);
        out.push_back(cur);
        return;
    }
    for (int e = 0; e <= deg; ++e) {
        cur[var] = static_cast<uint8_t>(e);
        enumerate_degree(nvars, deg - e, var + 1, cur, out);
    }
}

}  // namespace

JetSpace::JetSpace(int nvars, int order) : nvars_(nvars), order_(order) {
    if (nvars < 1 || nvars > kJetMaxVars || order < 0 || order > kJetMaxOrder)
        throw std::invalid_argument("JetSpace: unsupported nvars/order");

    std::array<uint8_t, kJetMaxVars> cur{};
    for (int d = 0; d <= order; ++d) {
        enumerate_degree(nvars, d, 0, cur, alphas_);
        dim_by_order_[d] = static_cast<int>(alphas_.size());
    }
    dim_ = static_cast<int>(alphas_.size());

    degree_.resize(dim_);
    alpha_factorial_.resize(dim_);
    std::unordered_map<uint32_t, int> lookup;
    lookup.reserve(dim_ * 2);
    for (int i = 0; i < dim_; ++i) {
        int deg = 0;
        double fac = 1.0;
        for (int v = 0; v < nvars; ++v) {
            deg += alphas_[i][v];
            for (int e = 2; e <= alphas_[i][v]; ++e) fac *= e;
        }
        degree_[i] = deg;
        alpha_factorial_[i] = fac;
        lookup.emplace(pack_alpha(alphas_[i].data(), nvars), i);
    }

    // Product table, grouped by output coefficient.
    std::vector<std::vector<int32_t>> by_target(dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) {
            if (degree_[i] + degree_[j] > order) continue;
            std::array<uint8_t, kJetMaxVars> sum{};
            for (int v = 0; v < nvars; ++v) sum[v] = alphas_[i][v] + alphas_[j][v];
            int k = lookup.at(pack_alpha(sum.data(), nvars));
            by_target[k].push_back(i);
            by_target[k].push_back(j);
        }
    }
    prod_off_.resize(dim_ + 1);
    prod_off_[0] = 0;
    for (int k = 0; k < dim_; ++k)
        prod_off_[k + 1] = prod_off_[k] + static_cast<int32_t>(by_target[k].size() / 2);
    prod_pairs_.reserve(prod_off_[dim_] * 2);
    for (int k = 0; k < dim_; ++k)
        prod_pairs_.insert(prod_pairs_.end(), by_target[k].begin(), by_target[k].end());

    // Derivative tables map the (order-1) space back into this one.
    if (order >= 1) {
        const int lower_dim = dim_by_order_[order - 1];
        for (int v = 0; v < nvars; ++v) {
            diff_src_[v].resize(lower_dim);
            diff_fac_[v].resize(lower_dim);
            for (int m = 0; m < lower_dim; ++m) {
                std::array<uint8_t, kJetMaxVars> src = alphas_[m];
                src[v]++;
                diff_src_[v][m] = lookup.at(pack_alpha(src.data(), nvars));
                diff_fac_[v][m] = static_cast<double>(src[v]);
            }
        }
    }
}

int JetSpace::index_of(const int* alpha) const {
    std::array<uint8_t, kJetMaxVars> a{};
    int deg = 0;
    for (int v = 0; v < nvars_; ++v) {
        a[v] = static_cast<uint8_t>(alpha[v]);
        deg += alpha[v];
    }
    if (deg > order_) return -1;
    // Spaces are small; linear scan over the degree block keeps this simple.
    const int lo = deg == 0 ? 0 : dim_by_order_[deg - 1];
    const int hi = dim_by_order_[deg];
    for (int i = lo; i < hi; ++i)
        if (alphas_[i] == a) return i;
    return -1;
}

const JetSpace& JetSpace::get(int nvars, int order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<JetSpace>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(nvars, order);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::unique_ptr<JetSpace>(new JetSpace(nvars, order))).first;
    return *it->second;
}

const JetSpace& JetSpace::lowered() const { return get(nvars_, order_ - 1); }
const JetSpace& JetSpace::at_order(int d) const { return get(nvars_, d); }

Jet Jet::variable(const JetSpace& s, int var, double v0) {
    assert(s.order() >= 1 && var >= 0 && var < s.nvars());
    Jet r(s);
    r.c_[0] = v0;
    // Degree-1 block: find the coefficient whose multi-index is e_var.
    int alpha[kJetMaxVars] = {0, 0, 0, 0, 0, 0};
    alpha[var] = 1;
    r.c_[s.index_of(alpha)] = 1.0;
    return r;
}

double Jet::coeff(std::initializer_list<int> alpha) const {
    assert(static_cast<int>(alpha.size()) == sp_->nvars());
    int a[kJetMaxVars] = {0, 0, 0, 0, 0, 0};
    int v = 0;
    for (int e : alpha) a[v++] = e;
    int idx = sp_->index_of(a);
    return idx < 0 ? 0.0 : c_[idx];
}

double Jet::deriv(std::initializer_list<int> alpha) const {
    assert(static_cast<int>(alpha.size()) == sp_->nvars());
    int a[kJetMaxVars] = {0, 0, 0, 0, 0, 0};
    int v = 0;
    for (int e : alpha) a[v++] = e;
    int idx = sp_->index_of(a);
    return idx < 0 ? 0.0 : c_[idx] * sp_->factorial_of(idx);
}

Jet Jet::derivative(int var) const {
    const JetSpace& lo = sp_->lowered();
    Jet r(lo);
    const auto& src = sp_->diff_src(var);
    const auto& fac = sp_->diff_fac(var);
    for (int m = 0; m < lo.dim(); ++m) r.c_[m] = fac[m] * c_[src[m]];
    return r;
}

Jet Jet::to_order(int ord) const {
    const JetSpace& target = sp_->at_order(ord);
    Jet r(target);
    const int keep = std::min(target.dim(), sp_->dim());
    std::memcpy(r.c_.data(), c_.data(), sizeof(double) * keep);
    return r;
}

Jet Jet::operator-() const {
    Jet r(*sp_);
    for (int i = 0; i < sp_->dim(); ++i) r.c_[i] = -c_[i];
    return r;
}

Jet& Jet::operator+=(const Jet& o) {
    assert(sp_ == &o.space());
    for (int i = 0; i < sp_->dim(); ++i) c_[i] += o.c_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    assert(sp_ == &o.space());
    for (int i = 0; i < sp_->dim(); ++i) c_[i] -= o.c_[i];
    return *this;
}

Jet& Jet::operator*=(double s) {
    for (int i = 0; i < sp_->dim(); ++i) c_[i] *= s;
    return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
    assert(a.sp_ == b.sp_);
    const JetSpace& s = *a.sp_;
    Jet r(s);
    const int32_t* off = s.prod_off().data();
    const int32_t* pairs = s.prod_pairs().data();
    const double* ca = a.c_.data();
    const double* cb = b.c_.data();
    for (int k = 0; k < s.dim(); ++k) {
        double acc = 0.0;
        for (int32_t p = off[k]; p < off[k + 1]; ++p)
            acc += ca[pairs[2 * p]] * cb[pairs[2 * p + 1]];
        r.c_[k] = acc;
    }
    return r;
}

Jet Jet::compose(const double* series, int count) const {
    const JetSpace& s = *sp_;
    Jet p(*this);
    p.c_[0] = 0.0;  // pure perturbation
    Jet r(s, series[count - 1]);
    for (int m = count - 2; m >= 0; --m) {
        r = r * p;
        r.c_[0] += series[m];
    }
    return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }
Jet operator/(double s, const Jet& b) { return recip(b) * s; }

Jet recip(const Jet& u) {
    const int K = u.space().order();
    double series[kJetMaxOrder + 1];
    const double u0 = u.value();
    double p = 1.0 / u0;
    for (int m = 0; m <= K; ++m) {
        series[m] = p;
        p *= -1.0 / u0;
    }
    return u.compose(series, K + 1);
}

Jet sqrt(const Jet& u) {
    const int K = u.space().order();
    double series[kJetMaxOrder + 1];
    const double u0 = u.value();
    const double r0 = std::sqrt(u0);
    // binom(1/2, m) * u0^(1/2 - m)
    double coef = 1.0, upow = r0;
    for (int m = 0; m <= K; ++m) {
        series[m] = coef * upow;
        coef *= (0.5 - m) / (m + 1);
        upow /= u0;
    }
    return u.compose(series, K + 1);
}

Jet exp(const Jet& u) {
    const int K = u.space().order();
    double series[kJetMaxOrder + 1];
    const double e0 = std::exp(u.value());
    double fac = 1.0;
    for (int m = 0; m <= K; ++m) {
        series[m] = e0 / fac;
        fac *= (m + 1);
    }
    return u.compose(series, K + 1);
}

Jet log(const Jet& u) {
    const int K = u.space().order();
    double series[kJetMaxOrder + 1];
    const double u0 = u.value();
    series[0] = std::log(u0);
    double p = 1.0 / u0;
    for (int m = 1; m <= K; ++m) {
        series[m] = (m % 2 ? p : -p) / m;
        p /= u0;
    }
    return u.compose(series, K + 1);
}

Jet sin(const Jet& u) {
    const int K = u.space().order();
    double series[kJetMaxOrder + 1];
    const double s0 = std::sin(u.value()), c0 = std::cos(u.value());
    const double cycle[4] = {s0, c0, -s0, -c0};
    double fac = 1.0;
    for (int m = 0; m <= K; ++m) {
        series[m] = cycle[m % 4] / fac;
        fac *= (m + 1);
    }
    return u.compose(series, K + 1);
}

Jet cos(const Jet& u) {
    const int K = u.space().order();
    double series[kJetMaxOrder + 1];
    const double s0 = std::sin(u.value()), c0 = std::cos(u.value());
    const double cycle[4] = {c0, -s0, -c0, s0};
    double fac = 1.0;
    for (int m = 0; m <= K; ++m) {
        series[m] = cycle[m % 4] / fac;
        fac *= (m + 1);
    }
    return u.compose(series, K + 1);
}

Jet atan(const Jet& u) {
    // Differentiating (1+u^2) f' = 1 m times gives, for c_m = f^(m)(u0)/m!,
    //   (1+u0^2)(m+1) c_{m+1} + 2 u0 m c_m + (m-1) c_{m-1} = 0,  m >= 1.
    const int K = u.space().order();
    const double u0 = u.value();
    double series[kJetMaxOrder + 1];
    const double q = 1.0 + u0 * u0;
    series[0] = std::atan(u0);
    if (K >= 1) series[1] = 1.0 / q;
    for (int m = 1; m < K; ++m)
        series[m + 1] = (-2.0 * u0 * m * series[m] - (m - 1) * series[m - 1]) / (q * (m + 1));
    return u.compose(series, K + 1);
}

Jet pow_int(const Jet& u, int k) {
    Jet r(u.space(), 1.0);
    for (int i = 0; i < k; ++i) r = r * u;
    return r;
}

}  // namespace ffl
