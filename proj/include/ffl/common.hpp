#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ffl {

using Vec2d = Eigen::Matrix<double, 2, 1>;
using Mat2d = Eigen::Matrix<double, 2, 2>;
using VecXd = Eigen::VectorXd;
using MatXd = Eigen::MatrixXd;

// Error taxonomy shared across modules.  The CLI maps these onto its exit
// codes; library code always throws, never exits.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownFamily : ConfigError {
    using ConfigError::ConfigError;
};
struct BadParams : ConfigError {
    using ConfigError::ConfigError;
};
struct DegenerateMetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ChartBoundary : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotOrthogonal : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotRiemannian : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValenceUnsupported : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PoleReached : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonPositive : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotApplicable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Raised by flow stepping when the run must stop early; carries the last
// time for which the state was still valid.
struct Extinction : std::runtime_error {
    double last_valid_t;
    Extinction(const std::string& msg, double t)
        : std::runtime_error(msg), last_valid_t(t) {}
};
struct CFLViolation : std::runtime_error {
    double last_valid_t;
    CFLViolation(const std::string& msg, double t)
        : std::runtime_error(msg), last_valid_t(t) {}
};
struct Degeneration : std::runtime_error {
    double last_valid_t;
    Degeneration(const std::string& msg, double t)
        : std::runtime_error(msg), last_valid_t(t) {}
};

// Dense little tensors indexed (i,j,k) / (h,k,i,j); all dims equal n.
struct Tensor3 {
    int n = 0;
    std::vector<double> a;
    Tensor3() = default;
    explicit Tensor3(int n_) : n(n_), a(static_cast<size_t>(n_) * n_ * n_, 0.0) {}
    double& operator()(int i, int j, int k) { return a[(static_cast<size_t>(i) * n + j) * n + k]; }
    double operator()(int i, int j, int k) const { return a[(static_cast<size_t>(i) * n + j) * n + k]; }
};
struct Tensor4 {
    int n = 0;
    std::vector<double> a;
    Tensor4() = default;
    explicit Tensor4(int n_) : n(n_), a(static_cast<size_t>(n_) * n_ * n_ * n_, 0.0) {}
    double& operator()(int h, int k, int i, int j) {
        return a[((static_cast<size_t>(h) * n + k) * n + i) * n + j];
    }
    double operator()(int h, int k, int i, int j) const {
        return a[((static_cast<size_t>(h) * n + k) * n + i) * n + j];
    }
};

// Round-trip-safe formatting used for every CSV/JSON number we emit, so that
// identical configs produce byte-identical reports.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Deterministic uniform doubles: fixed mapping from the top 53 bits of a
// mersenne draw, independent of any libstdc++ distribution internals.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

// Worker cap honoured by all parallel loops; FFL_THREADS overrides the
// hardware count.  Loop results are written by index, so the schedule never
// changes the output.
int worker_count();
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace ffl
