#include "ffl/metric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ffl {
namespace {

const std::map<std::string, Family>& family_table() {
  static const std::map<std::string, Family> t = {
      {"euclidean", Family::euclidean},
      {"flat", Family::euclidean},
      {"riemannian_torus", Family::riemannian_torus},
      {"torus", Family::riemannian_torus},
      {"round_sphere", Family::round_sphere},
      {"sphere", Family::round_sphere},
      {"randers", Family::randers},
      {"conformal_perturbation", Family::conformal_perturbation},
      {"conformal", Family::conformal_perturbation},
  };
  return t;
}

Family family_from_name(const std::string& s) {
  auto it = family_table().find(s);
  if (it == family_table().end()) throw UnknownFamily("unknown metric family '" + s + "'");
  return it->second;
}

Chart chart_from_name(const std::string& s) {
  if (s == "periodic_box") return Chart::periodic_box;
  if (s == "sphere_polar") return Chart::sphere_polar;
  throw ConfigError("unknown chart '" + s + "'");
}

// Parameter names each family accepts (beyond the implicit defaults).
std::vector<std::string> allowed_params(Family f, int dim) {
  switch (f) {
    case Family::euclidean:
      return {};
    case Family::riemannian_torus:
      return dim == 3 ? std::vector<std::string>{"amplitude", "amplitude2", "amplitude3"}
                      : std::vector<std::string>{"amplitude", "amplitude2"};
    case Family::round_sphere:
      return {"radius"};
    case Family::randers:
      return dim == 3 ? std::vector<std::string>{"b1", "b2", "b3", "amplitude"}
                      : std::vector<std::string>{"b1", "b2", "amplitude"};
    case Family::conformal_perturbation:
      return {"amplitude", "epsilon"};
  }
  return {};
}

// Canonical parameter name for the shorthand key aliases.
std::string canonical_param(const std::string& key) {
  if (key == "r") return "radius";
  if (key == "b") return "b1";
  if (key == "a" || key == "amp") return "amplitude";
  if (key == "a2" || key == "amp2") return "amplitude2";
  if (key == "a3" || key == "amp3") return "amplitude3";
  if (key == "eps") return "epsilon";
  return key;
}

std::vector<Jet> coordinate_jets(const JetSpace& sp, const double* val, const int* vi, int n) {
  std::vector<Jet> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back(vi && vi[i] >= 0 ? Jet::variable(sp, vi[i], val[i]) : Jet::constant(sp, val[i]));
  }
  return out;
}

Jet sum_of_squares(const std::vector<Jet>& y) {
  Jet q = y[0] * y[0];
  for (size_t i = 1; i < y.size(); ++i) q = q + y[i] * y[i];
  return q;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::euclidean: return "euclidean";
    case Family::riemannian_torus: return "riemannian_torus";
    case Family::round_sphere: return "round_sphere";
    case Family::randers: return "randers";
    case Family::conformal_perturbation: return "conformal_perturbation";
  }
  return "?";
}

const char* chart_name(Chart c) {
  return c == Chart::periodic_box ? "periodic_box" : "sphere_polar";
}

MetricSpec parse_spec_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("metric spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("metric spec must be a JSON object");
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k != "family" && k != "dim" && k != "params" && k != "chart") {
      throw ConfigError("unknown field '" + k + "' in metric spec");
    }
  }
  if (!j.contains("family") || !j["family"].is_string()) {
    throw ConfigError("metric spec needs a string field 'family'");
  }
  if (!j.contains("dim") || !j["dim"].is_number_integer()) {
    throw ConfigError("metric spec needs an integer field 'dim'");
  }
  MetricSpec spec;
  spec.family = family_from_name(j["family"].get<std::string>());
  spec.dim = j["dim"].get<int>();
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw BadParams("'params' must be an object");
    for (const auto& item : j["params"].items()) {
      if (!item.value().is_number()) {
        throw BadParams("parameter '" + item.key() + "' must be a number");
      }
      spec.params[item.key()] = item.value().get<double>();
    }
  }
  if (j.contains("chart")) {
    if (!j["chart"].is_string()) throw ConfigError("'chart' must be a string");
    spec.chart = chart_from_name(j["chart"].get<std::string>());
  } else {
    spec.chart = spec.family == Family::round_sphere ? Chart::sphere_polar : Chart::periodic_box;
  }
  return spec;
}

MetricSpec parse_spec_string(const std::string& text) {
  std::string s = text;
  // Trim surrounding whitespace so file detection and '{' routing are robust.
  const auto a = s.find_first_not_of(" \t\r\n");
  const auto b = s.find_last_not_of(" \t\r\n");
  s = (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
  if (s.empty()) throw ConfigError("empty metric spec");
  if (s.front() == '{') return parse_spec_json(s);
  {
    std::ifstream in(s);
    if (in.good()) {
      std::ostringstream buf;
      buf << in.rdbuf();
      return parse_spec_json(buf.str());
    }
  }
  MetricSpec spec;
  const auto colon = s.find(':');
  spec.family = family_from_name(s.substr(0, colon));
  if (colon != std::string::npos) {
    std::stringstream rest(s.substr(colon + 1));
    std::string kv;
    while (std::getline(rest, kv, ',')) {
      if (kv.empty()) continue;
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + kv + "'");
      const std::string key = canonical_param(kv.substr(0, eq));
      const std::string val = kv.substr(eq + 1);
      try {
        if (key == "dim") {
          spec.dim = std::stoi(val);
        } else {
          spec.params[key] = std::stod(val);
        }
      } catch (const std::exception&) {
        throw ConfigError("cannot parse value '" + val + "' for '" + key + "'");
      }
    }
  }
  spec.chart = spec.family == Family::round_sphere ? Chart::sphere_polar : Chart::periodic_box;
  return spec;
}

std::string serialize_spec(const MetricSpec& spec) {
  std::ostringstream out;
  out << "{\"family\":\"" << family_name(spec.family) << "\",\"dim\":" << spec.dim
      << ",\"params\":{";
  bool first = true;
  for (const auto& [k, v] : spec.params) {
    if (!first) out << ",";
    first = false;
    out << "\"" << k << "\":" << fmt17(v);
  }
  out << "},\"chart\":\"" << chart_name(spec.chart) << "\"}";
  return out.str();
}

Metric::Metric(MetricSpec spec) : spec_(std::move(spec)) {}

Metric Metric::with_evaluator(MetricSpec spec, JetEvaluator f2) {
  Metric m(std::move(spec));
  m.f2_eval_ = std::move(f2);
  return m;
}

bool Metric::is_riemannian() const {
  if (f2_eval_) return false;  // reconstructions are Finslerian in general
  switch (spec_.family) {
    case Family::euclidean:
    case Family::riemannian_torus:
    case Family::round_sphere:
      return true;
    case Family::randers:
      // Quadratic only when the drift one-form vanishes.
      return param("b1") == 0.0 && param("b2") == 0.0 && param("b3") == 0.0;
    case Family::conformal_perturbation:
      return param("epsilon") == 0.0;
  }
  return false;
}

void Metric::check_chart(const double* x) const {
  if (spec_.chart != Chart::sphere_polar) return;
  constexpr double kMargin = 0.05;
  const double pi = std::acos(-1.0);
  // Polar angles are x^1 .. x^{dim-1}; the last coordinate is azimuthal.
  for (int i = 0; i < spec_.dim - 1; ++i) {
    if (!(x[i] > kMargin && x[i] < pi - kMargin)) {
      throw ChartBoundary("polar angle x^" + std::to_string(i + 1) + " = " + fmt17(x[i]) +
                          " is outside the working patch (0.05, pi - 0.05)");
    }
  }
}

double Metric::param(const std::string& key) const {
  auto it = spec_.params.find(key);
  return it == spec_.params.end() ? 0.0 : it->second;
}

Jet Metric::f2_jet(const JetSpace& sp, const double* xval, const double* yval, const int* xv,
                   const int* yv) const {
  const int n = spec_.dim;
  return f2_of(coordinate_jets(sp, xval, xv, n), coordinate_jets(sp, yval, yv, n));
}

Jet Metric::f2_of(const std::vector<Jet>& x, const std::vector<Jet>& y) const {
  if (f2_eval_) return f2_eval_(x, y);
  const int n = spec_.dim;
  switch (spec_.family) {
    case Family::euclidean: {
      return sum_of_squares(y);
    }
    case Family::riemannian_torus: {
      Jet u = cos(x[0]) * param("amplitude") + cos(x[1]) * param("amplitude2");
      if (n == 3) u = u + cos(x[2]) * param("amplitude3");
      return exp(u * 2.0) * sum_of_squares(y);
    }
    case Family::round_sphere: {
      const double r2 = param("radius") * param("radius");
      Jet s1 = sin(x[0]);
      Jet q = y[0] * y[0] + s1 * s1 * y[1] * y[1];
      if (n == 3) {
        Jet s2 = sin(x[1]);
        q = q + s1 * s1 * s2 * s2 * y[2] * y[2];
      }
      return q * r2;
    }
    case Family::randers: {
      Jet alpha = exp(cos(x[0]) * param("amplitude")) * sqrt(sum_of_squares(y));
      Jet beta = y[0] * param("b1") + y[1] * param("b2");
      if (n == 3) beta = beta + y[2] * param("b3");
      Jet f = alpha + beta;
      return f * f;
    }
    case Family::conformal_perturbation: {
      Jet u = cos(x[0]) * param("amplitude");
      Jet q = sum_of_squares(y);
      Jet y1sq = y[0] * y[0];
      return exp(u * 2.0) * (q + y1sq * y1sq * recip(q) * param("epsilon"));
    }
  }
  throw ConfigError("unhandled family");
}

double Metric::f2(const double* x, const double* y) const {
  const JetSpace& sp = JetSpace::get(1, 0);
  return f2_jet(sp, x, y, nullptr, nullptr).value();
}

Metric build_metric(const MetricSpec& spec_in) {
  MetricSpec spec = spec_in;
  if (spec.dim != 2 && spec.dim != 3) {
    throw BadParams("dim must be 2 or 3, got " + std::to_string(spec.dim));
  }
  const Chart expected =
      spec.family == Family::round_sphere ? Chart::sphere_polar : Chart::periodic_box;
  if (spec.chart != expected) {
    throw ConfigError(std::string("family '") + family_name(spec.family) + "' uses chart '" +
                      chart_name(expected) + "'");
  }
  const std::vector<std::string> allowed = allowed_params(spec.family, spec.dim);
  for (const auto& [k, v] : spec.params) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw BadParams("family '" + std::string(family_name(spec.family)) +
                      "' does not take parameter '" + k + "'");
    }
    if (!std::isfinite(v)) throw BadParams("parameter '" + k + "' must be finite");
  }
  if (spec.family == Family::round_sphere) {
    if (!spec.params.count("radius")) spec.params["radius"] = 1.0;
    if (!(spec.params["radius"] > 0.0)) throw BadParams("radius must be positive");
  }
  if (spec.family == Family::conformal_perturbation && spec.params.count("epsilon") &&
      spec.params["epsilon"] < 0.0) {
    throw BadParams("epsilon must be nonnegative");
  }
  return Metric(std::move(spec));
}

ValidationReport validate_metric(const Metric& metric) {
  const int n = metric.dim();
  std::vector<std::vector<double>> xs;
  if (metric.spec().chart == Chart::sphere_polar) {
    for (double p : {0.3, 1.2, 2.5}) {
      for (double az : {0.7, 4.0}) {
        if (n == 2) {
          xs.push_back({p, az});
        } else {
          xs.push_back({p, 1.1, az});
          xs.push_back({p, 2.0, az});
        }
      }
    }
  } else {
    xs = {{0.0, 0.0}, {1.1, 2.3}, {3.9, 5.2}, {2.7, 0.4}};
    if (n == 3) {
      for (auto& x : xs) x.push_back(1.9);
      xs.push_back({5.5, 0.2, 4.4});
    }
  }

  // Directions: both signs of every axis (a Finsler norm need not be
  // reversible, so degeneracy can hide on the negative side), diagonals,
  // and a fixed batch of seeded random unit vectors.
  std::vector<std::vector<double>> ys;
  for (int i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) {
      std::vector<double> y(n, 0.0);
      y[i] = s;
      ys.push_back(y);
    }
  }
  ys.push_back(n == 2 ? std::vector<double>{1.0, 1.0} : std::vector<double>{1.0, 1.0, 1.0});
  ys.push_back(n == 2 ? std::vector<double>{-1.0, 1.0} : std::vector<double>{-1.0, 1.0, -1.0});
  Rng rng(12345);
  for (int k = 0; k < 12; ++k) {
    std::vector<double> y(n);
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      y[i] = rng.uniform(-1.0, 1.0);
      norm += y[i] * y[i];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-3) continue;
    for (int i = 0; i < n; ++i) y[i] /= norm;
    ys.push_back(y);
  }

  const JetSpace& sp = JetSpace::get(n, 2);
  std::vector<int> xv(n, -1), yv(n);
  for (int i = 0; i < n; ++i) yv[i] = i;

  ValidationReport rep;
  rep.min_eig_g = std::numeric_limits<double>::infinity();
  rep.max_eig_g = 0.0;
  std::vector<int> alpha(n, 0);
  for (const auto& x : xs) {
    metric.check_chart(x.data());
    for (const auto& y : ys) {
      const Jet f2 = metric.f2_jet(sp, x.data(), y.data(), xv.data(), yv.data());
      const double F2 = f2.value();
      if (!(F2 > 0.0) || !std::isfinite(F2)) {
        throw DegenerateMetric("F^2 = " + fmt17(F2) + " is not positive at a sample point");
      }
      MatXd g(n, n);
      double euler1 = -2.0 * F2;  // accumulates y^i dF2/dy^i - 2 F^2
      for (int i = 0; i < n; ++i) {
        std::fill(alpha.begin(), alpha.end(), 0);
        alpha[i] = 1;
        const int idx = sp.index_of(alpha.data());
        euler1 += y[i] * f2.raw(idx) * sp.factorial_of(idx);
        for (int j = i; j < n; ++j) {
          alpha[j] += 1;
          const int idx2 = sp.index_of(alpha.data());
          g(i, j) = g(j, i) = 0.5 * f2.raw(idx2) * sp.factorial_of(idx2);
          alpha[j] -= 1;
        }
      }
      double gyy = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gyy += g(i, j) * y[i] * y[j];
      rep.max_euler_residual = std::max(rep.max_euler_residual, std::abs(euler1));
      rep.max_gyy_diff = std::max(rep.max_gyy_diff, std::abs(gyy - F2));
      Eigen::SelfAdjointEigenSolver<MatXd> eig(g);
      const double lo = eig.eigenvalues().minCoeff();
      const double hi = eig.eigenvalues().maxCoeff();
      rep.min_eig_g = std::min(rep.min_eig_g, lo);
      rep.max_eig_g = std::max(rep.max_eig_g, hi);
      if (!(lo > 1e-10 * hi)) {
        throw DegenerateMetric("fundamental tensor degenerate: eigenvalues [" + fmt17(lo) + ", " +
                               fmt17(hi) + "] at y = (" + fmt17(y[0]) + ", ...)");
      }
      ++rep.samples;
    }
  }
  return rep;
}

}  // namespace ffl
