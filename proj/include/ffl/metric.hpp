#pragma once

// Analytic Finsler metric families.  Each family evaluates F^2(x, y) through
// the jet arithmetic in jet.hpp, so every downstream quantity (fundamental
// tensor, spray, curvature) is obtained by exact Taylor-coefficient reads
// rather than finite differencing.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ffl/common.hpp"
#include "ffl/jet.hpp"

namespace ffl {

enum class Family {
  euclidean,
  riemannian_torus,
  round_sphere,
  randers,
  conformal_perturbation,
};

enum class Chart {
  periodic_box,
  sphere_polar,
};

const char* family_name(Family f);
const char* chart_name(Chart c);

struct MetricSpec {
  Family family = Family::euclidean;
  int dim = 2;
  std::map<std::string, double> params;
  Chart chart = Chart::periodic_box;
};

// Strict JSON reader: the top level accepts exactly the keys "family",
// "dim", "params", "chart" ("params"/"chart" may be omitted); unknown keys
// anywhere raise ConfigError, unknown parameter names raise BadParams.
MetricSpec parse_spec_json(const std::string& text);

// Compact command-line form "family:key=val,key=val" with family aliases
// (sphere, torus, conformal, flat) and parameter aliases (r, b, a, amp,
// eps, dim).  A string starting with '{' is routed to the JSON reader, and
// a string naming a readable file is loaded first.
MetricSpec parse_spec_string(const std::string& text);

// Canonical serialization: fixed key order, parameters sorted by name,
// doubles printed with 17 significant digits so parse -> serialize is an
// exact round trip.
std::string serialize_spec(const MetricSpec& spec);

struct ValidationReport {
  double max_euler_residual = 0.0;  // max |y^i dF2/dy^i - 2 F^2| over samples
  double max_gyy_diff = 0.0;        // max |g_ij y^i y^j - F^2| over samples
  double min_eig_g = 0.0;           // smallest eigenvalue of g seen
  double max_eig_g = 0.0;           // largest eigenvalue of g seen
  int samples = 0;
};

class Metric {
 public:
  using JetEvaluator = std::function<Jet(const std::vector<Jet>&, const std::vector<Jet>&)>;

  explicit Metric(MetricSpec spec);

  // A metric backed by a custom F^2 evaluator instead of a family formula
  // (grid reconstructions); `spec` records provenance, dim and chart.
  static Metric with_evaluator(MetricSpec spec, JetEvaluator f2);
  bool is_reconstruction() const { return static_cast<bool>(f2_eval_); }

  const MetricSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  Family family() const { return spec_.family; }

  // True when F^2 is quadratic in y (so the metric is a classical
  // Riemannian metric independent of direction).
  bool is_riemannian() const;

  // Throws ChartBoundary when x leaves the valid coordinate patch
  // (polar angles within 0.05 of 0 or pi on the sphere chart).
  void check_chart(const double* x) const;

  // F^2 as a jet in `space`.  xv[i] / yv[i] give the jet variable index
  // carrying x^i / y^i, or -1 when that coordinate stays constant; the
  // base point is (xval, yval).
  Jet f2_jet(const JetSpace& space, const double* xval, const double* yval,
             const int* xv, const int* yv) const;

  // F^2 evaluated on arbitrary jet arguments (all in one space), e.g. for
  // seeds that depend nonlinearly on a fiber angle.
  Jet f2_of(const std::vector<Jet>& x, const std::vector<Jet>& y) const;

  double f2(const double* x, const double* y) const;
  double param(const std::string& key) const;  // 0.0 when absent

 private:
  MetricSpec spec_;
  JetEvaluator f2_eval_;
};

// Validates the spec (family/dim/params/chart consistency) and probes the
// fundamental tensor on a deterministic sample set; throws DegenerateMetric
// if min eig g < 1e-10 * max eig g anywhere or F^2 <= 0 along a sample ray.
Metric build_metric(const MetricSpec& spec);

ValidationReport validate_metric(const Metric& metric);

}  // namespace ffl
