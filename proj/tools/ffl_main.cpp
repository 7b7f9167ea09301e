// Command-line front end: curvature inspection, flow runs, verification suite.
// Exit codes: 0 ok, 2 configuration, 3 degenerate metric, 4 flow stopped
// (extinction/degeneration, last valid t on stderr), 5 hard check failed.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ffl/flow.hpp"
#include "ffl/geometry.hpp"
#include "ffl/metric.hpp"
#include "ffl/verify.hpp"

namespace {

std::vector<double> parse_point(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ffl::ConfigError(std::string(flag) + ": cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw ffl::ConfigError(std::string(flag) + ": empty coordinate list");
  return out;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ffl::ConfigError("cannot open output file: " + path);
  out << body;
}

int cmd_inspect(const std::string& metric, const std::string& xs, const std::string& ys,
                const std::string& out_path) {
  const ffl::Metric m = ffl::build_metric(ffl::parse_spec_string(metric));
  const std::vector<double> x = parse_point(xs, "--x");
  const std::vector<double> y = parse_point(ys, "--y");
  if (static_cast<int>(x.size()) != m.dim() || static_cast<int>(y.size()) != m.dim()) {
    throw ffl::ConfigError("--x and --y must have " + std::to_string(m.dim()) + " components");
  }
  const ffl::CurvatureReport rep = ffl::curvature_report(m, x.data(), y.data());

  // Flag curvatures of the g-orthogonalised coordinate edges.
  ffl::VecXd yv(m.dim());
  for (int i = 0; i < m.dim(); ++i) yv[i] = y[i];
  const double gyy = yv.dot(rep.g * yv);
  double flag_min = 0.0, flag_max = 0.0;
  bool have_flag = false;
  for (int i = 0; i < m.dim(); ++i) {
    ffl::VecXd V = ffl::VecXd::Zero(m.dim());
    V[i] = 1.0;
    V -= (V.dot(rep.g * yv) / gyy) * yv;
    if (V.dot(rep.g * V) < 1e-12 * gyy) continue;
    const double k = ffl::report_flag(rep, yv, V);
    flag_min = have_flag ? std::min(flag_min, k) : k;
    flag_max = have_flag ? std::max(flag_max, k) : k;
    have_flag = true;
  }

  std::string body = "{\"report\":" + ffl::report_json(rep) + ",\"validation\":{";
  body += "\"strongly_convex\":" + std::string(rep.min_eig_g > 0.0 ? "true" : "false");
  body += ",\"min_eig_g\":" + ffl::fmt17(rep.min_eig_g);
  body += ",\"riemannian\":" + std::string(m.is_riemannian() ? "true" : "false");
  if (have_flag) {
    body += ",\"flag_min\":" + ffl::fmt17(flag_min) + ",\"flag_max\":" + ffl::fmt17(flag_max);
  }
  body += "}}\n";
  if (out_path.empty()) {
    std::cout << body;
  } else {
    write_text(out_path, body);
  }
  return 0;
}

int cmd_flow(const ffl::FlowConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::vector<ffl::MonitorSample> rows;
  auto emit_all = [&](const std::vector<ffl::Snapshot>& snaps) {
    const std::string csv = ffl::monitor_csv(rows);
    if (out_dir.empty()) {
      std::cout << csv;
    } else {
      fs::create_directories(out_dir);
      write_text((fs::path(out_dir) / "monitors.csv").string(), csv);
      for (size_t i = 0; i < snaps.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%03zu.json", i);
        write_text((fs::path(out_dir) / name).string(), ffl::snapshot_json(snaps[i]) + "\n");
      }
    }
  };
  try {
    const ffl::FlowResult res = ffl::run_flow(cfg, [&](const ffl::MonitorSample& m) {
      rows.push_back(m);
    });
    emit_all(res.snapshots);
    return 0;
  } catch (const ffl::Extinction& e) {
    emit_all({});
    std::cerr << "flow stopped: " << e.what() << "; last valid t = " << ffl::fmt17(e.last_valid_t)
              << "\n";
    return 4;
  } catch (const ffl::Degeneration& e) {
    emit_all({});
    std::cerr << "flow stopped: " << e.what() << "; last valid t = " << ffl::fmt17(e.last_valid_t)
              << "\n";
    return 4;
  } catch (const ffl::CFLViolation& e) {
    std::cerr << "flow stopped: " << e.what() << "; last valid t = " << ffl::fmt17(e.last_valid_t)
              << "\n";
    return 4;
  }
}

int cmd_verify(const std::vector<std::string>& only, const std::string& out_path) {
  const ffl::VerifySuiteResult res = ffl::verify_suite(only);
  const std::string body = ffl::verify_report_json(res) + "\n";
  if (out_path.empty()) {
    std::cout << body;
  } else {
    write_text(out_path, body);
  }
  return res.all_hard_checks_pass() ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler Ricci flow laboratory"};
  app.require_subcommand(1);

  std::string metric, xs, ys, out_path, mode = "parametric";
  std::vector<std::string> only;
  ffl::FlowConfig cfg;

  CLI::App* inspect = app.add_subcommand("inspect", "curvature report at one flag");
  inspect->add_option("--metric", metric, "metric spec string or JSON file")->required();
  inspect->add_option("--x", xs, "base point, comma separated")->required();
  inspect->add_option("--y", ys, "fiber direction, comma separated")->required();
  inspect->add_option("--out", out_path, "write JSON here instead of stdout");

  CLI::App* flow = app.add_subcommand("flow", "integrate the flow and stream monitors");
  flow->add_option("--metric", metric, "metric spec string or JSON file")->required();
  flow->add_option("--mode", mode, "parametric or grid");
  flow->add_option("--nx", cfg.nx, "base grid resolution (power of two)");
  flow->add_option("--ntheta", cfg.ntheta, "fiber grid resolution (power of two)");
  flow->add_option("--dt", cfg.dt, "time step");
  flow->add_option("--t-end", cfg.t_end, "final time");
  flow->add_option("--cadence", cfg.cadence, "monitor interval (0: endpoints only)");
  flow->add_option("--seed", cfg.seed, "monitor sample seed");
  flow->add_option("--out", out_path, "directory for monitors.csv and snapshots");

  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("--only", only, "restrict to named checks")->delimiter(',');
  verify->add_option("--out", out_path, "write JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (inspect->parsed()) return cmd_inspect(metric, xs, ys, out_path);
    if (flow->parsed()) {
      cfg.metric = ffl::parse_spec_string(metric);
      if (mode == "parametric") {
        cfg.mode = ffl::FlowMode::parametric;
      } else if (mode == "grid") {
        cfg.mode = ffl::FlowMode::grid;
      } else {
        throw ffl::ConfigError("--mode must be 'parametric' or 'grid', got '" + mode + "'");
      }
      if (cfg.cadence > 0.0 && cfg.cadence < cfg.dt) {
        throw ffl::ConfigError("--cadence must be at least --dt");
      }
      cfg.keep_snapshots = !out_path.empty() && cfg.mode == ffl::FlowMode::grid;
      return cmd_flow(cfg, out_path);
    }
    if (verify->parsed()) return cmd_verify(only, out_path);
  } catch (const ffl::DegenerateMetric& e) {
    std::cerr << "degenerate metric: " << e.what() << "\n";
    return 3;
  } catch (const ffl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
