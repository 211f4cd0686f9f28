#include "fracdiff/app.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fracdiff/parallel.hpp"
#include "fracdiff/solver.hpp"
#include "fracdiff/suites.hpp"
#include "fracdiff/verify.hpp"

namespace fracdiff {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report_error(std::ostream& log, const Error& e) {
  log << "fracdiff: " << to_string(e.kind()) << " error";
  if (!e.stage().empty()) log << " in stage '" << e.stage() << "'";
  log << ": " << e.what() << '\n';
}

json error_json(const Error& e) {
  return json{{"status", "error"},
              {"kind", to_string(e.kind())},
              {"stage", e.stage()},
              {"message", e.what()},
              {"exit_code", exit_code_for(e.kind())}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw input_error("cannot write " + path).with_stage("output");
  f << j.dump(2) << '\n';
}

void check_admissible(const KernelSpec& spec) {
  const auto diag = validate_kernel(spec);
  if (diag.ok) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < diag.violations.size(); ++i) os << (i ? "; " : "") << diag.violations[i];
  throw admissibility_error(os.str()).with_stage("kernel");
}

RunConfig load_stage(const fs::path& path) {
  try {
    return load_config(path);
  } catch (const Error& e) {
    throw e.with_stage("config");
  }
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Admissibility: return 2;
    case ErrorKind::Numerical: return 3;
    default: return 1;
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const Mesh& mesh) {
  out << (mesh.dimension == 2 ? "t,node,x,y,value\n" : "t,node,x,value\n");
  char buf[160];
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const Vec& v = (t == 0.0 && traj.initial.size()) ? traj.initial : traj.values[i];
    for (std::size_t n = 0; n < mesh.size(); ++n) {
      const auto x = mesh.coordinates(n);
      if (mesh.dimension == 2) {
        std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g\n", t, n, x[0], x[1], v[Eigen::Index(n)]);
      } else {
        std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", t, n, x[0], v[Eigen::Index(n)]);
      }
      out << buf;
    }
  }
}

json oracle_comparison(const RunConfig& rc, const Trajectory& traj) {
  json j{{"applicable", false}};
  const auto beta = constant_order_of(*rc.solver.kernel);
  const auto op = assemble_operator(rc.mesh, rc.solver.a, rc.solver.q);
  if (!beta) {
    j["reason"] = "kernel is not a single power law with unit weight";
  } else if (rc.mesh.dimension != 1 || !op.constant_coefficients()) {
    j["reason"] = "oracle needs a 1D constant-coefficient operator";
  } else if (rc.sources.regular) {
    j["reason"] = "oracle covers atoms only";
  } else {
    j["applicable"] = true;
    j["beta"] = *beta;
    json rows = json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const double t = traj.times[i];
      if (!(t > 0.0)) continue;
      try {
        const Vec ref = constant_order_oracle(*beta, op, rc.u0, rc.sources, t);
        const double err = (traj.values[i] - ref).norm() / std::max(ref.norm(), 1e-300);
        worst = std::max(worst, err);
        rows.push_back({{"t", t}, {"relative_error", err}});
      } catch (const Error& e) {
        rows.push_back({{"t", t}, {"skipped", e.what()}});
      }
    }
    j["times"] = rows;
    j["max_relative_error"] = worst;
  }
  return j;
}

int run_command(const fs::path& config_path, std::ostream& log) {
  const auto t0 = Clock::now();
  std::optional<RunConfig> rc;
  try {
    rc = load_stage(config_path);
    const double t_config = since(t0);
    check_admissible(*rc->solver.kernel);
    if (!rc->output.matrix_market.empty()) {
      std::ofstream mm(rc->output.matrix_market);
      if (!mm) throw input_error("cannot write " + rc->output.matrix_market).with_stage("output");
      write_matrix_market(mm, assemble_operator(rc->mesh, rc->solver.a, rc->solver.q));
    }
    const Trajectory traj = solve_trajectory(rc->solver, rc->output.times, rc->u0, rc->sources);

    const auto t_write = Clock::now();
    if (!rc->output.csv.empty()) {
      std::ofstream csv(rc->output.csv);
      if (!csv) throw input_error("cannot write " + rc->output.csv).with_stage("output");
      write_trajectory_csv(csv, traj, rc->mesh);
    }
    json timings{{"config", t_config}};
    for (const auto& [stage, s] : traj.diagnostics.stage_seconds) timings[stage] = s;
    timings["output"] = since(t_write);
    const auto& d = traj.diagnostics;
    json report{
        {"status", "ok"},
        {"exit_code", 0},
        {"config", rc->resolved},
        {"workers", resolve_workers(rc->solver.threads)},
        {"seed", rc->verification.seed},
        {"diagnostics",
         {{"imaginary_remainder", d.imaginary_remainder},
          {"conjugation_probe", d.conjugation_probe},
          {"max_probe_residual", d.max_probe_residual},
          {"failed_nodes", json::array()},
          {"contour_nodes", d.contour_nodes},
          {"stored_nodes", d.stored_nodes},
          {"window", {d.window_t_min, d.window_t_max}},
          {"mesh", traj.mesh_id},
          {"kernel", traj.kernel_id}}},
    };
    if (rc->verification.oracle) report["oracle_comparison"] = oracle_comparison(*rc, traj);
    timings["total"] = since(t0);
    report["timings"] = timings;
    if (!rc->output.report.empty()) write_json(rc->output.report, report);
    log << "fracdiff: wrote " << traj.times.size() << " snapshots of " << rc->mesh.size() << " nodes";
    if (!rc->output.csv.empty()) log << " to " << rc->output.csv;
    log << '\n';
    return 0;
  } catch (const Error& e) {
    report_error(log, e);
    if (rc && !rc->output.report.empty()) {
      json report = error_json(e);
      report["config"] = rc->resolved;
      try {
        write_json(rc->output.report, report);
      } catch (const Error&) {
      }
    }
    return exit_code_for(e.kind());
  }
}

int verify_command(const std::string& suite, const std::optional<fs::path>& config_path, bool flip_atom_sign,
                   const std::string& report_path, std::ostream& out, std::ostream& log) {
  try {
    const RunConfig rc = config_path ? load_stage(*config_path) : parse_config(benchmark_config());
    const auto checks = run_suite(suite, rc, SuiteOptions{flip_atom_sign});
    bool all = true;
    json list = json::array();
    for (const auto& c : checks) {
      all = all && c.pass;
      list.push_back(to_json(c));
      log << (c.skipped ? "SKIP" : c.pass ? "PASS" : "FAIL") << "  " << c.suite << ": " << c.name << "  value "
          << c.value << " budget " << c.budget;
      if (!c.detail.empty()) log << "  (" << c.detail << ")";
      log << '\n';
    }
    const json report{{"suite", suite},
                      {"pass", all},
                      {"seed", rc.verification.seed},
                      {"flip_atom_sign", flip_atom_sign},
                      {"checks", list},
                      {"config", rc.resolved}};
    if (report_path.empty() || report_path == "-") {
      out << report.dump(2) << '\n';
    } else {
      write_json(report_path, report);
    }
    return all ? 0 : 4;
  } catch (const Error& e) {
    report_error(log, e);
    return exit_code_for(e.kind());
  }
}

int dump_contour_command(const fs::path& config_path, const std::string& out_path, std::ostream& out,
                         std::ostream& log) {
  try {
    const RunConfig rc = load_stage(config_path);
    TimeWindow w = required_window(rc.output.times, rc.sources);
    const auto& cs = rc.solver.contour;
    if (cs.t_min) w.t_min = *cs.t_min;
    if (cs.t_max) w.t_max = *cs.t_max;
    ContourQuadrature q = [&] {
      try {
        if (!(w.t_min > 0.0) || !(w.t_max >= w.t_min)) {
          throw parameter_error("contour window must satisfy 0 < t_min <= t_max");
        }
        const ContourParams p = cs.params ? *cs.params : auto_params(w.t_min, w.t_max, cs.tol);
        return build_contour(p, w.t_min, cs.tol, rc.sources.max_order());
      } catch (const Error& e) {
        throw e.with_stage("contour");
      }
    }();
    std::ofstream file;
    std::ostream* dst = &out;
    if (!out_path.empty() && out_path != "-") {
      file.open(out_path);
      if (!file) throw input_error("cannot write " + out_path).with_stage("output");
      dst = &file;
    }
    *dst << "re,im,w_re,w_im\n";
    char buf[128];
    for (const auto& node : q.nodes()) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", node.p.real(), node.p.imag(), node.w.real(),
                    node.w.imag());
      *dst << buf;
    }
    log << "fracdiff: " << q.size() << " contour nodes, theta " << q.theta() << ", delta " << q.delta() << ", R "
        << q.ray_end() << '\n';
    return 0;
  } catch (const Error& e) {
    report_error(log, e);
    return exit_code_for(e.kind());
  }
}

}  // namespace fracdiff
