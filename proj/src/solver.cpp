#include "fracdiff/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/parallel.hpp"

namespace fracdiff {

namespace {

class StageClock {
 public:
  explicit StageClock(TrajectoryDiagnostics& diag) : diag_(diag) {}
  template <class F>
  auto run(const char* stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        record(stage, start);
      } else {
        auto result = body();
        record(stage, start);
        return result;
      }
    } catch (const Error& e) {
      throw e.with_stage(stage);
    }
  }

 private:
  void record(const char* stage, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
    diag_.stage_seconds.emplace_back(stage, d.count());
  }
  TrajectoryDiagnostics& diag_;
};

}  // namespace

TimeWindow required_window(const std::vector<double>& times, const SourceTerm& F) {
  TimeWindow w;
  w.t_min = std::numeric_limits<double>::infinity();
  auto take = [&](double tau) {
    if (tau > 0.0) w.t_min = std::min(w.t_min, tau);
  };
  for (double t : times) {
    w.t_max = std::max(w.t_max, t);
    take(t);
    for (const auto& a : F.atoms) take(t - a.time);
    if (F.regular && t > 0.0) {
      // Distance to the last sample time strictly before t.
      const double dt = F.regular->dt;
      double s = std::floor(t / dt) * dt;
      if (!(s < t)) s -= dt;
      if (s > 0.0) take(t - s);
    }
  }
  if (!(w.t_max > 0.0)) return {1.0, 1.0};
  w.t_min = std::max(w.t_min, kWindowFloor * w.t_max);
  return w;
}

Trajectory solve_trajectory(const KernelSpec& kernel, const StiffnessOperator& op, const ContourSettings& contour,
                            const std::vector<double>& times, const Vec& u0, const SourceTerm& F, unsigned workers,
                            int k_max, bool keep_parts) {
  Trajectory traj;
  StageClock clock(traj.diagnostics);
  clock.run("input", [&] {
    if (static_cast<std::size_t>(u0.size()) != op.size()) throw input_error("initial data has the wrong length");
    if (!u0.allFinite()) throw input_error("initial data is not finite");
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) throw input_error("output times must be increasing");
    }
    F.validate(op.size(), k_max);
    if (F.regular && !times.empty() && times.back() > F.regular->horizon() * (1.0 + 1e-12)) {
      throw input_error("regular source horizon is shorter than the last output time");
    }
  });
  clock.run("kernel", [&] {
    const auto diag = validate_kernel(kernel);
    if (!diag.ok) {
      std::ostringstream os;
      for (std::size_t i = 0; i < diag.violations.size(); ++i) os << (i ? "; " : "") << diag.violations[i];
      throw admissibility_error(os.str());
    }
    if (kernel.node_count() != op.size()) throw input_error("kernel fields do not match the mesh");
  });

  TimeWindow window = required_window(times, F);
  if (contour.t_min) window.t_min = *contour.t_min;
  if (contour.t_max) window.t_max = *contour.t_max;
  traj.diagnostics.window_t_min = window.t_min;
  traj.diagnostics.window_t_max = window.t_max;

  const auto q = clock.run("contour", [&] {
    if (!(window.t_min > 0.0) || !(window.t_max >= window.t_min)) {
      throw parameter_error("contour window must satisfy 0 < t_min <= t_max");
    }
    const ContourParams params = contour.params ? *contour.params : auto_params(window.t_min, window.t_max, contour.tol);
    return build_contour(params, window.t_min, contour.tol, F.max_order());
  });
  const auto cache = clock.run("cache", [&] { return PropagatorCache::build(q, kernel, op, workers, k_max); });

  clock.run("duhamel", [&] {
    const DuhamelEvaluator eval(cache, u0, F);
    const std::size_t nt = times.size();
    traj.times = times;
    traj.initial = u0;
    traj.values.assign(nt, Vec());
    std::vector<double> remainder(nt, 0.0);
    if (keep_parts) {
      TrajectoryParts parts;
      parts.smooth_primitive.assign(nt, Vec());
      parts.atom_primitives.assign(F.atoms.size(), std::vector<Vec>(nt));
      traj.parts = std::move(parts);
    }
    parallel_for(nt, cache.workers(), [&](std::size_t i) {
      const double t = times[i];
      traj.values[i] = eval.evaluate(t);
      remainder[i] = eval.imaginary_remainder(t);
      if (keep_parts) {
        traj.parts->smooth_primitive[i] = eval.smooth_primitive(t);
        for (std::size_t j = 0; j < F.atoms.size(); ++j) traj.parts->atom_primitives[j][i] = eval.atom_primitive(j, t);
      }
    });
    for (double r : remainder) traj.diagnostics.imaginary_remainder = std::max(traj.diagnostics.imaginary_remainder, r);
  });
  traj.diagnostics.conjugation_probe = cache.diagnostics().conjugation_probe;
  traj.diagnostics.max_probe_residual = cache.diagnostics().max_probe_residual;
  traj.diagnostics.contour_nodes = q.size();
  traj.diagnostics.stored_nodes = cache.size();
  traj.kernel_id = to_string(kernel.family());
  return traj;
}

Trajectory solve_trajectory(const SolverConfig& config, const std::vector<double>& times, const Vec& u0,
                            const SourceTerm& F) {
  if (!config.kernel) throw config_error("solver config has no kernel").with_stage("kernel");
  const auto diag = validate_kernel(*config.kernel);
  if (!diag.ok) {
    std::ostringstream os;
    for (std::size_t i = 0; i < diag.violations.size(); ++i) os << (i ? "; " : "") << diag.violations[i];
    throw admissibility_error(os.str()).with_stage("kernel");
  }
  Mesh mesh;
  try {
    mesh = build_mesh(config.domain, config.n);
  } catch (const Error& e) {
    throw e.with_stage("mesh");
  }
  std::optional<StiffnessOperator> op;
  try {
    op.emplace(assemble_operator(mesh, config.a, config.q));
  } catch (const Error& e) {
    throw e.with_stage("assemble");
  }
  Trajectory traj = solve_trajectory(*config.kernel, *op, config.contour, times, u0, F,
                                     resolve_workers(config.threads), config.k_max, config.keep_parts);
  std::ostringstream id;
  id << config.domain.dimension << "d-n" << config.n;
  traj.mesh_id = id.str();
  return traj;
}

}  // namespace fracdiff
