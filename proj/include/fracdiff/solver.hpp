#pragma once

#include <optional>
#include <vector>

#include "fracdiff/contour.hpp"
#include "fracdiff/kernels.hpp"
#include "fracdiff/propagator.hpp"
#include "fracdiff/sources.hpp"
#include "fracdiff/spatial.hpp"
#include "fracdiff/trajectory.hpp"

namespace fracdiff {

struct ContourSettings {
  double tol = 1e-8;
  /// Explicit theta, delta and node counts; auto_params otherwise.
  std::optional<ContourParams> params;
  /// Time window override; derived from the requested times otherwise.
  std::optional<double> t_min;
  std::optional<double> t_max;
};

/// Fully resolved problem data (all fields at interior grid nodes).
struct SolverConfig {
  DomainSpec domain;
  int n = 0;
  TensorField a;
  Vec q;
  std::optional<KernelSpec> kernel;
  ContourSettings contour;
  int k_max = kDefaultMaxDerivative;
  unsigned threads = 0;  // 0: hardware concurrency (FRACDIFF_THREADS overrides)
  bool deterministic = true;
  bool keep_parts = false;
};

/// Smallest window the contour is built for, relative to t_max.
inline constexpr double kWindowFloor = 1e-10;

struct TimeWindow {
  double t_min = 0.0;
  double t_max = 0.0;
};

/// Window covering every positive lag the Duhamel sum needs at `times`.
TimeWindow required_window(const std::vector<double>& times, const SourceTerm& F);

/// validate -> mesh -> assemble -> contour -> cache -> Duhamel sum at every
/// time. Errors carry the stage they come from.
Trajectory solve_trajectory(const SolverConfig& config, const std::vector<double>& times, const Vec& u0,
                            const SourceTerm& F);

/// Same pipeline on an already assembled operator and kernel.
Trajectory solve_trajectory(const KernelSpec& kernel, const StiffnessOperator& op, const ContourSettings& contour,
                            const std::vector<double>& times, const Vec& u0, const SourceTerm& F,
                            unsigned workers, int k_max = kDefaultMaxDerivative, bool keep_parts = false);

}  // namespace fracdiff
