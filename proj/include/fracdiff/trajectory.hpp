#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracdiff/types.hpp"

namespace fracdiff {

struct TrajectoryDiagnostics {
  double imaginary_remainder = 0.0;
  double conjugation_probe = 0.0;
  double max_probe_residual = 0.0;
  double window_t_min = 0.0;
  double window_t_max = 0.0;
  std::size_t contour_nodes = 0;
  std::size_t stored_nodes = 0;
  std::vector<std::pair<std::string, double>> stage_seconds;
};

/// Time primitives the solution is assembled from:
///   u = d/dt smooth_primitive + sum_j d^{k_j + 2}/dt^{k_j + 2} atom_primitives[j],
/// with smooth_primitive(t) = int_0^t (S_0 u0 + regular convolution) and
/// atom_primitives[j](t) = int_0^{t - t_j} (t - t_j - s) S_1(s) f_j ds. Both
/// vanish at t = 0 and are a power of t smoother than u at the singular
/// times, so residual checks move the derivatives onto test functions.
struct TrajectoryParts {
  std::vector<Vec> smooth_primitive;
  std::vector<std::vector<Vec>> atom_primitives;  // [atom][time]
};

/// Solution snapshots u(t_i, .). u is zero for t <= 0 by convention; the
/// right limit at t = 0 is `initial`.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> values;
  Vec initial;
  std::optional<TrajectoryParts> parts;
  TrajectoryDiagnostics diagnostics;
  std::string mesh_id;
  std::string kernel_id;

  std::size_t size() const noexcept { return times.size(); }
};

}  // namespace fracdiff
