#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fracdiff/propagator.hpp"
#include "fracdiff/trajectory.hpp"
#include "fracdiff/types.hpp"

namespace fracdiff {

/// delta^{(order)}(t - time) * profile(x)
struct Atom {
  double time = 0.0;
  int order = 0;
  Vec profile;
};

/// F(s, .) sampled at s_n = n dt, n = 0..M-1 (column n of `samples`),
/// linear in time between samples.
struct RegularSource {
  double dt = 0.0;
  Eigen::MatrixXd samples;

  double horizon() const noexcept { return dt * double(samples.cols() - 1); }
  Vec value(double s) const;
};

struct SourceTerm {
  std::vector<Atom> atoms;
  std::optional<RegularSource> regular;

  bool empty() const noexcept { return atoms.empty() && !regular; }
  /// Checks ordering, profile lengths and orders; throws input_error.
  void validate(std::size_t node_count, int k_max) const;
  int max_order() const noexcept;
};

/// Evaluates u(t) = S_0(t) u0 + sum_j d^{k_j} S_1(t - t_j) f_j
///                + int_0^t S_1(t - s) F_reg(s) ds
/// with all resolvent solves done once at construction.
class DuhamelEvaluator {
 public:
  DuhamelEvaluator(const PropagatorCache& cache, const Vec& u0, const SourceTerm& F);

  Vec evaluate(double t) const;
  /// S_0(t) u0 plus the regular-source convolution.
  Vec smooth_part(double t) const;
  /// int_0^t smooth_part(s) ds.
  Vec smooth_primitive(double t) const;
  /// Second running integral of S_1(. - t_j) f_j; zero for t <= t_j.
  Vec atom_primitive(std::size_t atom, double t) const;
  /// Largest real-axis-node imaginary remainder over the pieces at time t.
  double imaginary_remainder(double t) const;

  std::size_t atom_count() const noexcept { return atoms_.size(); }

 private:
  // k = 0: the convolution itself; k = -1: its running integral.
  Vec regular_part(double t, int k) const;

  const PropagatorCache* cache_;
  SourceTerm source_;
  PreparedResponse initial_;
  std::vector<PreparedResponse> atoms_;
  // Regular part as sum_r spatial_r * g_r(s) with g_r piecewise linear.
  std::vector<PreparedResponse> regular_modes_;
  std::vector<Vec> regular_time_profiles_;
};

Vec duhamel_eval(const PropagatorCache& cache, double t, const Vec& u0, const SourceTerm& F);

struct SourceLaplace {
  CVec value;
  double tail_estimate = 0.0;  // bound on |int_T^inf e^{-ps} F_reg(s) ds|
};

/// F^(p) = sum_j p^{k_j} e^{-p t_j} f_j + int_0^T e^{-ps} F_reg(s) ds.
/// Beyond its last sample the regular part is continued by its last value.
SourceLaplace source_laplace(const SourceTerm& F, cplx p, double T, std::size_t node_count);

}  // namespace fracdiff
