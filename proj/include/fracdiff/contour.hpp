#pragma once

#include <functional>
#include <vector>

#include "fracdiff/types.hpp"

namespace fracdiff {

struct ContourParams {
  double theta = 0.0;      // ray angle in (pi/2, pi)
  double delta = 1.0;      // arc radius
  int nodes_per_ray = 32;  // Gauss-Legendre nodes per ray
  int nodes_arc = 16;      // Gauss-Lobatto nodes on the arc
};

/// One quadrature point of the contour: the integral
/// (1/2 pi i) int_gamma e^{tp} f(p) dp is approximated by sum w e^{tp} f(p).
struct ContourNode {
  cplx p;
  cplx w;
};

/// Discretized keyhole contour gamma(delta, theta): the lower ray traversed
/// inward, the arc |p| = delta counterclockwise, the upper ray outward.
///
/// Only the closed upper half (Im p >= 0) is stored; the lower half is
/// implied by p -> conj(p), w -> conj(w). For f with f(conj p) = conj f(p)
/// the full sum is therefore sum_k multiplicity_k * Re(w_k e^{t p_k} f(p_k)),
/// multiplicity 2 for a conjugate pair and 1 for a node on the real axis.
class ContourQuadrature {
 public:
  ContourQuadrature(ContourParams params, double ray_end, std::vector<ContourNode> upper_arc,
                    std::vector<ContourNode> upper_ray, bool has_real_node);

  double theta() const noexcept { return params_.theta; }
  double delta() const noexcept { return params_.delta; }
  double ray_end() const noexcept { return ray_end_; }  // truncation radius R
  const ContourParams& params() const noexcept { return params_; }

  /// Stored upper-half nodes: arc nodes by increasing angle, then the ray
  /// outward. This is the fixed reduction order.
  const std::vector<ContourNode>& stored() const noexcept { return stored_; }
  /// 1 for the real-axis node (if any), 2 otherwise.
  double multiplicity(std::size_t stored_index) const noexcept;

  /// All nodes in counterclockwise order: lower ray, arc, upper ray.
  std::vector<ContourNode> nodes() const;
  std::size_t size() const noexcept;

 private:
  ContourParams params_;
  double ray_end_;
  std::vector<ContourNode> stored_;
  std::size_t arc_upper_count_;
  bool has_real_node_;
};

/// Builds the quadrature. The ray is truncated at R with
/// exp(t_min R cos theta) * max(1, R)^growth_order <= tol, and covered by
/// Gauss-Legendre panels whose lengths grow geometrically (ratio ~2) from
/// delta; the arc uses Gauss-Lobatto in the angle so that both arc
/// endpoints delta e^{+-i theta} are nodes.
ContourQuadrature build_contour(const ContourParams& params, double t_min, double tol,
                                int growth_order = 0);

inline ContourQuadrature build_contour(double theta, double delta, int nodes_per_ray, int nodes_arc,
                                       double t_min, double tol, int growth_order = 0) {
  return build_contour(ContourParams{theta, delta, nodes_per_ray, nodes_arc}, t_min, tol, growth_order);
}

/// sum_k w_k e^{t p_k} f(p_k) over the full node set.
cplx inverse_laplace_scalar(const std::function<cplx(cplx)>& f, double t, const ContourQuadrature& q);

/// Default parameters for a time window [t_min, t_max]: theta = 3 pi / 4,
/// delta = min(1, 1/t_max), node counts growing with log(1/tol) and
/// log(t_max/t_min + e).
ContourParams auto_params(double t_min, double t_max, double tol);

/// Calibration constants of auto_params.
inline constexpr double kRayNodeFactor = 1.6;
inline constexpr double kArcNodeFactor = 1.2;

}  // namespace fracdiff
