#include "fracdiff/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/special.hpp"

namespace fracdiff {

namespace {

constexpr int kMinPanelNodes = 4;
const cplx kTwoPiI(0.0, 2.0 * std::numbers::pi);

double truncation_radius(double theta, double delta, double t_min, double tol, int growth) {
  const double decay = t_min * std::abs(std::cos(theta));
  const double log_tol = std::log(tol);
  double R = -log_tol / decay;
  // e^{-decay R} R^g <= tol  <=>  R = (g ln R - ln tol) / decay, iterated.
  for (int it = 0; it < 100 && growth > 0; ++it) {
    const double next = (growth * std::log(std::max(R, 1.0)) - log_tol) / decay;
    if (std::abs(next - R) <= 1e-12 * R) {
      R = next;
      break;
    }
    R = next;
  }
  return std::max(R, 2.0 * delta);
}

}  // namespace

ContourQuadrature::ContourQuadrature(ContourParams params, double ray_end,
                                     std::vector<ContourNode> upper_arc,
                                     std::vector<ContourNode> upper_ray, bool has_real_node)
    : params_(params), ray_end_(ray_end), arc_upper_count_(upper_arc.size()),
      has_real_node_(has_real_node) {
  stored_ = std::move(upper_arc);
  stored_.insert(stored_.end(), upper_ray.begin(), upper_ray.end());
}

double ContourQuadrature::multiplicity(std::size_t stored_index) const noexcept {
  return (has_real_node_ && stored_index == 0) ? 1.0 : 2.0;
}

std::size_t ContourQuadrature::size() const noexcept {
  return 2 * stored_.size() - (has_real_node_ ? 1 : 0);
}

std::vector<ContourNode> ContourQuadrature::nodes() const {
  std::vector<ContourNode> all;
  all.reserve(size());
  // Lower half: mirror of the stored list in reverse (ray inward, then arc
  // from -theta up towards 0).
  for (std::size_t i = stored_.size(); i-- > 0;) {
    if (has_real_node_ && i == 0) break;
    all.push_back({std::conj(stored_[i].p), std::conj(stored_[i].w)});
  }
  all.insert(all.end(), stored_.begin(), stored_.end());
  return all;
}

ContourQuadrature build_contour(const ContourParams& params, double t_min, double tol, int growth_order) {
  const double pi = std::numbers::pi;
  if (!(params.theta > 0.5 * pi && params.theta < pi)) {
    throw parameter_error("build_contour: theta must lie in (pi/2, pi)");
  }
  if (!(params.delta > 0.0)) throw parameter_error("build_contour: delta must be positive");
  if (params.nodes_per_ray < 2 || params.nodes_arc < 2) {
    throw parameter_error("build_contour: node counts must be >= 2");
  }
  if (!(t_min > 0.0)) throw parameter_error("build_contour: t_min must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw parameter_error("build_contour: tol must lie in (0, 1)");
  if (growth_order < 0) throw parameter_error("build_contour: negative growth order");

  const double theta = params.theta, delta = params.delta;
  const double R = truncation_radius(theta, delta, t_min, tol, growth_order);

  // Arc: p = delta e^{i b}, dp = i p db, w = p db / (2 pi).
  std::vector<ContourNode> arc;
  const auto lobatto = gauss_lobatto(params.nodes_arc, -theta, theta);
  bool has_real_node = false;
  for (int i = 0; i < params.nodes_arc; ++i) {
    const double b = lobatto.nodes[i];
    if (b < 0.0) continue;
    if (b == 0.0) has_real_node = true;
    const cplx p = std::polar(delta, b);
    arc.push_back({p, cplx(0.0, 1.0) * p * lobatto.weights[i] / kTwoPiI});
  }
  if (has_real_node) arc.front().p = cplx(delta, 0.0);
  // Upper endpoint exactly on the ray start.
  arc.back().p = std::polar(delta, theta);

  // Upper ray: p = s e^{i theta}, dp = e^{i theta} ds, graded panels.
  const double span_log2 = std::log2(R / delta);
  int panels = std::max(1, static_cast<int>(std::ceil(span_log2 - 1e-12)));
  panels = std::min(panels, std::max(1, params.nodes_per_ray / kMinPanelNodes));
  const double ratio = std::pow(R / delta, 1.0 / panels);
  const cplx direction = std::polar(1.0, theta);
  std::vector<ContourNode> ray;
  ray.reserve(static_cast<std::size_t>(params.nodes_per_ray));
  double a = delta;
  for (int k = 0; k < panels; ++k) {
    const double b = (k + 1 == panels) ? R : a * ratio;
    const int count = params.nodes_per_ray / panels + (k < params.nodes_per_ray % panels ? 1 : 0);
    const auto gl = gauss_legendre(count, a, b);
    for (int i = 0; i < count; ++i) {
      ray.push_back({gl.nodes[i] * direction, direction * gl.weights[i] / kTwoPiI});
    }
    a = b;
  }
  return ContourQuadrature(params, R, std::move(arc), std::move(ray), has_real_node);
}

cplx inverse_laplace_scalar(const std::function<cplx(cplx)>& f, double t, const ContourQuadrature& q) {
  cplx sum = 0.0;
  for (const auto& node : q.nodes()) sum += node.w * std::exp(t * node.p) * f(node.p);
  return sum;
}

ContourParams auto_params(double t_min, double t_max, double tol) {
  if (!(t_min > 0.0)) throw parameter_error("auto_params: t_min must be positive");
  if (!(t_max >= t_min)) throw parameter_error("auto_params: t_max must be >= t_min");
  if (!(tol > 0.0 && tol < 1.0)) throw parameter_error("auto_params: tol must lie in (0, 1)");
  const double log_tol = std::log(1.0 / tol);
  const double spread = std::log(t_max / t_min + std::numbers::e);
  ContourParams params;
  params.theta = 0.75 * std::numbers::pi;
  params.delta = std::min(1.0, 1.0 / t_max);
  params.nodes_per_ray = std::max(8, static_cast<int>(std::ceil(kRayNodeFactor * log_tol * spread)));
  int arc = std::max(8, static_cast<int>(std::ceil(kArcNodeFactor * log_tol)));
  params.nodes_arc = arc + (arc % 2);
  return params;
}

}  // namespace fracdiff
