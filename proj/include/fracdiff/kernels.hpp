#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fracdiff/types.hpp"

namespace fracdiff {

enum class KernelFamily { VariableOrder, Distributed, MultiTerm };

const char* to_string(KernelFamily family) noexcept;

/// K(t,x) = t^{-alpha(x)} / Gamma(1 - alpha(x)), alpha given per grid node.
struct VariableOrderKernel {
  Vec alpha;
};

/// K(t) = int_0^1 mu(a) t^{-a} / Gamma(1 - a) da. mu is sampled on the
/// uniform grid a_i = i / (samples - 1) and linearly interpolated; the
/// concentration window (alpha0, epsilon) is declared, not inferred.
struct DistributedKernel {
  std::vector<double> mu;
  double alpha0 = 0.5;
  double epsilon = 0.1;
  int quadrature_nodes = 64;
};

struct MultiTermComponent {
  double alpha = 0.5;
  Vec rho;
};

/// K(t,x) = sum_j rho_j(x) t^{-alpha_j} / Gamma(1 - alpha_j).
struct MultiTermKernel {
  std::vector<MultiTermComponent> terms;
  std::optional<double> declared_lower;  // c0
  std::optional<double> declared_upper;  // C0
};

/// Memory kernel of one of the three admissible families, with its spatial
/// coefficient data stored at the interior grid nodes. Immutable.
class KernelSpec {
 public:
  static KernelSpec variable_order(Vec alpha);
  static KernelSpec distributed(DistributedKernel kernel, std::size_t node_count);
  static KernelSpec multi_term(MultiTermKernel kernel);
  /// Constant order beta: a single term with rho = 1.
  static KernelSpec constant_order(double beta, std::size_t node_count);

  KernelFamily family() const noexcept;
  std::size_t node_count() const noexcept { return node_count_; }

  const VariableOrderKernel* as_variable_order() const;
  const DistributedKernel* as_distributed() const;
  const MultiTermKernel* as_multi_term() const;

  /// Linear interpolation of the distributed weight (Distributed only).
  double mu_at(double alpha) const;

  /// Nodes/weights of the alpha-quadrature, weights already multiplied by mu.
  const std::vector<double>& alpha_nodes() const noexcept { return alpha_nodes_; }
  const std::vector<double>& alpha_weights() const noexcept { return alpha_weights_; }

  /// True when K does not depend on x.
  bool spatially_uniform() const;

  /// Rebuild the distributed alpha rule with a different node budget.
  KernelSpec with_alpha_nodes(int nodes) const;

 private:
  using Variant = std::variant<VariableOrderKernel, DistributedKernel, MultiTermKernel>;
  KernelSpec(Variant v, std::size_t nodes);
  void build_alpha_rule();

  Variant kernel_;
  std::size_t node_count_ = 0;
  std::vector<double> alpha_nodes_;
  std::vector<double> alpha_weights_;
};

struct KernelDiagnostics {
  bool ok = true;
  std::vector<std::string> violations;
  double alpha_min = 0.0;  // alpha_0 (variable order), smallest order (multi-term)
  double alpha_max = 0.0;  // alpha_M
  double rho_min = 0.0;    // extracted c0
  double rho_max = 0.0;    // extracted C0
};

/// K(t, x_node) for t > 0.
double kernel_value(const KernelSpec& spec, double t, std::size_t node);

/// Laplace symbol K^(p, x_node), principal branch, p off (-inf, 0].
cplx kernel_laplace(const KernelSpec& spec, cplx p, std::size_t node);

/// K^(p, .) at every node.
CVec kernel_laplace_field(const KernelSpec& spec, cplx p);

/// Checks every family invariant; never throws.
KernelDiagnostics validate_kernel(const KernelSpec& spec);

/// (I_K g)(t_n) = int_0^{t_n} K(t_n - s) g(s) ds on a uniform grid starting
/// at 0, by product integration: g linear per cell, power-law moments exact.
/// `values[i]` is the nodal vector g(times[i]).
std::vector<Vec> apply_IK(const KernelSpec& spec, std::span<const double> times,
                          std::span<const Vec> values);

}  // namespace fracdiff
