#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "fracdiff/contour.hpp"
#include "fracdiff/kernels.hpp"
#include "fracdiff/spatial.hpp"
#include "fracdiff/trajectory.hpp"
#include "fracdiff/types.hpp"

namespace fracdiff {

inline constexpr int kDefaultMaxDerivative = 4;
/// Negative orders are repeated running integrals in time.
inline constexpr int kMinDerivative = -2;

struct CacheDiagnostics {
  std::size_t stored_nodes = 0;
  std::vector<cplx> failed_nodes;
  /// |solve(conj p, conj r) - conj(solve(p, r))| / |solve(p, r)| at the
  /// first ray node, using a separate factorization at conj p.
  double conjugation_probe = 0.0;
  /// Largest relative residual of a probe solve over all stored nodes.
  double max_probe_residual = 0.0;
};

/// Per-node symbols K^(p_k, .) and factorizations of A + p_k diag K^(p_k, .)
/// for the stored (upper-half) contour nodes. Immutable once built.
class PropagatorCache {
 public:
  static PropagatorCache build(const ContourQuadrature& q, const KernelSpec& spec,
                               const StiffnessOperator& op, unsigned workers = 1,
                               int k_max = kDefaultMaxDerivative);

  const ContourQuadrature& contour() const noexcept { return *contour_; }
  const KernelSpec& kernel() const noexcept { return *kernel_; }
  const StiffnessOperator& op() const noexcept { return *op_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  std::size_t node_count() const noexcept { return op_->size(); }
  int k_max() const noexcept { return k_max_; }
  unsigned workers() const noexcept { return workers_; }

  const CVec& symbol(std::size_t i) const { return symbols_.at(i); }
  const ResolventFactorization& factorization(std::size_t i) const { return factors_.at(i); }
  const CacheDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  PropagatorCache() = default;

  std::shared_ptr<const ContourQuadrature> contour_;
  std::shared_ptr<const KernelSpec> kernel_;
  std::shared_ptr<const StiffnessOperator> op_;
  std::vector<CVec> symbols_;
  std::vector<ResolventFactorization> factors_;
  CacheDiagnostics diagnostics_;
  int k_max_ = kDefaultMaxDerivative;
  unsigned workers_ = 1;
};

/// Resolvent images x_k = (A + p_k K^_k)^{-1} K^_k^{1-j} psi at every stored
/// node; evaluating S_j(t) psi afterwards costs no further solves.
class PreparedResponse {
 public:
  PreparedResponse(const PropagatorCache& cache, int j, const Vec& psi);

  /// d^k/dt^k S_j(t) psi for k in [kMinDerivative, k_max]; k = -1 is the
  /// running integral int_0^t S_j(s) psi ds, k = -2 integrates once more.
  /// Exactly zero for t <= 0.
  Vec evaluate(double t, int k) const;

  /// sum_k mult_k Re(w_k c(k, p_k) x_k) for caller-supplied coefficients
  /// c; a node whose coefficient is exactly zero is skipped.
  Vec combine(const std::function<cplx(std::size_t, cplx)>& coefficient) const;

  /// Largest |Im| of the real-axis node term at (t, k), relative to 1 + |result|.
  double imaginary_remainder(double t, int k) const;

  bool is_zero() const noexcept { return zero_; }
  int j() const noexcept { return j_; }

 private:
  const PropagatorCache* cache_;
  int j_;
  bool zero_ = false;
  std::vector<CVec> images_;
};

/// d^k/dt^k S_j(t) psi, j in {0, 1}.
Vec apply_S(const PropagatorCache& cache, int j, double t, const Vec& psi, int k = 0);

/// Rows S_0(t_i) u0; times must be increasing.
Trajectory apply_S0_trajectory(const PropagatorCache& cache, const std::vector<double>& times,
                                     const Vec& u0);

}  // namespace fracdiff
