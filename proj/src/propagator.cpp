#include "fracdiff/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/parallel.hpp"

namespace fracdiff {

namespace {

cplx int_power(cplx p, int k) {
  if (k < 0) return 1.0 / int_power(p, -k);
  cplx r = 1.0;
  for (int i = 0; i < k; ++i) r *= p;
  return r;
}

CVec probe_vector(std::size_t n) {
  CVec r(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = 1.0 + 0.5 * std::sin(double(i + 1));
  return r;
}

}  // namespace

PropagatorCache PropagatorCache::build(const ContourQuadrature& q, const KernelSpec& spec,
                                       const StiffnessOperator& op, unsigned workers, int k_max) {
  if (spec.node_count() != op.size()) {
    throw input_error("build_cache: kernel node count does not match the operator size");
  }
  if (k_max < 0) throw parameter_error("build_cache: k_max must be >= 0");
  PropagatorCache cache;
  cache.contour_ = std::make_shared<const ContourQuadrature>(q);
  cache.kernel_ = std::make_shared<const KernelSpec>(spec);
  cache.op_ = std::make_shared<const StiffnessOperator>(op);
  cache.k_max_ = k_max;
  cache.workers_ = std::max(1u, workers);

  const auto& nodes = q.stored();
  const std::size_t count = nodes.size();
  std::vector<CVec> symbols(count);
  std::vector<std::optional<ResolventFactorization>> factors(count);
  std::vector<double> residuals(count, 0.0);
  std::vector<char> failed(count, 0);
  const CVec r = probe_vector(op.size());

  parallel_for(count, cache.workers_, [&](std::size_t i) {
    const cplx p = nodes[i].p;
    symbols[i] = kernel_laplace_field(spec, p);
    try {
      factors[i].emplace(*cache.op_, p * symbols[i]);
      const CVec x = factors[i]->solve(r);
      residuals[i] = (factors[i]->multiply(x) - r).norm() / r.norm();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
      failed[i] = 1;
    }
  });

  for (std::size_t i = 0; i < count; ++i) {
    if (failed[i]) cache.diagnostics_.failed_nodes.push_back(nodes[i].p);
  }
  if (!cache.diagnostics_.failed_nodes.empty()) {
    std::ostringstream os;
    os << "contour admissibility: resolvent A + p K^(p) is singular at " << cache.diagnostics_.failed_nodes.size()
       << " contour node(s):";
    for (const auto& p : cache.diagnostics_.failed_nodes) os << ' ' << p;
    throw admissibility_error(os.str());
  }

  cache.symbols_ = std::move(symbols);
  cache.factors_.reserve(count);
  for (auto& f : factors) cache.factors_.push_back(std::move(*f));
  cache.diagnostics_.stored_nodes = count;
  cache.diagnostics_.max_probe_residual = *std::max_element(residuals.begin(), residuals.end());

  // Conjugation probe on a node off the real axis.
  const std::size_t probe = count - 1;
  const cplx pc = std::conj(nodes[probe].p);
  const ResolventFactorization lower(*cache.op_, pc * kernel_laplace_field(spec, pc));
  const CVec x = cache.factors_[probe].solve(r);
  const CVec y = lower.solve(r.conjugate());
  cache.diagnostics_.conjugation_probe = (y - x.conjugate()).norm() / std::max(x.norm(), 1e-300);
  return cache;
}

PreparedResponse::PreparedResponse(const PropagatorCache& cache, int j, const Vec& psi)
    : cache_(&cache), j_(j) {
  if (j != 0 && j != 1) throw parameter_error("apply_S: j must be 0 or 1");
  if (static_cast<std::size_t>(psi.size()) != cache.node_count()) {
    throw input_error("apply_S: psi has wrong length");
  }
  if (!psi.allFinite()) throw input_error("apply_S: psi is not finite");
  zero_ = (psi.array() == 0.0).all();
  if (zero_) return;
  images_.resize(cache.size());
  const CVec base = psi.cast<cplx>();
  parallel_for(cache.size(), cache.workers(), [&](std::size_t i) {
    const CVec rhs = j == 0 ? CVec(cache.symbol(i).cwiseProduct(base)) : base;
    images_[i] = cache.factorization(i).solve(rhs);
  });
}

Vec PreparedResponse::combine(const std::function<cplx(std::size_t, cplx)>& coefficient) const {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(cache_->node_count()));
  if (zero_) return out;
  const auto& q = cache_->contour();
  const auto& nodes = q.stored();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const cplx c = coefficient(i, nodes[i].p);
    if (c == cplx(0.0)) continue;
    const cplx wc = nodes[i].w * c;
    out += q.multiplicity(i) * (wc * images_[i]).real();
  }
  return out;
}

Vec PreparedResponse::evaluate(double t, int k) const {
  if (k < kMinDerivative || k > cache_->k_max()) {
    std::ostringstream os;
    os << "apply_S: derivative order " << k << " outside [" << kMinDerivative << ", " << cache_->k_max() << "]";
    throw parameter_error(os.str());
  }
  if (!(t > 0.0) || zero_) return Vec::Zero(static_cast<Eigen::Index>(cache_->node_count()));
  return combine([t, k](std::size_t, cplx p) { return std::exp(t * p) * int_power(p, k); });
}

double PreparedResponse::imaginary_remainder(double t, int k) const {
  if (!(t > 0.0) || zero_) return 0.0;
  const auto& q = cache_->contour();
  if (q.multiplicity(0) != 1.0) return 0.0;
  const auto& node = q.stored()[0];
  const CVec term = (node.w * std::exp(t * node.p) * int_power(node.p, k)) * images_[0];
  const Vec full = evaluate(t, k);
  return term.imag().cwiseAbs().maxCoeff() / (1.0 + full.cwiseAbs().maxCoeff());
}

Vec apply_S(const PropagatorCache& cache, int j, double t, const Vec& psi, int k) {
  if (k < kMinDerivative || k > cache.k_max()) {
    std::ostringstream os;
    os << "apply_S: derivative order " << k << " outside [" << kMinDerivative << ", " << cache.k_max() << "]";
    throw parameter_error(os.str());
  }
  if (j != 0 && j != 1) throw parameter_error("apply_S: j must be 0 or 1");
  if (!(t > 0.0)) return Vec::Zero(static_cast<Eigen::Index>(cache.node_count()));
  return PreparedResponse(cache, j, psi).evaluate(t, k);
}

Trajectory apply_S0_trajectory(const PropagatorCache& cache, const std::vector<double>& times, const Vec& u0) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw input_error("apply_S0_trajectory: times must be increasing");
  }
  Trajectory traj;
  traj.times = times;
  traj.initial = u0;
  traj.values.resize(times.size());
  const PreparedResponse response(cache, 0, u0);
  parallel_for(times.size(), cache.workers(), [&](std::size_t i) { traj.values[i] = response.evaluate(times[i], 0); });
  for (double t : times) {
    traj.diagnostics.imaginary_remainder =
        std::max(traj.diagnostics.imaginary_remainder, response.imaginary_remainder(t, 0));
  }
  traj.diagnostics.conjugation_probe = cache.diagnostics().conjugation_probe;
  traj.diagnostics.max_probe_residual = cache.diagnostics().max_probe_residual;
  traj.diagnostics.contour_nodes = cache.contour().size();
  traj.diagnostics.stored_nodes = cache.size();
  return traj;
}

}  // namespace fracdiff
