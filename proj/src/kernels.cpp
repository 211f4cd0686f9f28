#include "fracdiff/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/special.hpp"

namespace fracdiff {

const char* to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::VariableOrder: return "variable_order";
    case KernelFamily::Distributed: return "distributed";
    case KernelFamily::MultiTerm: return "multi_term";
  }
  return "unknown";
}

KernelSpec::KernelSpec(Variant v, std::size_t nodes) : kernel_(std::move(v)), node_count_(nodes) {
  build_alpha_rule();
}

KernelSpec KernelSpec::variable_order(Vec alpha) {
  const auto n = static_cast<std::size_t>(alpha.size());
  if (n == 0) throw input_error("variable-order kernel: empty alpha field");
  return KernelSpec(VariableOrderKernel{std::move(alpha)}, n);
}

KernelSpec KernelSpec::distributed(DistributedKernel kernel, std::size_t node_count) {
  if (kernel.mu.size() < 2) throw input_error("distributed kernel: mu needs at least two samples");
  if (kernel.quadrature_nodes < 2) throw parameter_error("distributed kernel: quadrature_nodes < 2");
  if (node_count == 0) throw input_error("distributed kernel: zero nodes");
  return KernelSpec(std::move(kernel), node_count);
}

KernelSpec KernelSpec::multi_term(MultiTermKernel kernel) {
  if (kernel.terms.empty()) throw input_error("multi-term kernel: no terms");
  const auto n = static_cast<std::size_t>(kernel.terms.front().rho.size());
  if (n == 0) throw input_error("multi-term kernel: empty rho field");
  for (const auto& term : kernel.terms) {
    if (static_cast<std::size_t>(term.rho.size()) != n) {
      throw input_error("multi-term kernel: rho fields differ in length");
    }
  }
  return KernelSpec(std::move(kernel), n);
}

KernelSpec KernelSpec::constant_order(double beta, std::size_t node_count) {
  MultiTermKernel k;
  k.terms.push_back({beta, Vec::Ones(static_cast<Eigen::Index>(node_count))});
  return multi_term(std::move(k));
}

KernelFamily KernelSpec::family() const noexcept {
  switch (kernel_.index()) {
    case 0: return KernelFamily::VariableOrder;
    case 1: return KernelFamily::Distributed;
    default: return KernelFamily::MultiTerm;
  }
}

const VariableOrderKernel* KernelSpec::as_variable_order() const {
  return std::get_if<VariableOrderKernel>(&kernel_);
}
const DistributedKernel* KernelSpec::as_distributed() const {
  return std::get_if<DistributedKernel>(&kernel_);
}
const MultiTermKernel* KernelSpec::as_multi_term() const {
  return std::get_if<MultiTermKernel>(&kernel_);
}

double KernelSpec::mu_at(double alpha) const {
  const auto* d = as_distributed();
  if (!d) throw unsupported_error("mu_at: kernel is not distributed-order");
  if (alpha <= 0.0) return d->mu.front();
  if (alpha >= 1.0) return d->mu.back();
  const double intervals = double(d->mu.size() - 1);
  const double x = alpha * intervals;
  const auto i = std::min(static_cast<std::size_t>(x), d->mu.size() - 2);
  const double frac = x - double(i);
  return (1.0 - frac) * d->mu[i] + frac * d->mu[i + 1];
}

void KernelSpec::build_alpha_rule() {
  alpha_nodes_.clear();
  alpha_weights_.clear();
  const auto* d = as_distributed();
  if (!d) return;
  // mu is linear on each sample interval, so panels follow the samples.
  const std::size_t intervals = d->mu.size() - 1;
  const int per_panel = std::max<int>(
      2, static_cast<int>((d->quadrature_nodes + intervals - 1) / intervals));
  for (std::size_t i = 0; i < intervals; ++i) {
    const double a = double(i) / double(intervals);
    const double b = double(i + 1) / double(intervals);
    const auto rule = gauss_legendre(per_panel, a, b);
    for (int q = 0; q < per_panel; ++q) {
      alpha_nodes_.push_back(rule.nodes[q]);
      alpha_weights_.push_back(rule.weights[q] * mu_at(rule.nodes[q]));
    }
  }
}

bool KernelSpec::spatially_uniform() const {
  if (const auto* v = as_variable_order()) {
    return (v->alpha.array() == v->alpha(0)).all();
  }
  if (const auto* m = as_multi_term()) {
    return std::all_of(m->terms.begin(), m->terms.end(),
                       [](const auto& t) { return (t.rho.array() == t.rho(0)).all(); });
  }
  return true;
}

KernelSpec KernelSpec::with_alpha_nodes(int nodes) const {
  const auto* d = as_distributed();
  if (!d) return *this;
  DistributedKernel copy = *d;
  copy.quadrature_nodes = nodes;
  return distributed(std::move(copy), node_count_);
}

namespace {

void check_node(const KernelSpec& spec, std::size_t node) {
  if (node >= spec.node_count()) {
    std::ostringstream os;
    os << "kernel: node " << node << " out of range (" << spec.node_count() << " nodes)";
    throw index_error(os.str());
  }
}

double power_kernel(double alpha, double t) {
  return std::pow(t, -alpha) * reciprocal_gamma(1.0 - alpha);
}

cplx power_symbol(double alpha, cplx log_p) { return std::exp((alpha - 1.0) * log_p); }

void check_off_cut(cplx p) {
  if (p == cplx(0.0, 0.0)) throw domain_error("kernel_laplace: p = 0");
  if (p.imag() == 0.0 && p.real() < 0.0) throw domain_error("kernel_laplace: p on the branch cut");
}

}  // namespace

double kernel_value(const KernelSpec& spec, double t, std::size_t node) {
  if (!(t > 0.0)) throw domain_error("kernel_value: t must be positive");
  check_node(spec, node);
  if (const auto* v = spec.as_variable_order()) return power_kernel(v->alpha(node), t);
  if (const auto* m = spec.as_multi_term()) {
    double sum = 0.0;
    for (const auto& term : m->terms) sum += term.rho(node) * power_kernel(term.alpha, t);
    return sum;
  }
  double sum = 0.0;
  const auto& a = spec.alpha_nodes();
  const auto& w = spec.alpha_weights();
  for (std::size_t q = 0; q < a.size(); ++q) sum += w[q] * power_kernel(a[q], t);
  return sum;
}

cplx kernel_laplace(const KernelSpec& spec, cplx p, std::size_t node) {
  check_off_cut(p);
  check_node(spec, node);
  const cplx log_p = std::log(p);
  if (const auto* v = spec.as_variable_order()) return power_symbol(v->alpha(node), log_p);
  if (const auto* m = spec.as_multi_term()) {
    cplx sum = 0.0;
    for (const auto& term : m->terms) sum += term.rho(node) * power_symbol(term.alpha, log_p);
    return sum;
  }
  cplx sum = 0.0;
  const auto& a = spec.alpha_nodes();
  const auto& w = spec.alpha_weights();
  for (std::size_t q = 0; q < a.size(); ++q) sum += w[q] * power_symbol(a[q], log_p);
  return sum;
}

CVec kernel_laplace_field(const KernelSpec& spec, cplx p) {
  check_off_cut(p);
  const auto n = static_cast<Eigen::Index>(spec.node_count());
  const cplx log_p = std::log(p);
  CVec out(n);
  if (const auto* v = spec.as_variable_order()) {
    for (Eigen::Index i = 0; i < n; ++i) out(i) = power_symbol(v->alpha(i), log_p);
  } else if (const auto* m = spec.as_multi_term()) {
    out.setZero();
    for (const auto& term : m->terms) {
      out += term.rho.cast<cplx>() * power_symbol(term.alpha, log_p);
    }
  } else {
    out.setConstant(kernel_laplace(spec, p, 0));
  }
  return out;
}

KernelDiagnostics validate_kernel(const KernelSpec& spec) {
  KernelDiagnostics diag;
  auto fail = [&](std::string msg) {
    diag.ok = false;
    diag.violations.push_back(std::move(msg));
  };
  std::ostringstream os;

  if (const auto* v = spec.as_variable_order()) {
    if (!v->alpha.allFinite()) {
      fail("variable-order admissibility: non-finite alpha");
      return diag;
    }
    diag.alpha_min = v->alpha.minCoeff();
    diag.alpha_max = v->alpha.maxCoeff();
    if (!(diag.alpha_min > 0.0)) {
      os << "variable-order admissibility: alpha_0 = " << diag.alpha_min << " must be > 0";
      fail(os.str());
      os.str("");
    }
    if (!(diag.alpha_max < 1.0)) {
      os << "variable-order admissibility: alpha_M = " << diag.alpha_max << " must be < 1";
      fail(os.str());
      os.str("");
    }
    if (!(diag.alpha_max < 2.0 * diag.alpha_min)) {
      os << "variable-order admissibility: alpha_M = " << diag.alpha_max
         << " must be < 2*alpha_0 = " << 2.0 * diag.alpha_min;
      fail(os.str());
    }
    return diag;
  }

  if (const auto* d = spec.as_distributed()) {
    const auto [lo, hi] = std::minmax_element(d->mu.begin(), d->mu.end());
    diag.rho_min = *lo;
    diag.rho_max = *hi;
    diag.alpha_min = d->alpha0;
    diag.alpha_max = d->alpha0;
    for (std::size_t i = 0; i < d->mu.size(); ++i) {
      if (d->mu[i] > 0.0) diag.alpha_max = std::max(diag.alpha_max, double(i) / double(d->mu.size() - 1));
    }
    if (!std::all_of(d->mu.begin(), d->mu.end(), [](double m) { return std::isfinite(m) && m >= 0.0; })) {
      fail("distributed-order admissibility: mu must be finite and non-negative");
    }
    if (!(d->alpha0 > 0.0 && d->alpha0 < 1.0)) {
      os << "distributed-order admissibility: alpha_0 = " << d->alpha0 << " must lie in (0,1)";
      fail(os.str());
      return diag;
    }
    if (!(d->epsilon > 0.0 && d->epsilon < d->alpha0)) {
      os << "distributed-order admissibility: epsilon = " << d->epsilon << " must lie in (0, alpha_0)";
      fail(os.str());
      return diag;
    }
    const double peak = spec.mu_at(d->alpha0);
    if (!(peak > 0.0)) {
      os << "distributed-order admissibility: mu(alpha_0) = " << peak << " must be > 0";
      fail(os.str());
      return diag;
    }
    // mu is piecewise linear: its minimum over the window is attained at the
    // window's left end or at an interior sample.
    const double left = d->alpha0 - d->epsilon;
    double window_min = spec.mu_at(left);
    const double intervals = double(d->mu.size() - 1);
    for (std::size_t i = 0; i < d->mu.size(); ++i) {
      const double a = double(i) / intervals;
      if (a > left && a < d->alpha0) window_min = std::min(window_min, d->mu[i]);
    }
    if (window_min < 0.5 * peak) {
      os << "distributed-order admissibility: mu drops to " << window_min
         << " < mu(alpha_0)/2 = " << 0.5 * peak << " on (alpha_0 - epsilon, alpha_0)";
      fail(os.str());
    }
    return diag;
  }

  const auto* m = spec.as_multi_term();
  diag.alpha_min = m->terms.front().alpha;
  diag.alpha_max = m->terms.back().alpha;
  diag.rho_min = m->terms.front().rho.minCoeff();
  diag.rho_max = m->terms.front().rho.maxCoeff();
  for (std::size_t j = 0; j < m->terms.size(); ++j) {
    const auto& term = m->terms[j];
    if (!(term.alpha > 0.0 && term.alpha < 1.0)) {
      os << "multi-term admissibility: alpha_" << j + 1 << " = " << term.alpha << " must lie in (0,1)";
      fail(os.str());
      os.str("");
    }
    if (j > 0 && !(term.alpha > m->terms[j - 1].alpha)) {
      os << "multi-term admissibility: orders must be strictly increasing (alpha_" << j + 1 << ")";
      fail(os.str());
      os.str("");
    }
    if (!term.rho.allFinite()) {
      fail("multi-term admissibility: non-finite rho");
      continue;
    }
    diag.rho_min = std::min(diag.rho_min, term.rho.minCoeff());
    diag.rho_max = std::max(diag.rho_max, term.rho.maxCoeff());
  }
  const double lower = m->declared_lower.value_or(diag.rho_min);
  const double upper = m->declared_upper.value_or(diag.rho_max);
  if (!(lower > 0.0) || !(diag.rho_min > 0.0)) {
    os << "multi-term admissibility: rho must satisfy 0 < c0 <= rho_j(x); min rho = " << diag.rho_min
       << ", c0 = " << lower;
    fail(os.str());
    os.str("");
  } else if (diag.rho_min < lower) {
    os << "multi-term admissibility: min rho = " << diag.rho_min << " below declared c0 = " << lower;
    fail(os.str());
    os.str("");
  }
  if (diag.rho_max > upper || !std::isfinite(upper)) {
    os << "multi-term admissibility: max rho = " << diag.rho_max << " above declared C0 = " << upper;
    fail(os.str());
  }
  return diag;
}

namespace {

// Product-integration weights for the kernel s^{-alpha}/Gamma(1-alpha) on a
// uniform grid of step h. For lag m >= 1 (cell [t_n - m h, t_n - (m-1) h]):
//   far[m]  multiplies the sample at the far end of the cell,
//   near[m] multiplies the sample at the near end.
struct LagWeights {
  std::vector<double> far;
  std::vector<double> near;
};

LagWeights power_law_lag_weights(double alpha, double h, std::size_t lags) {
  LagWeights w;
  w.far.assign(lags + 1, 0.0);
  w.near.assign(lags + 1, 0.0);
  const double a = 1.0 - alpha;
  const double scale = std::pow(h, a) * reciprocal_gamma(a);
  static const QuadratureRule unit = gauss_legendre(8, 0.0, 1.0);
  for (std::size_t m = 1; m <= lags; ++m) {
    const double md = double(m);
    double far = 0.0, near = 0.0;
    if (m <= 4) {
      // int_{m-1}^{m} s^{-alpha} ds and int s^{1-alpha} ds, closed form.
      const double f1 = (std::pow(md, a) - std::pow(md - 1.0, a)) / a;
      const double f2 = (std::pow(md, a + 1.0) - std::pow(md - 1.0, a + 1.0)) / (a + 1.0);
      far = f2 - (md - 1.0) * f1;
      near = md * f1 - f2;
    } else {
      // Smooth integrand (singularity at distance m-1): 8-point Gauss.
      for (std::size_t q = 0; q < unit.nodes.size(); ++q) {
        const double u = unit.nodes[q];
        const double k = std::pow(md - 1.0 + u, -alpha) * unit.weights[q];
        far += k * u;
        near += k * (1.0 - u);
      }
    }
    w.far[m] = scale * far;
    w.near[m] = scale * near;
  }
  return w;
}

void accumulate(LagWeights& into, const LagWeights& w, double factor) {
  for (std::size_t m = 0; m < into.far.size(); ++m) {
    into.far[m] += factor * w.far[m];
    into.near[m] += factor * w.near[m];
  }
}

}  // namespace

std::vector<Vec> apply_IK(const KernelSpec& spec, std::span<const double> times,
                          std::span<const Vec> values) {
  if (times.size() != values.size()) throw input_error("apply_IK: times/values length mismatch");
  if (times.empty()) return {};
  const std::size_t nt = times.size();
  const auto nodes = static_cast<Eigen::Index>(spec.node_count());
  for (const auto& v : values) {
    if (v.size() != nodes) throw input_error("apply_IK: sample length differs from kernel node count");
  }
  std::vector<Vec> out(nt, Vec::Zero(nodes));
  if (nt == 1) return out;

  const double horizon = times.back() - times.front();
  const double h = horizon / double(nt - 1);
  if (std::abs(times.front()) > 1e-12 * std::max(1.0, horizon) || !(h > 0.0)) {
    throw unsupported_error("apply_IK: grid must start at t = 0 and increase");
  }
  for (std::size_t i = 0; i < nt; ++i) {
    if (std::abs(times[i] - double(i) * h) > 1e-9 * std::max(h, horizon)) {
      throw unsupported_error("apply_IK: non-uniform time grid");
    }
  }
  const std::size_t lags = nt - 1;

  // Per-node combined weights; nodes sharing coefficients share one table.
  std::vector<LagWeights> tables;
  std::vector<std::size_t> table_of(static_cast<std::size_t>(nodes), 0);
  auto empty_table = [&] { return LagWeights{std::vector<double>(lags + 1, 0.0), std::vector<double>(lags + 1, 0.0)}; };

  if (const auto* v = spec.as_variable_order()) {
    std::map<double, std::size_t> by_alpha;
    for (Eigen::Index i = 0; i < nodes; ++i) {
      auto [it, inserted] = by_alpha.try_emplace(v->alpha(i), tables.size());
      if (inserted) tables.push_back(power_law_lag_weights(v->alpha(i), h, lags));
      table_of[static_cast<std::size_t>(i)] = it->second;
    }
  } else if (const auto* m = spec.as_multi_term()) {
    std::vector<LagWeights> per_term;
    for (const auto& term : m->terms) per_term.push_back(power_law_lag_weights(term.alpha, h, lags));
    std::map<std::vector<double>, std::size_t> by_coeffs;
    for (Eigen::Index i = 0; i < nodes; ++i) {
      std::vector<double> key;
      for (const auto& term : m->terms) key.push_back(term.rho(i));
      auto [it, inserted] = by_coeffs.try_emplace(key, tables.size());
      if (inserted) {
        auto table = empty_table();
        for (std::size_t j = 0; j < per_term.size(); ++j) accumulate(table, per_term[j], key[j]);
        tables.push_back(std::move(table));
      }
      table_of[static_cast<std::size_t>(i)] = it->second;
    }
  } else {
    auto table = empty_table();
    const auto& a = spec.alpha_nodes();
    const auto& w = spec.alpha_weights();
    for (std::size_t q = 0; q < a.size(); ++q) accumulate(table, power_law_lag_weights(a[q], h, lags), w[q]);
    tables.push_back(std::move(table));
  }

  Eigen::MatrixXd series(static_cast<Eigen::Index>(nt), nodes);
  for (std::size_t i = 0; i < nt; ++i) series.row(static_cast<Eigen::Index>(i)) = values[i].transpose();

  for (Eigen::Index node = 0; node < nodes; ++node) {
    const auto& table = tables[table_of[static_cast<std::size_t>(node)]];
    const auto g = series.col(node);
    for (std::size_t n = 1; n < nt; ++n) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t lag = n - j;
        acc += table.far[lag] * g(static_cast<Eigen::Index>(j)) + table.near[lag] * g(static_cast<Eigen::Index>(j + 1));
      }
      out[n](node) = acc;
    }
  }
  return out;
}

}  // namespace fracdiff
