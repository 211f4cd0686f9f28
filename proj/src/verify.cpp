#include "fracdiff/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fracdiff/error.hpp"
#include "fracdiff/special.hpp"

namespace fracdiff {

namespace {

constexpr int kMaxSeriesTerms = 20000;
constexpr double kMaxPeakLog10 = 80.0;

bool is_pole(double x) { return x <= 0.0 && x == std::floor(x); }

// log10 of the largest |z^n / Gamma(beta n + gamma)| and the index where it occurs.
std::pair<double, int> series_peak(double beta, double gamma, double z) {
  const double lz = std::log(std::abs(z));
  double best = -std::numeric_limits<double>::infinity();
  int at = 0;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    const double arg = beta * n + gamma;
    if (is_pole(arg)) continue;
    const double lt = n * lz - std::lgamma(arg);
    if (lt > best) {
      best = lt;
      at = n;
    }
    if (arg > 2.0 && lt < best - 50.0) break;
  }
  return {best / std::log(10.0), at};
}

template <unsigned Digits>
double ml_series(double beta, double gamma, double z, int n_peak) {
  using mp = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<Digits>,
                                           boost::multiprecision::et_off>;
  const mp b = beta, g = gamma, zz = z;
  auto rgamma = [](const mp& x) -> mp {
    const double xd = static_cast<double>(x);
    if (is_pole(xd) && x == mp(xd)) return mp(0);
    return 1 / boost::math::tgamma(x);
  };
  // Gamma(x + 1) = x Gamma(x) links terms m = 1/beta apart when that is exact.
  const double m_real = 1.0 / beta;
  const int m = static_cast<int>(std::lround(m_real));
  const bool shift = gamma > 0.0 && m >= 1 && double(m) * beta == 1.0;
  std::vector<mp> rg;
  if (shift) rg.reserve(1024);

  mp sum = 0, power = 1;
  const mp eps = mp(1e-17);
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    mp r;
    if (shift) {
      r = n < m ? rgamma(b * n + g) : rg[n - m] / (b * (n - m) + g);
      rg.push_back(r);
    } else {
      r = rgamma(b * n + g);
    }
    const mp term = power * r;
    sum += term;
    if (n >= n_peak + 2 && abs(term) <= eps * abs(sum)) return static_cast<double>(sum);
    power *= zz;
  }
  throw numerical_error("mittag_leffler: series did not converge");
}

}  // namespace

double mittag_leffler(double beta, double gamma, double z) {
  if (!(beta > 0.0 && beta <= 1.0)) throw parameter_error("mittag_leffler: beta must lie in (0, 1]");
  if (!std::isfinite(gamma)) throw parameter_error("mittag_leffler: gamma must be finite");
  if (!(z <= 0.0)) throw parameter_error("mittag_leffler: z must be real and <= 0");
  if (z < -10.0) {
    std::ostringstream os;
    os << "mittag_leffler: |z| = " << -z << " outside the validated series range |z| <= 10";
    throw out_of_range_error(os.str());
  }
  if (z == 0.0) return reciprocal_gamma(gamma);
  const auto [peak, at] = series_peak(beta, gamma, z);
  if (peak > kMaxPeakLog10) {
    std::ostringstream os;
    os << "mittag_leffler: series terms reach 1e" << std::lround(peak) << " (beta = " << beta << ", z = " << z
       << "), outside the validated regime";
    throw out_of_range_error(os.str());
  }
  if (peak < 25.0) return ml_series<50>(beta, gamma, z, at);
  return ml_series<110>(beta, gamma, z, at);
}

TestBump::TestBump(double center, double width) : center_(center), width_(width) {
  if (!(width > 0.0) || !std::isfinite(center)) throw parameter_error("TestBump: width must be positive");
}

double TestBump::derivative(double t, int k) const {
  if (k < 0) throw parameter_error("TestBump: negative derivative order");
  const double s = (t - center_) / width_;
  if (!(std::abs(s) < 1.0)) return 0.0;
  // u(s + h) = u0 + u1 h + u2 h^2 with u = 1 - s^2.
  const double u0 = 1.0 - s * s, u1 = -2.0 * s, u2 = -1.0;
  if (-1.0 / u0 < -700.0) return 0.0;
  std::vector<double> g(std::size_t(k) + 1), e(std::size_t(k) + 1);
  std::vector<double> r(std::size_t(k) + 1);
  r[0] = 1.0 / u0;
  for (int n = 1; n <= k; ++n) {
    double acc = u1 * r[n - 1];
    if (n >= 2) acc += u2 * r[n - 2];
    r[n] = -acc / u0;
  }
  for (int n = 0; n <= k; ++n) g[n] = -r[n];
  e[0] = std::exp(g[0]);
  for (int n = 1; n <= k; ++n) {
    double acc = 0.0;
    for (int i = 1; i <= n; ++i) acc += i * g[i] * e[n - i];
    e[n] = acc / n;
  }
  double factorial = 1.0;
  for (int n = 2; n <= k; ++n) factorial *= n;
  return factorial * e[k] / std::pow(width_, k);
}

Vec constant_order_oracle(double beta, const StiffnessOperator& op, const Vec& u0, const SourceTerm& F, double t) {
  const Mesh& mesh = op.mesh();
  if (mesh.dimension != 1 || !op.constant_coefficients()) {
    throw unsupported_error("constant_order_oracle: needs a 1D operator with constant coefficients");
  }
  if (F.regular) throw unsupported_error("constant_order_oracle: regular sources are not supported");
  if (static_cast<std::size_t>(u0.size()) != op.size()) throw input_error("constant_order_oracle: u0 has wrong length");
  const double a = op.a_diagonal()(0, 0);
  const double q = op.q()[0];
  Vec out = Vec::Zero(u0.size());
  if (!(t > 0.0)) return out;

  const double u0_norm = u0.norm();
  for (int k = 1; k < mesh.n; ++k) {
    const Vec phi = discrete_eigenvector(mesh, k);
    const double lambda = discrete_eigenvalue(mesh, k, a, q);
    double coeff = 0.0;
    const double c0 = phi.dot(u0);
    if (std::abs(c0) > 1e-13 * u0_norm) coeff += mittag_leffler(beta, 1.0, -lambda * std::pow(t, beta)) * c0;
    for (const auto& atom : F.atoms) {
      const double tau = t - atom.time;
      if (!(tau > 0.0)) continue;
      const double cj = phi.dot(atom.profile);
      if (!(std::abs(cj) > 1e-13 * atom.profile.norm())) continue;
      const int kj = atom.order;
      coeff += std::pow(tau, beta - 1.0 - kj) *
               mittag_leffler(beta, beta - kj, -lambda * std::pow(tau, beta)) * cj;
    }
    if (coeff != 0.0) out += coeff * phi;
  }
  return out;
}

std::vector<double> l1_scheme_oracle(double beta, double lambda, double u0_mode, const std::vector<double>& f_mode,
                                     const std::vector<double>& times) {
  if (!(beta > 0.0 && beta <= 1.0)) throw parameter_error("l1_scheme_oracle: beta must lie in (0, 1]");
  if (!(lambda >= 0.0)) throw parameter_error("l1_scheme_oracle: lambda must be >= 0");
  if (times.size() < 2) throw parameter_error("l1_scheme_oracle: need at least two times");
  if (f_mode.size() != times.size()) throw input_error("l1_scheme_oracle: f samples must match the grid");
  const std::size_t nt = times.size();
  const double dt = (times.back() - times.front()) / double(nt - 1);
  if (std::abs(times.front()) > 1e-14 || !(dt > 0.0)) throw unsupported_error("l1_scheme_oracle: grid must start at 0");
  for (std::size_t i = 0; i < nt; ++i) {
    if (std::abs(times[i] - double(i) * dt) > 1e-9 * dt) throw unsupported_error("l1_scheme_oracle: non-uniform grid");
  }
  const double c = std::pow(dt, -beta) * reciprocal_gamma(2.0 - beta);
  std::vector<double> b(nt);
  b[0] = 1.0;  // pow(0, 0) would cancel it at beta = 1
  for (std::size_t j = 1; j < nt; ++j) b[j] = std::pow(double(j + 1), 1.0 - beta) - std::pow(double(j), 1.0 - beta);
  std::vector<double> u(nt);
  u[0] = u0_mode;
  for (std::size_t n = 1; n < nt; ++n) {
    double history = 0.0;
    for (std::size_t j = 1; j < n; ++j) history += b[j] * (u[n - j] - u[n - j - 1]);
    u[n] = (f_mode[n] + c * (b[0] * u[n - 1] - history)) / (c * b[0] + lambda);
  }
  return u;
}

std::vector<double> graded_time_grid(double T, const std::vector<double>& singular_points, double tau_min,
                                     double ratio, double dt_max) {
  if (!(T > 0.0) || !(tau_min > 0.0) || !(ratio > 1.0) || !(dt_max > 0.0)) {
    throw parameter_error("graded_time_grid: invalid parameters");
  }
  std::vector<double> pts;
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt_max - 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) pts.push_back(std::min(T, double(i) * T / double(steps)));
  std::vector<double> origins{0.0};
  origins.insert(origins.end(), singular_points.begin(), singular_points.end());
  for (double s : origins) {
    if (s < 0.0 || s >= T) continue;
    pts.push_back(s);
    for (double d = tau_min; d * (ratio - 1.0) < dt_max && s + d < T; d *= ratio) pts.push_back(s + d);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (out.empty() || p - out.back() > 1e-15 * T) out.push_back(p);
  }
  out.back() = T;
  return out;
}

namespace {

// int_0^T e^{-pt} v(t) dt for v linear between samples.
CVec exp_integral(const std::vector<double>& times, const std::vector<const Vec*>& values, cplx p,
                  std::size_t stride) {
  const auto n = values.front()->size();
  CVec acc = CVec::Zero(n);
  std::size_t i = 0;
  while (i + 1 < times.size()) {
    const std::size_t next = std::min(i + stride, times.size() - 1);
    const double a = times[i], h = times[next] - a;
    const cplx z = p * h;
    const cplx e = std::exp(-p * a) * h;
    acc += e * (exp_moment0(z) * values[i]->cast<cplx>() +
                exp_moment1(z) * (*values[next] - *values[i]).cast<cplx>());
    i = next;
  }
  return acc;
}

CVec shifted_apply(const StiffnessOperator& op, const CVec& khat, cplx p, const CVec& v) {
  CVec out = op.apply(v);
  out.array() += p * khat.array() * v.array();
  return out;
}

}  // namespace

std::vector<LaplaceResidual> laplace_residual(const Trajectory& traj, const KernelSpec& spec,
                                              const StiffnessOperator& op, const SourceTerm& F,
                                              const std::vector<cplx>& p_samples, double T, double target) {
  if (!traj.parts) throw input_error("laplace_residual: trajectory carries no parts");
  if (traj.times.size() < 3 || traj.times.front() != 0.0) {
    throw input_error("laplace_residual: trajectory must start at t = 0");
  }
  if (!(T > 0.0) || traj.times.back() < T * (1.0 - 1e-12)) {
    throw input_error("laplace_residual: trajectory does not reach the horizon T");
  }
  const auto& parts = *traj.parts;
  std::size_t count = 0;
  while (count < traj.times.size() && traj.times[count] <= T * (1.0 + 1e-12)) ++count;
  std::vector<double> times(traj.times.begin(), traj.times.begin() + long(count));
  const std::size_t N = op.size();
  const Vec& u0 = traj.initial.size() ? traj.initial : Vec::Zero(Eigen::Index(N)).eval();

  std::vector<const Vec*> smooth;
  for (std::size_t i = 0; i < count; ++i) smooth.push_back(&parts.smooth_primitive[i]);
  std::vector<std::vector<const Vec*>> prim(parts.atom_primitives.size());
  for (std::size_t j = 0; j < prim.size(); ++j) {
    for (std::size_t i = 0; i < count; ++i) prim[j].push_back(&parts.atom_primitives[j][i]);
  }
  // u^ = p P^_s - P_s(0) + sum_j p^{k_j + 2} V^_j; all primitives vanish at 0
  // and the boundary terms at T go into the tail.
  std::vector<int> powers;
  for (const auto& a : F.atoms) powers.push_back(a.order + 2);

  std::vector<LaplaceResidual> out;
  for (const cplx p : p_samples) {
    if (!(p.real() > 0.0)) throw domain_error("laplace_residual: Re p must be positive");
    LaplaceResidual r;
    r.p = p;
    r.budget = target;
    const CVec khat = kernel_laplace_field(spec, p);

    auto transform = [&](std::size_t stride) {
      CVec u = p * exp_integral(times, smooth, p, stride);
      for (std::size_t j = 0; j < prim.size(); ++j) {
        u += std::pow(p, powers[j]) * exp_integral(times, prim[j], p, stride);
      }
      return u;
    };
    const CVec fine = transform(1);
    const CVec coarse = transform(2);
    // Both are second order in the step; extrapolate.
    const CVec uhat = fine + (fine - coarse) / 3.0;
    const auto fhat = source_laplace(F, p, T, N);
    const CVec rhs = fhat.value + khat.cwiseProduct(u0.cast<cplx>());
    const CVec res = shifted_apply(op, khat, p, uhat) - rhs;

    // Beyond T the primitives grow at most like their last value plus slope.
    const double decay = std::exp(-p.real() * T) / p.real();
    auto piece_tail = [&](const std::vector<const Vec*>& series, int m) {
      const std::size_t n = series.size();
      const Vec slope = (*series[n - 1] - *series[n - 2]) / (times[n - 1] - times[n - 2]);
      const Vec bound = series[n - 1]->cwiseAbs() + slope.cwiseAbs() / p.real();
      return std::pow(std::abs(p), m) * shifted_apply(op, khat, p, bound.cast<cplx>()).norm() * decay;
    };
    double tail = piece_tail(smooth, 1);
    for (std::size_t j = 0; j < prim.size(); ++j) tail += piece_tail(prim[j], powers[j]);
    tail += fhat.tail_estimate;

    const double scale = rhs.norm();
    r.relative = scale > 0.0;
    const double denom = r.relative ? scale : 1.0;
    r.residual = res.norm() / denom;
    r.tail_estimate = tail / denom;
    r.time_quadrature = shifted_apply(op, khat, p, fine - coarse).norm() / (3.0 * denom);
    r.tail_ok = r.tail_estimate <= target;
    out.push_back(r);
  }
  return out;
}

WeakResidual weak_residual(const Trajectory& traj, const KernelSpec& spec, const StiffnessOperator& op, const Vec& u0,
                           const SourceTerm& F, const TestBump& chi, const Vec& phi, const WeakOptions& options) {
  if (!traj.parts) throw input_error("weak_residual: trajectory carries no parts");
  const std::size_t N = op.size();
  if (static_cast<std::size_t>(phi.size()) != N) throw input_error("weak_residual: phi has wrong length");
  if (traj.times.size() < 3 || traj.times.front() != 0.0) throw input_error("weak_residual: trajectory must start at 0");
  if (chi.lower() < 0.0 || chi.upper() > traj.times.back()) {
    throw input_error("weak_residual: test function support exceeds the trajectory horizon");
  }
  const double h = traj.times[1];
  std::size_t count = 0;
  while (count < traj.times.size() && traj.times[count] <= chi.upper() + 1e-12) ++count;
  count = std::min(traj.times.size(), count + 1);
  for (std::size_t i = 0; i < count; ++i) {
    if (std::abs(traj.times[i] - double(i) * h) > 1e-9 * h) {
      throw unsupported_error("weak_residual: trajectory grid must be uniform");
    }
  }
  const auto& parts = *traj.parts;
  const std::vector<double> times(traj.times.begin(), traj.times.begin() + long(count));
  const Vec Aphi = op.apply(phi);

  // Trapezoid sums on every stride-th sample; chi and its derivatives vanish
  // at the support ends.
  struct Pair {
    double memory = 0.0;
    double elliptic = 0.0;
  };
  auto u_terms = [&](std::size_t stride) {
    std::vector<double> sub_times;
    for (std::size_t i = 0; i < count; i += stride) sub_times.push_back(times[i]);
    const double step = h * double(stride);
    auto pair_with = [&](const std::vector<Vec>& series, int m, const Vec& w) {
      double acc = 0.0;
      for (std::size_t i = 0; i < series.size(); ++i) {
        const double c = chi.derivative(sub_times[i], m);
        if (c != 0.0) acc += c * series[i].dot(w);
      }
      return acc * step;
    };
    // u = d^m P with P vanishing to order m at 0: move all m + 1 derivatives onto chi.
    Pair sum;
    auto add_piece = [&](const std::vector<Vec>& series, int m) {
      std::vector<Vec> P;
      for (std::size_t i = 0; i < count; i += stride) P.push_back(series[i]);
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      sum.memory += -sign * pair_with(apply_IK(spec, sub_times, P), m + 1, phi);
      sum.elliptic += sign * pair_with(P, m, Aphi);
    };
    add_piece(parts.smooth_primitive, 1);
    for (std::size_t j = 0; j < parts.atom_primitives.size(); ++j) {
      add_piece(parts.atom_primitives[j], F.atoms.at(j).order + 2);
    }
    return sum;
  };

  WeakResidual out;
  const Pair u_part = u_terms(1);
  out.memory = u_part.memory;
  out.elliptic = u_part.elliptic;
  // Terms not involving u: fine trapezoid over supp chi.
  const int fine = 4096;
  const double hf = (chi.upper() - chi.lower()) / fine;
  const bool uniform = spec.spatially_uniform();
  const double u0_phi = u0.size() ? u0.dot(phi) : 0.0;
  for (int i = 1; i < fine; ++i) {
    const double t = chi.lower() + i * hf;
    const double c = chi(t);
    if (c == 0.0 || !(t > 0.0)) continue;
    if (u0.size()) {
      double pair = 0.0;
      if (uniform) {
        pair = kernel_value(spec, t, 0) * u0_phi;
      } else {
        for (std::size_t node = 0; node < N; ++node) {
          pair += kernel_value(spec, t, node) * u0[Eigen::Index(node)] * phi[Eigen::Index(node)];
        }
      }
      out.initial += c * pair * hf;
    }
    if (F.regular) out.regular += c * F.regular->value(t).dot(phi) * hf;
  }
  for (const auto& atom : F.atoms) {
    double sign = (atom.order % 2 == 0) ? 1.0 : -1.0;
    if (options.flip_atom_sign) sign = -sign;
    out.atoms += sign * chi.derivative(atom.time, atom.order) * atom.profile.dot(phi);
  }

  out.absolute = std::abs(out.memory + out.elliptic - out.initial - out.atoms - out.regular);
  out.scale = std::max({std::abs(out.memory), std::abs(out.elliptic), std::abs(out.initial), std::abs(out.atoms),
                        std::abs(out.regular)});
  out.residual = out.scale > 0.0 ? out.absolute / out.scale : 0.0;
  return out;
}

}  // namespace fracdiff
