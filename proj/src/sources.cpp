#include "fracdiff/sources.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "fracdiff/error.hpp"
#include "fracdiff/special.hpp"

namespace fracdiff {

namespace {

// Singular values below this fraction of the largest are dropped when the
// regular source is split into separable modes.
constexpr double kModeCutoff = 1e-14;
// Beyond this |Re p| * t only breakpoints within kDirectCutoff / |Re p| of t
// are summed.
constexpr double kFullSumLimit = 300.0;
// e^{-40} relative to the kept terms.
constexpr double kDirectCutoff = 40.0;

// Largest i >= 1 with i * dt < t, or 0.
std::size_t last_breakpoint_before(double t, double dt, std::size_t max_index) {
  if (!(t > dt)) return 0;
  auto i = static_cast<std::size_t>(std::ceil(t / dt)) - 1;
  while (i > 0 && !(double(i) * dt < t)) --i;
  while (i + 1 <= max_index && double(i + 1) * dt < t) ++i;
  return std::min(i, max_index);
}

}  // namespace

Vec RegularSource::value(double s) const {
  if (samples.cols() == 0) throw input_error("regular source: no samples");
  if (s <= 0.0) return samples.col(0);
  const double x = s / dt;
  const auto last = samples.cols() - 1;
  if (x >= double(last)) return samples.col(last);
  const auto i = static_cast<Eigen::Index>(x);
  const double frac = x - double(i);
  return (1.0 - frac) * samples.col(i) + frac * samples.col(i + 1);
}

void SourceTerm::validate(std::size_t node_count, int k_max) const {
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const auto& a = atoms[j];
    std::ostringstream os;
    if (!(a.time >= 0.0) || !std::isfinite(a.time)) {
      os << "source atom " << j << ": time must be finite and >= 0";
      throw input_error(os.str());
    }
    if (j > 0 && a.time < atoms[j - 1].time) throw input_error("source atoms: times must be non-decreasing");
    if (a.order < 0 || a.order > k_max) {
      os << "source atom " << j << ": order " << a.order << " outside [0, " << k_max << "]";
      throw input_error(os.str());
    }
    if (static_cast<std::size_t>(a.profile.size()) != node_count || !a.profile.allFinite()) {
      os << "source atom " << j << ": profile must be finite with " << node_count << " entries";
      throw input_error(os.str());
    }
  }
  if (regular) {
    if (!(regular->dt > 0.0)) throw input_error("regular source: dt must be positive");
    if (regular->samples.cols() < 2) throw input_error("regular source: need at least two time samples");
    if (static_cast<std::size_t>(regular->samples.rows()) != node_count) {
      throw input_error("regular source: sample vectors have the wrong length");
    }
    if (!regular->samples.allFinite()) throw input_error("regular source: non-finite samples");
  }
}

int SourceTerm::max_order() const noexcept {
  int k = 0;
  for (const auto& a : atoms) k = std::max(k, a.order);
  return k;
}

DuhamelEvaluator::DuhamelEvaluator(const PropagatorCache& cache, const Vec& u0, const SourceTerm& F)
    : cache_(&cache), source_(F), initial_(cache, 0, u0) {
  F.validate(cache.node_count(), cache.k_max());
  atoms_.reserve(F.atoms.size());
  for (const auto& a : F.atoms) atoms_.emplace_back(cache, 1, a.profile);
  if (F.regular) {
    const auto& S = F.regular->samples;
    if (S.cwiseAbs().maxCoeff() > 0.0) {
      Eigen::BDCSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& sv = svd.singularValues();
      for (Eigen::Index r = 0; r < sv.size(); ++r) {
        if (!(sv[r] > kModeCutoff * sv[0])) break;
        regular_modes_.emplace_back(cache, 1, Vec(svd.matrixU().col(r) * sv[r]));
        regular_time_profiles_.push_back(svd.matrixV().col(r));
      }
    }
  }
}

Vec DuhamelEvaluator::regular_part(double t, int k) const {
  const auto n = static_cast<Eigen::Index>(cache_->node_count());
  Vec out = Vec::Zero(n);
  if (!source_.regular || !(t > 0.0)) return out;
  const auto& reg = *source_.regular;
  if (t > reg.horizon() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "duhamel_eval: regular source horizon " << reg.horizon() << " is shorter than t = " << t;
    throw input_error(os.str());
  }
  const double dt = reg.dt;
  const auto segments = static_cast<std::size_t>(reg.samples.cols() - 1);
  const std::size_t last = last_breakpoint_before(t, dt, segments - 1);
  for (std::size_t r = 0; r < regular_modes_.size(); ++r) {
    const Vec& g = regular_time_profiles_[r];
    auto slope = [&](std::size_t i) { return (g[Eigen::Index(i + 1)] - g[Eigen::Index(i)]) / dt; };
    // int_0^t e^{(t-s)p} g(s) ds without the terms polynomial in 1/p, which
    // the contour integral annihilates.
    out += regular_modes_[r].combine([&](std::size_t, cplx p) {
      const cplx ip = 1.0 / p;
      cplx c = std::exp(t * p) * (g[0] * ip + slope(0) * ip * ip);
      cplx jumps = 0.0;
      if (std::abs(p.real()) * t <= kFullSumLimit) {
        for (std::size_t i = 1; i <= last; ++i) {
          jumps += (slope(i) - slope(i - 1)) * std::exp((t - double(i) * dt) * p);
        }
      } else {
        for (std::size_t i = last; i >= 1; --i) {
          const double lag = t - double(i) * dt;
          if (lag * std::abs(p.real()) > kDirectCutoff) break;
          jumps += (slope(i) - slope(i - 1)) * std::exp(lag * p);
        }
      }
      const cplx value = c + jumps * ip * ip;
      return k == 0 ? value : value * ip;
    });
  }
  return out;
}

Vec DuhamelEvaluator::smooth_part(double t) const {
  if (!(t > 0.0)) return Vec::Zero(static_cast<Eigen::Index>(cache_->node_count()));
  return initial_.evaluate(t, 0) + regular_part(t, 0);
}

Vec DuhamelEvaluator::smooth_primitive(double t) const {
  if (!(t > 0.0)) return Vec::Zero(static_cast<Eigen::Index>(cache_->node_count()));
  return initial_.evaluate(t, -1) + regular_part(t, -1);
}

Vec DuhamelEvaluator::atom_primitive(std::size_t atom, double t) const {
  const double tau = t - source_.atoms.at(atom).time;
  return atoms_[atom].evaluate(tau, -2);
}

Vec DuhamelEvaluator::evaluate(double t) const {
  Vec u = smooth_part(t);
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    const auto& a = source_.atoms[j];
    if (t > a.time) u += atoms_[j].evaluate(t - a.time, a.order);
  }
  return u;
}

double DuhamelEvaluator::imaginary_remainder(double t) const {
  double worst = initial_.imaginary_remainder(t, 0);
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    const auto& a = source_.atoms[j];
    worst = std::max(worst, atoms_[j].imaginary_remainder(t - a.time, a.order));
  }
  return worst;
}

Vec duhamel_eval(const PropagatorCache& cache, double t, const Vec& u0, const SourceTerm& F) {
  return DuhamelEvaluator(cache, u0, F).evaluate(t);
}

SourceLaplace source_laplace(const SourceTerm& F, cplx p, double T, std::size_t node_count) {
  const auto n = static_cast<Eigen::Index>(node_count);
  SourceLaplace out;
  out.value = CVec::Zero(n);
  for (const auto& a : F.atoms) {
    if (static_cast<std::size_t>(a.profile.size()) != node_count) {
      throw input_error("source_laplace: atom profile has the wrong length");
    }
    if (p.imag() == 0.0 && p.real() <= 0.0) {
      throw domain_error("source_laplace: p must be nonzero and off the cut");
    }
    cplx factor = std::exp(-p * a.time);
    for (int k = 0; k < a.order; ++k) factor *= p;
    out.value += factor * a.profile.cast<cplx>();
  }
  if (!F.regular) return out;
  const auto& reg = *F.regular;
  if (static_cast<std::size_t>(reg.samples.rows()) != node_count) {
    throw input_error("source_laplace: regular samples have the wrong length");
  }
  if (reg.samples.cwiseAbs().maxCoeff() == 0.0) return out;
  if (!(p.real() > 0.0)) throw domain_error("source_laplace: Re p must be positive for a regular source");
  if (!(T > 0.0)) throw parameter_error("source_laplace: horizon must be positive");
  const double dt = reg.dt;
  const double H = reg.horizon();
  const auto segments = reg.samples.cols() - 1;
  for (Eigen::Index i = 0; i < segments; ++i) {
    const double a = double(i) * dt;
    if (a >= T) break;
    const double h = std::min(dt, T - a);
    const cplx z = p * h;
    const Vec fa = reg.samples.col(i);
    const Vec slope = (reg.samples.col(i + 1) - fa) / dt;
    const cplx e = std::exp(-p * a) * h;
    out.value += e * (exp_moment0(z) * fa.cast<cplx>() + (h * exp_moment1(z)) * slope.cast<cplx>());
  }
  const Vec last = reg.samples.col(segments);
  if (T > H) out.value += ((std::exp(-p * H) - std::exp(-p * T)) / p) * last.cast<cplx>();
  out.tail_estimate = last.norm() * std::exp(-p.real() * T) / p.real();
  return out;
}

}  // namespace fracdiff
