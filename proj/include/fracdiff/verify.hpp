#pragma once

#include <vector>

#include "fracdiff/kernels.hpp"
#include "fracdiff/sources.hpp"
#include "fracdiff/spatial.hpp"
#include "fracdiff/trajectory.hpp"
#include "fracdiff/types.hpp"

namespace fracdiff {

/// E_{beta,gamma}(z) = sum_n z^n / Gamma(beta n + gamma) for 0 < beta <= 1,
/// real z in [-10, 0]. Summed in extended precision so cancellation between
/// the large alternating terms does not reach the double result.
double mittag_leffler(double beta, double gamma, double z);

/// chi(t) = exp(-1 / (1 - s^2)), s = (t - center) / width, zero for |s| >= 1.
class TestBump {
 public:
  TestBump(double center, double width);

  double center() const noexcept { return center_; }
  double width() const noexcept { return width_; }
  double lower() const noexcept { return center_ - width_; }
  double upper() const noexcept { return center_ + width_; }

  double operator()(double t) const { return derivative(t, 0); }
  /// d^k chi / dt^k from the Taylor expansion of exp(-1/(1-s^2)) at s.
  double derivative(double t, int k) const;

 private:
  double center_;
  double width_;
};

/// Modal solution of the constant-order problem on a 1D constant-coefficient
/// operator: E_beta(-lambda_k t^beta) <u0, phi_k> plus, for each atom,
/// (t - t_j)^{beta - 1 - k_j} E_{beta, beta - k_j}(-lambda_k (t - t_j)^beta) <f_j, phi_k>.
/// Modes whose coefficient is below 1e-13 of the data norm are skipped.
Vec constant_order_oracle(double beta, const StiffnessOperator& op, const Vec& u0, const SourceTerm& F, double t);

/// L1 discretization of d^beta u / dt^beta + lambda u = f on a uniform grid
/// starting at 0; f_mode[n] is f(times[n]). Returns u at every grid time.
std::vector<double> l1_scheme_oracle(double beta, double lambda, double u0_mode,
                                     const std::vector<double>& f_mode, const std::vector<double>& times);

/// Geometric grading of step tau_min * ratio^i away from t = 0 and from each
/// singular point, capped at dt_max; union with the uniform grid of step
/// dt_max on [0, T]. Sorted, starts at 0, ends at T.
std::vector<double> graded_time_grid(double T, const std::vector<double>& singular_points, double tau_min,
                                     double ratio, double dt_max);

struct LaplaceResidual {
  cplx p;
  double residual = 0.0;         // relative, or absolute when the data vanish
  bool relative = true;
  double tail_estimate = 0.0;    // relative truncation bound of u^ and F^
  double time_quadrature = 0.0;  // relative change from halving the grid
  double budget = 0.0;           // requested target
  bool tail_ok = true;           // tail estimate within the target
};

/// || (A + p K^(p)) u^(p) - F^(p) - K^(p) u0 || / || F^(p) + K^(p) u0 || with
/// u^(p) = int_0^T u(t) e^{-pt} dt from the trajectory. Needs trajectory parts.
std::vector<LaplaceResidual> laplace_residual(const Trajectory& traj, const KernelSpec& spec,
                                              const StiffnessOperator& op, const SourceTerm& F,
                                              const std::vector<cplx>& p_samples, double T,
                                              double target = 1e-4);

struct WeakResidual {
  double residual = 0.0;     // |sum of terms| / max |term|
  double absolute = 0.0;
  double scale = 0.0;        // max |term|
  double memory = 0.0;       // -int <I_K u, phi> chi'
  double elliptic = 0.0;     // int <A u, phi> chi
  double initial = 0.0;      // int <K u0, phi> chi
  double atoms = 0.0;        // sum_j (-1)^{k_j} chi^{(k_j)}(t_j) <f_j, phi>
  double regular = 0.0;      // int <F_reg, phi> chi
};

struct WeakOptions {
  /// Debug sentinel: pair atoms with (-1)^{k_j + 1} instead of (-1)^{k_j}.
  bool flip_atom_sign = false;
};

/// Residual of the weak formulation tested with chi(t) phi(x). The
/// trajectory must be on a uniform grid from 0 covering supp chi and carry
/// its parts.
WeakResidual weak_residual(const Trajectory& traj, const KernelSpec& spec, const StiffnessOperator& op,
                           const Vec& u0, const SourceTerm& F, const TestBump& chi, const Vec& phi,
                           const WeakOptions& options = {});

}  // namespace fracdiff
