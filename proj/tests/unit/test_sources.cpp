#include <cmath>

#include <gtest/gtest.h>

#include "fracdiff/error.hpp"
#include "fracdiff/solver.hpp"
#include "fracdiff/sources.hpp"
#include "fracdiff/special.hpp"
#include "fracdiff/verify.hpp"

using namespace fracdiff;

namespace {

struct Problem {
  StiffnessOperator op;
  KernelSpec kernel;
  PropagatorCache cache;
};

Problem make(double beta, int n, double t_min, double t_max, double tol = 1e-10) {
  const Mesh m = build_mesh(DomainSpec{}, n);
  auto op = assemble_operator(m, diagonal_field(Vec::Ones(long(m.size()))), Vec::Zero(long(m.size())));
  auto kernel = KernelSpec::constant_order(beta, m.size());
  const auto q = build_contour(auto_params(t_min, t_max, tol), t_min, tol, kDefaultMaxDerivative);
  auto cache = PropagatorCache::build(q, kernel, op);
  return {std::move(op), std::move(kernel), std::move(cache)};
}

RegularSource constant_in_time(const Vec& f, double dt, double horizon) {
  const int cols = int(std::lround(horizon / dt)) + 1;
  RegularSource r;
  r.dt = dt;
  r.samples = f.replicate(1, cols);
  return r;
}

}  // namespace

TEST(Duhamel, AtomAtOriginIsS1) {
  const auto pr = make(0.5, 16, 0.1, 1.0);
  const Vec f = Vec::LinSpaced(15, 0.0, 1.0);
  SourceTerm F;
  F.atoms.push_back({0.0, 0, f});
  const Vec u = duhamel_eval(pr.cache, 0.6, Vec::Zero(15), F);
  EXPECT_LE((u - apply_S(pr.cache, 1, 0.6, f)).norm(), 1e-14 * u.norm());
}

TEST(Duhamel, Causality) {
  const auto pr = make(0.5, 16, 0.1, 1.0);
  SourceTerm F;
  F.atoms.push_back({0.5, 1, Vec::Ones(15)});
  const Vec u0 = discrete_eigenvector(pr.op.mesh(), 2);
  for (double t : {0.3, 0.5}) {
    EXPECT_EQ(duhamel_eval(pr.cache, t, Vec::Zero(15), F).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((duhamel_eval(pr.cache, t, u0, F) - apply_S(pr.cache, 0, t, u0)).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Duhamel, ConstantRegularSource) {
  const auto pr = make(0.5, 32, 0.05, 1.0);
  const Mesh& m = pr.op.mesh();
  const Vec phi = discrete_eigenvector(m, 1);
  const double lam = discrete_eigenvalue(m, 1);
  SourceTerm F;
  F.regular = constant_in_time(phi, 0.01, 1.0);
  for (double t : {0.25, 0.5, 1.0}) {
    const double ref = (1.0 - mittag_leffler(0.5, 1.0, -lam * std::sqrt(t))) / lam;
    EXPECT_LE((duhamel_eval(pr.cache, t, Vec::Zero(31), F) - ref * phi).norm(), 1e-8) << t;
  }
}

TEST(Duhamel, ShortHorizonRejected) {
  const auto pr = make(0.5, 8, 0.1, 1.0);
  SourceTerm F;
  F.regular = constant_in_time(Vec::Ones(7), 0.1, 0.5);
  EXPECT_THROW(duhamel_eval(pr.cache, 0.9, Vec::Zero(7), F), Error);
}

TEST(Duhamel, Linearity) {
  const auto pr = make(0.7, 16, 0.05, 1.0);
  const Vec u0 = Vec::LinSpaced(15, 1.0, -1.0);
  SourceTerm F;
  F.atoms.push_back({0.2, 1, Vec::Ones(15)});
  F.regular = constant_in_time(Vec::LinSpaced(15, 0.0, 2.0), 0.05, 1.0);
  SourceTerm F2 = F;
  for (auto& a : F2.atoms) a.profile *= 3.0;
  F2.regular->samples *= 3.0;
  const double t = 0.8;
  const Vec a = duhamel_eval(pr.cache, t, u0, F);
  const Vec b = duhamel_eval(pr.cache, t, u0, SourceTerm{});
  const Vec c = duhamel_eval(pr.cache, t, Vec::Zero(15), F);
  const Vec d = duhamel_eval(pr.cache, t, Vec::Zero(15), F2);
  EXPECT_LE((a - b - c).norm(), 1e-12 * a.norm());
  EXPECT_LE((d - 3.0 * c).norm(), 1e-12 * d.norm());
}

TEST(Duhamel, DerivativeAtomMatchesFiniteDifference) {
  const auto pr = make(0.5, 24, 1e-3, 1.0, 1e-12);
  const Vec f = discrete_eigenvector(pr.op.mesh(), 1) + 0.5 * discrete_eigenvector(pr.op.mesh(), 2);
  SourceTerm d0, d1;
  d0.atoms.push_back({0.5, 0, f});
  d1.atoms.push_back({0.5, 1, f});
  const Vec zero = Vec::Zero(23);
  const double t = 0.8;
  const Vec exact = duhamel_eval(pr.cache, t, zero, d1);
  std::vector<double> errs;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    const Vec fd = (duhamel_eval(pr.cache, t + h, zero, d0) - duhamel_eval(pr.cache, t - h, zero, d0)) / (2 * h);
    errs.push_back((fd - exact).norm());
  }
  EXPECT_GE(std::log2(errs[0] / errs[1]), 1.8);
  EXPECT_GE(std::log2(errs[1] / errs[2]), 1.8);
}

TEST(Duhamel, MollifiedAtomConverges) {
  const auto pr = make(0.5, 16, 1e-3, 1.0, 1e-10);
  const Mesh& m = pr.op.mesh();
  const Vec f = discrete_eigenvector(m, 1);
  SourceTerm atom;
  atom.atoms.push_back({0.3, 0, f});
  const double t = 0.8;
  const Vec ref = duhamel_eval(pr.cache, t, Vec::Zero(15), atom);
  double prev = 1e300;
  for (double w : {0.1, 0.05, 0.025}) {
    const TestBump chi(0.3, w);
    const auto gl = gauss_legendre(64, chi.lower(), chi.upper());
    double mass = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) mass += gl.weights[i] * chi(gl.nodes[i]);
    const double dt = 1e-4;
    const int cols = int(std::lround(t / dt)) + 1;
    RegularSource r;
    r.dt = dt;
    r.samples.resize(15, cols);
    for (int c = 0; c < cols; ++c) r.samples.col(c) = chi(c * dt) / mass * f;
    SourceTerm smooth;
    smooth.regular = r;
    const double err = (duhamel_eval(pr.cache, t, Vec::Zero(15), smooth) - ref).norm();
    EXPECT_LT(err, prev) << w;
    prev = err;
  }
}

TEST(SourceLaplace, Atoms) {
  const Vec f = Vec::LinSpaced(4, 1.0, 2.0);
  SourceTerm F;
  F.atoms.push_back({0.0, 0, f});
  for (const cplx p : {cplx(1.0), cplx(-3.0, 2.0), cplx(0.5, -7.0)}) {
    EXPECT_LE((source_laplace(F, p, 1.0, 4).value - f.cast<cplx>()).norm(), 1e-15);
  }
  SourceTerm G;
  G.atoms.push_back({0.4, 1, f});
  const cplx p(2.0, 3.0);
  EXPECT_LE((source_laplace(G, p, 1.0, 4).value - p * std::exp(-p * 0.4) * f.cast<cplx>()).norm(), 1e-14);
}

TEST(SourceLaplace, ConstantRegular) {
  SourceTerm F;
  F.regular = constant_in_time(Vec::Ones(3), 0.1, 20.0);
  const cplx p(2.0, 1.0);
  const auto r = source_laplace(F, p, 20.0, 3);
  EXPECT_LE((r.value - CVec::Constant(3, 1.0 / p)).norm(), 1e-12);
  EXPECT_LE(r.tail_estimate, 1e-15);
  EXPECT_THROW(source_laplace(F, cplx(0.0, 1.0), 20.0, 3), Error);
}

TEST(SourceTerm, Validation) {
  SourceTerm F;
  F.atoms.push_back({0.5, 0, Vec::Ones(3)});
  F.atoms.push_back({0.2, 0, Vec::Ones(3)});
  EXPECT_THROW(F.validate(3, 4), Error);
  SourceTerm G;
  G.atoms.push_back({0.5, 0, Vec::Ones(2)});
  EXPECT_THROW(G.validate(3, 4), Error);
  SourceTerm H;
  H.atoms.push_back({0.5, 5, Vec::Ones(3)});
  EXPECT_THROW(H.validate(3, 4), Error);
  SourceTerm K;
  K.atoms.push_back({0.5, 0, Vec::Constant(3, std::nan(""))});
  EXPECT_THROW(K.validate(3, 4), Error);
  EXPECT_EQ(F.max_order(), 0);
}

TEST(SolveTrajectory, ZeroAndSuperposition) {
  SolverConfig cfg;
  cfg.n = 20;
  cfg.a = diagonal_field(Vec::Ones(19));
  cfg.q = Vec::Zero(19);
  cfg.kernel = KernelSpec::constant_order(0.5, 19);
  cfg.threads = 2;
  // one contour for all three solves
  cfg.contour.t_min = 0.1;
  cfg.contour.t_max = 1.0;
  const std::vector<double> times{0.1, 0.5, 1.0};
  const auto zero = solve_trajectory(cfg, times, Vec::Zero(19), SourceTerm{});
  for (const auto& v : zero.values) EXPECT_EQ(v.cwiseAbs().maxCoeff(), 0.0);

  const Vec u0 = Vec::LinSpaced(19, 0.0, 1.0);
  SourceTerm F;
  F.atoms.push_back({0.3, 1, Vec::Ones(19)});
  const auto full = solve_trajectory(cfg, times, u0, F);
  // same atom order, so the contour truncation matches too
  SourceTerm silent = F;
  silent.atoms[0].profile.setZero();
  const auto a = solve_trajectory(cfg, times, u0, silent);
  const auto b = solve_trajectory(cfg, times, Vec::Zero(19), F);
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_LE((full.values[i] - a.values[i] - b.values[i]).norm(), 1e-12 * full.values[i].norm());
  }
}

TEST(SolveTrajectory, StageTagOnAdmissibility) {
  SolverConfig cfg;
  cfg.n = 4;
  cfg.a = diagonal_field(Vec::Ones(3));
  cfg.q = Vec::Zero(3);
  Vec alpha(3);
  alpha << 0.3, 0.5, 0.7;
  cfg.kernel = KernelSpec::variable_order(alpha);
  try {
    solve_trajectory(cfg, {0.5}, Vec::Zero(3), SourceTerm{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Admissibility);
    EXPECT_FALSE(e.stage().empty());
  }
}
