#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "fracdiff/error.hpp"
#include "fracdiff/kernels.hpp"

using namespace fracdiff;

namespace {

KernelSpec single_term(double alpha, std::size_t nodes = 3) { return KernelSpec::constant_order(alpha, nodes); }

KernelSpec unit_distributed(std::size_t nodes = 2, int q = 64) {
  DistributedKernel d;
  d.mu = {1.0, 1.0};
  d.quadrature_nodes = q;
  return KernelSpec::distributed(d, nodes);
}

std::vector<cplx> sample_points() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> r(-2.0, 1.5), a(-3.0, 3.0);
  std::vector<cplx> ps;
  for (int i = 0; i < 10; ++i) ps.push_back(std::polar(std::pow(10.0, r(rng)), a(rng)));
  return ps;
}

}  // namespace

TEST(KernelValue, SingleTermAtOne) {
  EXPECT_NEAR(kernel_value(single_term(0.5), 1.0, 0), 1.0 / std::sqrt(std::numbers::pi), 1e-14);
}

TEST(KernelValue, VariableOrderAtOne) {
  Vec alpha(3);
  alpha << 0.3, 0.4, 0.5;
  const auto k = KernelSpec::variable_order(alpha);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(kernel_value(k, 1.0, i), 1.0 / std::tgamma(1.0 - alpha[i]), 1e-13);
}

TEST(KernelValue, DistributedAgainstAdaptiveQuadrature) {
  using boost::math::quadrature::gauss_kronrod;
  const double ref = gauss_kronrod<double, 31>::integrate(
      [](double a) { return std::pow(2.0, -a) / boost::math::tgamma(1.0 - a); }, 0.0, 1.0, 15, 1e-14);
  EXPECT_NEAR(kernel_value(unit_distributed(), 2.0, 0), ref, 1e-10);
}

TEST(KernelValue, Errors) {
  const auto k = single_term(0.5);
  EXPECT_THROW(kernel_value(k, 0.0, 0), Error);
  EXPECT_THROW(kernel_value(k, 1.0, 17), Error);
  try {
    kernel_value(k, -1.0, 0);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
}

TEST(KernelValue, StrictlyDecreasing) {
  Vec alpha(2);
  alpha << 0.3, 0.5;
  MultiTermKernel m;
  m.terms = {{0.2, Vec::Constant(2, 1.0)}, {0.6, Vec::Constant(2, 2.0)}};
  for (const auto& k : {KernelSpec::variable_order(alpha), unit_distributed(), KernelSpec::multi_term(m)}) {
    double prev = kernel_value(k, 1e-3, 0);
    for (double t = 2e-3; t < 50.0; t *= 1.3) {
      const double v = kernel_value(k, t, 0);
      EXPECT_LT(v, prev);
      EXPECT_GT(v, 0.0);
      prev = v;
    }
  }
}

TEST(KernelLaplace, DistributedExamples) {
  const auto k = unit_distributed();
  EXPECT_NEAR(std::abs(kernel_laplace(k, 1.0, 0) - 1.0), 0.0, 1e-14);
  const double e = std::numbers::e;
  EXPECT_NEAR(std::abs(kernel_laplace(k, e, 0) - (e - 1.0) / e), 0.0, 1e-12);
}

TEST(KernelLaplace, VariableOrderAgainstLaplaceIntegral) {
  const auto k = KernelSpec::variable_order(Vec::Constant(2, 0.5));
  boost::math::quadrature::exp_sinh<double> integrator;
  // substitute t = s^2 to remove the endpoint singularity
  const double ref = integrator.integrate(
      [](double s) { return 2.0 * std::exp(-4.0 * s * s) / std::sqrt(std::numbers::pi); }, 0.0,
      std::numeric_limits<double>::infinity());
  EXPECT_NEAR(ref, 0.5, 1e-12);
  EXPECT_NEAR(std::abs(kernel_laplace(k, 4.0, 1) - ref), 0.0, 1e-12);
}

TEST(KernelLaplace, DistributedClosedForm) {
  const auto k = unit_distributed();
  for (const cplx p : sample_points()) {
    for (const cplx z : {p, std::conj(p)}) {
      const cplx exact = (z - 1.0) / (z * std::log(z));
      EXPECT_LE(std::abs(kernel_laplace(k, z, 0) - exact), 1e-10 * std::abs(exact)) << z;
    }
  }
}

TEST(KernelLaplace, HermitianSymmetry) {
  Vec alpha(2);
  alpha << 0.35, 0.6;
  MultiTermKernel m;
  m.terms = {{0.25, Vec::Constant(2, 1.5)}, {0.7, Vec::Constant(2, 0.5)}};
  for (const auto& k : {KernelSpec::variable_order(alpha), unit_distributed(), KernelSpec::multi_term(m)}) {
    for (const cplx p : sample_points()) {
      const cplx a = kernel_laplace(k, std::conj(p), 1);
      const cplx b = std::conj(kernel_laplace(k, p, 1));
      EXPECT_LE(std::abs(a - b), 1e-14 * std::abs(b));
    }
  }
}

TEST(KernelLaplace, SingleTermMatchesVariableOrder) {
  const auto mt = single_term(0.4, 2);
  const auto vo = KernelSpec::variable_order(Vec::Constant(2, 0.4));
  for (const cplx p : sample_points()) {
    EXPECT_LE(std::abs(kernel_laplace(mt, p, 0) - kernel_laplace(vo, p, 0)), 1e-12 * std::abs(kernel_laplace(vo, p, 0)));
  }
  for (double t : {0.01, 0.5, 3.0}) {
    EXPECT_NEAR(kernel_value(mt, t, 1), kernel_value(vo, t, 1), 1e-12 * kernel_value(vo, t, 1));
  }
}

TEST(KernelLaplace, DistributedQuadratureConverges) {
  const auto k64 = unit_distributed(2, 64);
  const auto k128 = k64.with_alpha_nodes(128);
  for (const cplx p : sample_points()) {
    EXPECT_LE(std::abs(kernel_laplace(k64, p, 0) - kernel_laplace(k128, p, 0)), 1e-10);
  }
}

TEST(KernelLaplace, RejectsCut) {
  const auto k = single_term(0.5);
  EXPECT_THROW(kernel_laplace(k, 0.0, 0), Error);
  EXPECT_THROW(kernel_laplace(k, -2.0, 0), Error);
}

TEST(ValidateKernel, VariableOrderRange) {
  Vec ok(2), bad(2);
  ok << 0.3, 0.5;
  bad << 0.3, 0.7;
  const auto d1 = validate_kernel(KernelSpec::variable_order(ok));
  EXPECT_TRUE(d1.ok);
  EXPECT_DOUBLE_EQ(d1.alpha_min, 0.3);
  EXPECT_DOUBLE_EQ(d1.alpha_max, 0.5);
  const auto d2 = validate_kernel(KernelSpec::variable_order(bad));
  ASSERT_FALSE(d2.ok);
  EXPECT_NE(d2.violations.front().find("variable-order admissibility"), std::string::npos);
}

TEST(ValidateKernel, MultiTermZeroWeight) {
  MultiTermKernel m;
  Vec rho(2);
  rho << 1.0, 0.0;
  m.terms = {{0.5, rho}};
  const auto d = validate_kernel(KernelSpec::multi_term(m));
  ASSERT_FALSE(d.ok);
  EXPECT_NE(d.violations.front().find("multi-term admissibility"), std::string::npos);
}

TEST(ValidateKernel, DistributedNegativeWeight) {
  DistributedKernel d;
  d.mu = {1.0, -0.2, 1.0};
  const auto diag = validate_kernel(KernelSpec::distributed(d, 1));
  ASSERT_FALSE(diag.ok);
  EXPECT_NE(diag.violations.front().find("distributed-order admissibility"), std::string::npos);
}

TEST(ApplyIK, PowerRule) {
  const auto k = single_term(0.5, 1);
  std::vector<double> times;
  std::vector<Vec> one, ramp, zero;
  for (int i = 0; i <= 20; ++i) {
    const double t = 0.05 * i;
    times.push_back(t);
    one.push_back(Vec::Constant(1, 1.0));
    ramp.push_back(Vec::Constant(1, t));
    zero.push_back(Vec::Zero(1));
  }
  EXPECT_NEAR(apply_IK(k, times, one).back()[0], 2.0 / std::sqrt(std::numbers::pi), 1e-12);
  EXPECT_NEAR(apply_IK(k, times, ramp).back()[0], 1.0 / std::tgamma(2.5), 1e-12);
  for (const auto& v : apply_IK(k, times, zero)) EXPECT_EQ(v[0], 0.0);
}

TEST(ApplyIK, Linear) {
  Vec alpha(2);
  alpha << 0.3, 0.55;
  const auto k = KernelSpec::variable_order(alpha);
  std::vector<double> times;
  std::vector<Vec> g1, g2, mix;
  for (int i = 0; i <= 30; ++i) {
    const double t = 0.1 * i;
    times.push_back(t);
    Vec a(2), b(2);
    a << std::sin(t), t * t;
    b << std::cos(3 * t), 1.0;
    g1.push_back(a);
    g2.push_back(b);
    mix.push_back(2.0 * a - 0.5 * b);
  }
  const auto r1 = apply_IK(k, times, g1), r2 = apply_IK(k, times, g2), rm = apply_IK(k, times, mix);
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_LE((rm[i] - (2.0 * r1[i] - 0.5 * r2[i])).norm(), 1e-13 * (1.0 + rm[i].norm()));
  }
}

TEST(ApplyIK, NonUniformGridRejected) {
  const auto k = single_term(0.5, 1);
  const std::vector<double> times{0.0, 0.1, 0.3};
  const std::vector<Vec> g(3, Vec::Ones(1));
  EXPECT_THROW(apply_IK(k, times, g), Error);
}
