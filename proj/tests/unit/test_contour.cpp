#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fracdiff/contour.hpp"
#include "fracdiff/error.hpp"
#include "fracdiff/verify.hpp"

using namespace fracdiff;

namespace {
constexpr double kTheta = 0.75 * std::numbers::pi;
}

TEST(Contour, ArcMeetsRays) {
  const auto q = build_contour(kTheta, 1.0, 32, 16, 1.0, 1e-10);
  const cplx upper = std::polar(1.0, kTheta);
  int hits_upper = 0, hits_lower = 0;
  for (const auto& n : q.nodes()) {
    if (std::abs(n.p - upper) < 1e-15) ++hits_upper;
    if (std::abs(n.p - std::conj(upper)) < 1e-15) ++hits_lower;
  }
  EXPECT_EQ(hits_upper, 1);
  EXPECT_EQ(hits_lower, 1);
}

TEST(Contour, TruncationRadius) {
  const auto q = build_contour(kTheta, 1.0, 32, 16, 1.0, 1e-16);
  EXPECT_GE(q.ray_end(), 16.0 * std::log(10.0) / std::abs(std::cos(kTheta)));
  EXPECT_LE(std::exp(q.ray_end() * std::cos(kTheta)), 1e-16);
}

TEST(Contour, NodeCountAndConjugation) {
  const auto q = build_contour(kTheta, 1.0, 32, 16, 1.0, 1e-10);
  EXPECT_EQ(q.size(), 80u);
  EXPECT_EQ(q.stored().size(), 40u);
  const auto nodes = q.nodes();
  ASSERT_EQ(nodes.size(), 80u);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& a = nodes[i];
    const auto& b = nodes[nodes.size() - 1 - i];
    EXPECT_EQ(a.p, std::conj(b.p));
    // w carries 1/(2 pi i); the bare line element dp flips sign under conjugation
    EXPECT_EQ(a.w, std::conj(b.w));
    const cplx two_pi_i(0.0, 2.0 * std::numbers::pi);
    EXPECT_LE(std::abs(a.w * two_pi_i + std::conj(b.w * two_pi_i)), 1e-15 * std::abs(a.w));
  }
}

TEST(Contour, OddArcHasRealNode) {
  const auto q = build_contour(kTheta, 0.5, 8, 5, 1.0, 1e-8);
  EXPECT_EQ(q.size(), 21u);
  double total = 0.0;
  for (std::size_t i = 0; i < q.stored().size(); ++i) total += q.multiplicity(i);
  EXPECT_EQ(total, 21.0);
}

TEST(Contour, Errors) {
  EXPECT_THROW(build_contour(0.5 * std::numbers::pi, 1.0, 32, 16, 1.0, 1e-8), Error);
  EXPECT_THROW(build_contour(std::numbers::pi, 1.0, 32, 16, 1.0, 1e-8), Error);
  EXPECT_THROW(build_contour(kTheta, 1.0, 32, 16, 1.0, 1.0), Error);
  EXPECT_THROW(build_contour(kTheta, 0.0, 32, 16, 1.0, 1e-8), Error);
  EXPECT_THROW(build_contour(kTheta, 1.0, 1, 16, 1.0, 1e-8), Error);
  EXPECT_THROW(build_contour(kTheta, 1.0, 32, 16, 0.0, 1e-8), Error);
  EXPECT_THROW(auto_params(0.0, 1.0, 1e-8), Error);
}

TEST(InverseLaplace, Examples) {
  const auto p1 = auto_params(1.0, 2.0, 1e-8);
  const auto q = build_contour(p1, 1.0, 1e-8);
  EXPECT_NEAR(inverse_laplace_scalar([](cplx p) { return 1.0 / p; }, 1.0, q).real(), 1.0, 1e-8);
  EXPECT_NEAR(inverse_laplace_scalar([](cplx p) { return 1.0 / (p * p); }, 2.0, q).real(), 2.0, 1e-8);
  const auto ml = inverse_laplace_scalar([](cplx p) { return std::pow(p, -0.5) / (std::sqrt(p) + 1.0); }, 1.0, q);
  EXPECT_NEAR(ml.real(), 0.427583576155807, 1e-8);
  EXPECT_NEAR(ml.real(), mittag_leffler(0.5, 1.0, -1.0), 1e-8);
}

TEST(InverseLaplace, RealReconstruction) {
  const auto q = build_contour(auto_params(0.1, 10.0, 1e-8), 0.1, 1e-8);
  for (double t : {0.1, 1.0, 10.0}) {
    const cplx v = inverse_laplace_scalar([](cplx p) { return 1.0 / (p * (p + 2.0)); }, t, q);
    EXPECT_LE(std::abs(v.imag()), 1e-10 * (1.0 + std::abs(v.real())));
  }
}

TEST(AutoParams, CalibratedAcrossWindow) {
  const auto q = build_contour(auto_params(0.1, 10.0, 1e-8), 0.1, 1e-8);
  for (double t : {0.1, 0.3, 1.0, 3.0, 10.0}) {
    EXPECT_NEAR(inverse_laplace_scalar([](cplx p) { return 1.0 / p; }, t, q).real(), 1.0, 1e-8);
    EXPECT_NEAR(inverse_laplace_scalar([](cplx p) { return 1.0 / (p * p); }, t, q).real(), t, 1e-8 * t);
  }
}

TEST(AutoParams, Formula) {
  const auto a = auto_params(1.0, 1.0, 1e-4);
  const auto b = auto_params(1.0, 1.0, 1e-8);
  EXPECT_LE(a.nodes_per_ray, b.nodes_per_ray);
  EXPECT_LE(a.nodes_arc, b.nodes_arc);
  EXPECT_DOUBLE_EQ(b.theta, kTheta);
  EXPECT_LE(auto_params(0.1, 100.0, 1e-8).delta, 1e-2);
  const auto c = auto_params(1.0, 1.0, 1e-8);
  EXPECT_EQ(c.nodes_per_ray, b.nodes_per_ray);
  EXPECT_EQ(c.delta, b.delta);
}

TEST(AutoParams, TranslationConsistency) {
  const auto wide = build_contour(auto_params(0.5, 4.0, 1e-8), 0.5, 1e-8);
  const auto tight = build_contour(auto_params(2.0, 2.0, 1e-8), 2.0, 1e-8);
  const auto f = [](cplx p) { return 1.0 / p; };
  EXPECT_NEAR(inverse_laplace_scalar(f, 2.0, wide).real(), inverse_laplace_scalar(f, 2.0, tight).real(), 2e-8);
}

TEST(InverseLaplace, GeometricConvergence) {
  double prev = 1.0;
  for (int n : {16, 32, 64}) {
    const auto q = build_contour(kTheta, 1.0, n, n / 2, 1.0, 1e-14);
    const double err = std::abs(inverse_laplace_scalar([](cplx p) { return 1.0 / p; }, 1.0, q).real() - 1.0);
    EXPECT_TRUE(err <= prev / 10.0 || err < 1e-12) << n << " " << err;
    prev = err;
  }
}
