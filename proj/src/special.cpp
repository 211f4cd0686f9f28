#include "fracdiff/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "fracdiff/error.hpp"

namespace fracdiff {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// Legendre P_n and its derivative at x.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

void map_rule(QuadratureRule& rule, double a, double b) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
}

}  // namespace

double lanczos_gamma(double x) {
  if (is_nonpositive_integer(x)) throw domain_error("gamma: pole at non-positive integer");
  if (x < 0.5) {
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * lanczos_gamma(1.0 - x));
  }
  x -= 1.0;
  double acc = kLanczosCoeffs[0];
  for (std::size_t i = 1; i < kLanczosCoeffs.size(); ++i) acc += kLanczosCoeffs[i] / (x + double(i));
  const double t = x + kLanczosG + 0.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, x + 0.5) * std::exp(-t) * acc;
}

double reciprocal_gamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  return 1.0 / lanczos_gamma(x);
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw parameter_error("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [p, dp] = legendre(n, x);
    (void)p;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  map_rule(rule, a, b);
  return rule;
}

QuadratureRule gauss_lobatto(int n, double a, double b) {
  if (n < 2) throw parameter_error("gauss_lobatto: need at least two nodes");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = n - 1;
  const double end_weight = 2.0 / (double(n) * m);
  rule.nodes[0] = -1.0;
  rule.nodes[m] = 1.0;
  rule.weights[0] = rule.weights[m] = end_weight;
  // Interior nodes are the roots of P'_m; Newton on P'_m using
  // (1 - x^2) P''_m = 2x P'_m - m(m+1) P_m.
  for (int i = 1; i < (m + 1) / 2; ++i) {
    double x = -std::cos(std::numbers::pi * i / m);
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(m, x);
      const double d2p = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [p, dp] = legendre(m, x);
    (void)dp;
    const double w = end_weight / (p * p);
    rule.nodes[i] = x;
    rule.nodes[m - i] = -x;
    rule.weights[i] = rule.weights[m - i] = w;
  }
  if (m % 2 == 0) {
    const auto [p, dp] = legendre(m, 0.0);
    (void)dp;
    rule.nodes[m / 2] = 0.0;
    rule.weights[m / 2] = end_weight / (p * p);
  }
  map_rule(rule, a, b);
  return rule;
}

std::complex<double> exp_moment0(std::complex<double> z) {
  if (std::abs(z) < 0.5) {
    // sum_n (-z)^n / (n+1)!
    std::complex<double> term = 1.0, sum = 1.0;
    for (int n = 1; n < 30; ++n) {
      term *= -z / double(n + 1);
      sum += term;
    }
    return sum;
  }
  return (1.0 - std::exp(-z)) / z;
}

std::complex<double> exp_moment1(std::complex<double> z) {
  if (std::abs(z) < 0.5) {
    // sum_n (-z)^n / (n! (n+2))
    std::complex<double> power = 1.0, sum = 0.5;
    for (int n = 1; n < 30; ++n) {
      power *= -z / double(n);
      sum += power / double(n + 2);
    }
    return sum;
  }
  return (1.0 - std::exp(-z) * (1.0 + z)) / (z * z);
}

}  // namespace fracdiff
