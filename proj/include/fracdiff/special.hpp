#pragma once

#include <complex>
#include <vector>

namespace fracdiff {

/// Gamma function by the Lanczos approximation (g = 7, 9 terms), with
/// reflection below 1/2. Relative accuracy ~1e-15 on (0, 3).
double lanczos_gamma(double x);

/// 1/Gamma(x); exactly zero at the poles x = 0, -1, -2, ...
double reciprocal_gamma(double x);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// n-point Gauss-Lobatto rule on [a, b] (both endpoints are nodes), n >= 2.
QuadratureRule gauss_lobatto(int n, double a = -1.0, double b = 1.0);

/// int_0^1 e^{-z u} du and int_0^1 u e^{-z u} du, with series near z = 0.
std::complex<double> exp_moment0(std::complex<double> z);
std::complex<double> exp_moment1(std::complex<double> z);

}  // namespace fracdiff
