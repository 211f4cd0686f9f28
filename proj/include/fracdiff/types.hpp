#pragma once

#include <complex>

#include <Eigen/Core>

namespace fracdiff {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

}  // namespace fracdiff
