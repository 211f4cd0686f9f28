#include "fracdiff/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fracdiff/error.hpp"

namespace fracdiff {

std::size_t Mesh::size() const noexcept {
  const auto m = static_cast<std::size_t>(per_axis());
  return dimension == 1 ? m : m * m;
}

std::array<double, 2> Mesh::coordinates(std::size_t node) const {
  if (node >= size()) throw index_error("Mesh::coordinates: node out of range");
  const auto m = static_cast<std::size_t>(per_axis());
  const std::size_t ix = node % m;
  const std::size_t iy = node / m;
  const double x = double(ix + 1) * h[0];
  return {x, dimension == 1 ? 0.0 : double(iy + 1) * h[1]};
}

Mesh build_mesh(const DomainSpec& domain, int n) {
  if (domain.dimension != 1 && domain.dimension != 2) {
    throw parameter_error("build_mesh: dimension must be 1 or 2");
  }
  if (n < 2) throw parameter_error("build_mesh: need n >= 2 subdivisions");
  Mesh mesh;
  mesh.dimension = domain.dimension;
  mesh.n = n;
  mesh.extents = domain.extents;
  for (int d = 0; d < domain.dimension; ++d) {
    if (!(domain.extents[d] > 0.0)) throw parameter_error("build_mesh: extents must be positive");
    mesh.h[d] = domain.extents[d] / n;
  }
  if (mesh.dimension == 1) mesh.extents[1] = 0.0;
  return mesh;
}

TensorField diagonal_field(const Vec& a1, const Vec& a2) {
  if (a2.size() != 0 && a2.size() != a1.size()) throw input_error("diagonal_field: length mismatch");
  TensorField out(static_cast<std::size_t>(a1.size()));
  for (Eigen::Index i = 0; i < a1.size(); ++i) {
    if (a2.size() == 0) {
      out[i] = Eigen::MatrixXd::Constant(1, 1, a1[i]);
    } else {
      out[i] = Eigen::MatrixXd::Zero(2, 2);
      out[i](0, 0) = a1[i];
      out[i](1, 1) = a2[i];
    }
  }
  return out;
}

EllipticityReport check_ellipticity(const TensorField& a) {
  if (a.empty()) throw input_error("check_ellipticity: empty coefficient field");
  EllipticityReport rep;
  rep.c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& m = a[i];
    if (m.rows() != m.cols() || m.rows() < 1) throw input_error("check_ellipticity: a must be square");
    if (!m.allFinite()) throw input_error("check_ellipticity: non-finite coefficient");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 0.0) {
      std::ostringstream os;
      os << "check_ellipticity: a is not symmetric at node " << i;
      throw input_error(os.str());
    }
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
    if (lo < rep.c) {
      rep.c = lo;
      rep.worst_node = i;
    }
  }
  rep.ok = rep.c > 0.0;
  return rep;
}

StiffnessOperator::StiffnessOperator(Mesh mesh, Eigen::MatrixXd a_diag, Vec q,
                                     Eigen::SparseMatrix<double> matrix)
    : mesh_(std::move(mesh)), a_(std::move(a_diag)), q_(std::move(q)), matrix_(std::move(matrix)) {
  // Symmetric, so the max column sum equals the max row sum.
  for (int k = 0; k < matrix_.outerSize(); ++k) {
    double s = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix_, k); it; ++it) s += std::abs(it.value());
    norm_inf_ = std::max(norm_inf_, s);
  }
}

bool StiffnessOperator::constant_coefficients() const {
  if (a_.rows() == 0) return true;
  const double a0 = a_(0, 0);
  return (a_.array() == a0).all() && (q_.array() == q_[0]).all();
}

CVec StiffnessOperator::apply(const CVec& v) const {
  CVec out(v.size());
  out.real() = matrix_ * v.real();
  out.imag() = matrix_ * v.imag();
  return out;
}

StiffnessOperator assemble_operator(const Mesh& mesh, const TensorField& a, const Vec& q) {
  const std::size_t N = mesh.size();
  if (N == 0) throw parameter_error("assemble_operator: empty mesh");
  if (a.size() != N) throw input_error("assemble_operator: a has wrong length");
  if (static_cast<std::size_t>(q.size()) != N) throw input_error("assemble_operator: q has wrong length");
  const int d = mesh.dimension;
  for (std::size_t i = 0; i < N; ++i) {
    if (a[i].rows() != d || a[i].cols() != d) throw input_error("assemble_operator: a has wrong shape");
    if (d == 2 && (a[i](0, 1) != 0.0 || a[i](1, 0) != 0.0)) {
      throw unsupported_error("assemble_operator: off-diagonal diffusion coefficients are not supported");
    }
    if (!std::isfinite(q[i]) || q[i] < 0.0) {
      std::ostringstream os;
      os << "assemble_operator: q must be non-negative (node " << i << ", q = " << q[i] << ")";
      throw input_error(os.str());
    }
  }
  const auto rep = check_ellipticity(a);
  if (!rep.ok) {
    std::ostringstream os;
    os << "assemble_operator: ellipticity fails at node " << rep.worst_node << " (min eigenvalue " << rep.c << ")";
    throw input_error(os.str());
  }

  Eigen::MatrixXd ad(N, d);
  for (std::size_t i = 0; i < N; ++i) {
    for (int k = 0; k < d; ++k) ad(i, k) = a[i](k, k);
  }
  const int m = mesh.per_axis();
  auto harmonic = [](double x, double y) { return 2.0 * x * y / (x + y); };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(N * (2 * d + 1));
  for (std::size_t i = 0; i < N; ++i) {
    const int ix = int(i % m), iy = int(i / m);
    double diag = q[i];
    for (int axis = 0; axis < d; ++axis) {
      const double inv_h2 = 1.0 / (mesh.h[axis] * mesh.h[axis]);
      const int pos = axis == 0 ? ix : iy;
      const std::size_t stride = axis == 0 ? 1 : std::size_t(m);
      const double self = ad(i, axis);
      // Lower neighbour (or the boundary, where a is continued by its
      // interior value).
      const double a_lo = pos > 0 ? harmonic(self, ad(i - stride, axis)) : self;
      const double a_hi = pos < m - 1 ? harmonic(self, ad(i + stride, axis)) : self;
      diag += (a_lo + a_hi) * inv_h2;
      if (pos > 0) trip.emplace_back(int(i), int(i - stride), -a_lo * inv_h2);
      if (pos < m - 1) trip.emplace_back(int(i), int(i + stride), -a_hi * inv_h2);
    }
    trip.emplace_back(int(i), int(i), diag);
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return StiffnessOperator(mesh, std::move(ad), q, std::move(A));
}

void write_matrix_market(std::ostream& out, const StiffnessOperator& op) {
  const auto& A = op.matrix();
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  out.precision(17);
  for (int k = 0; k < A.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

ResolventFactorization::ResolventFactorization(const StiffnessOperator& op, CVec m)
    : A_(op.matrix()), m_(std::move(m)), n_(op.size()), bw_(std::size_t(op.bandwidth())) {
  if (static_cast<std::size_t>(m_.size()) != n_) throw input_error("resolvent: shift field has wrong length");
  if (!m_.allFinite()) throw input_error("resolvent: non-finite shift");
  band_.assign(n_ * (bw_ + 1), cplx(0.0));
  const auto& A = op.matrix();
  double scale = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    double row = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      const std::size_t i = std::size_t(it.row()), j = std::size_t(it.col());
      cplx v = it.value();
      if (i == j) v += m_[Eigen::Index(i)];
      row += std::abs(v);
      if (j <= i) at(i, j) = v;
    }
    scale = std::max(scale, row);
  }
  const double floor = kPivotFloor * scale;

  // Right-looking elimination restricted to the band.
  std::vector<cplx> tmp(bw_ + 1);
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t k0 = j > bw_ ? j - bw_ : 0;
    cplx dj = at(j, j);
    for (std::size_t k = k0; k < j; ++k) {
      tmp[j - k] = at(j, k) * at(k, k);  // L_jk d_k
      dj -= tmp[j - k] * at(j, k);
    }
    if (!(std::abs(dj) > floor) || !std::isfinite(std::abs(dj))) {
      std::ostringstream os;
      os << "resolvent factorization breakdown: pivot " << std::abs(dj) << " at row " << j
         << " below " << floor << " (shift m[" << j << "] = " << m_[Eigen::Index(j)] << ")";
      throw numerical_error(os.str());
    }
    at(j, j) = dj;
    const std::size_t i_end = std::min(n_, j + bw_ + 1);
    for (std::size_t i = j + 1; i < i_end; ++i) {
      cplx v = at(i, j);
      const std::size_t ki = i > bw_ ? i - bw_ : 0;
      for (std::size_t k = std::max(k0, ki); k < j; ++k) v -= at(i, k) * tmp[j - k];
      at(i, j) = v / dj;
    }
  }
}

CVec ResolventFactorization::solve_factored(const CVec& rhs) const {
  CVec x = rhs;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t k0 = i > bw_ ? i - bw_ : 0;
    cplx s = x[Eigen::Index(i)];
    for (std::size_t k = k0; k < i; ++k) s -= at(i, k) * x[Eigen::Index(k)];
    x[Eigen::Index(i)] = s;
  }
  for (std::size_t i = 0; i < n_; ++i) x[Eigen::Index(i)] /= at(i, i);
  for (std::size_t i = n_; i-- > 0;) {
    const cplx xi = x[Eigen::Index(i)];
    const std::size_t k0 = i > bw_ ? i - bw_ : 0;
    for (std::size_t k = k0; k < i; ++k) x[Eigen::Index(k)] -= at(i, k) * xi;
  }
  return x;
}

CVec ResolventFactorization::multiply(const CVec& v) const {
  CVec out(v.size());
  out.real() = A_ * v.real();
  out.imag() = A_ * v.imag();
  out.array() += m_.array() * v.array();
  return out;
}

CVec ResolventFactorization::solve(const CVec& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != n_) throw input_error("resolvent solve: rhs has wrong length");
  CVec x = solve_factored(rhs);
  const CVec r = rhs - multiply(x);
  x += solve_factored(r);
  return x;
}

ResolventFactorization factorize_resolvent(const StiffnessOperator& op, const CVec& m) {
  return ResolventFactorization(op, m);
}

CVec resolvent_solve(const StiffnessOperator& op, const CVec& m, const CVec& rhs) {
  return ResolventFactorization(op, m).solve(rhs);
}

double discrete_eigenvalue(const Mesh& mesh, int k, double a, double q) {
  if (mesh.dimension != 1) throw unsupported_error("discrete_eigenvalue: 1D meshes only");
  if (k < 1 || k >= mesh.n) throw index_error("discrete_eigenvalue: mode out of range");
  const double s = std::sin(k * std::numbers::pi / (2.0 * mesh.n));
  return a * 4.0 / (mesh.h[0] * mesh.h[0]) * s * s + q;
}

Vec discrete_eigenvector(const Mesh& mesh, int k) {
  if (mesh.dimension != 1) throw unsupported_error("discrete_eigenvector: 1D meshes only");
  if (k < 1 || k >= mesh.n) throw index_error("discrete_eigenvector: mode out of range");
  Vec v(mesh.per_axis());
  const double scale = std::sqrt(2.0 / mesh.n);
  for (int i = 1; i < mesh.n; ++i) v[i - 1] = scale * std::sin(k * std::numbers::pi * i / mesh.n);
  return v;
}

}  // namespace fracdiff
