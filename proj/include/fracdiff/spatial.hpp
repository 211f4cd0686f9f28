#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fracdiff/types.hpp"

namespace fracdiff {

/// Interval (0, L) or rectangle (0, L1) x (0, L2).
struct DomainSpec {
  int dimension = 1;
  std::array<double, 2> extents{1.0, 1.0};
};

/// Uniform grid with n subdivisions per axis. Only interior nodes are kept;
/// they are numbered lexicographically with x fastest.
struct Mesh {
  int dimension = 1;
  int n = 0;
  std::array<double, 2> extents{1.0, 1.0};
  std::array<double, 2> h{0.0, 0.0};

  int per_axis() const noexcept { return n - 1; }
  std::size_t size() const noexcept;
  /// Coordinates of interior node `node`; the second entry is 0 in 1D.
  std::array<double, 2> coordinates(std::size_t node) const;
};

Mesh build_mesh(const DomainSpec& domain, int n);

/// Per-node symmetric coefficient matrices (1x1 in 1D, 2x2 in 2D).
using TensorField = std::vector<Eigen::MatrixXd>;

/// a(x) = diag(a1(x), a2(x)); 1x1 matrices when `a2` is empty.
TensorField diagonal_field(const Vec& a1, const Vec& a2 = Vec());

struct EllipticityReport {
  bool ok = false;
  double c = 0.0;           // min over nodes of the smallest eigenvalue
  std::size_t worst_node = 0;
};

EllipticityReport check_ellipticity(const TensorField& a);

/// Finite-difference discretization of -div(a grad u) + q u with
/// homogeneous Dirichlet conditions.
class StiffnessOperator {
 public:
  StiffnessOperator(Mesh mesh, Eigen::MatrixXd a_diag, Vec q, Eigen::SparseMatrix<double> matrix);

  const Mesh& mesh() const noexcept { return mesh_; }
  const Eigen::SparseMatrix<double>& matrix() const noexcept { return matrix_; }
  /// Row i holds the diagonal of a at node i.
  const Eigen::MatrixXd& a_diagonal() const noexcept { return a_; }
  const Vec& q() const noexcept { return q_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  /// Half bandwidth of the lexicographic matrix: 1 in 1D, n-1 in 2D.
  int bandwidth() const noexcept { return mesh_.dimension == 1 ? 1 : mesh_.per_axis(); }
  double norm_inf() const noexcept { return norm_inf_; }

  /// True when a is isotropic and a, q are the same at every node.
  bool constant_coefficients() const;

  Vec apply(const Vec& v) const { return matrix_ * v; }
  CVec apply(const CVec& v) const;

 private:
  Mesh mesh_;
  Eigen::MatrixXd a_;
  Vec q_;
  Eigen::SparseMatrix<double> matrix_;
  double norm_inf_ = 0.0;
};

StiffnessOperator assemble_operator(const Mesh& mesh, const TensorField& a, const Vec& q);

/// Matrix Market coordinate dump (full symmetric matrix, 1-based indices).
void write_matrix_market(std::ostream& out, const StiffnessOperator& op);

/// Banded complex-symmetric LDL^T factorization of A + diag(m).
class ResolventFactorization {
 public:
  ResolventFactorization(const StiffnessOperator& op, CVec m);

  const CVec& shift() const noexcept { return m_; }
  /// Solve with one step of iterative refinement.
  CVec solve(const CVec& rhs) const;
  /// (A + diag m) v
  CVec multiply(const CVec& v) const;

 private:
  CVec solve_factored(const CVec& rhs) const;
  cplx& at(std::size_t i, std::size_t j) { return band_[i * (bw_ + 1) + (i - j)]; }
  const cplx& at(std::size_t i, std::size_t j) const { return band_[i * (bw_ + 1) + (i - j)]; }

  Eigen::SparseMatrix<double> A_;
  CVec m_;
  std::size_t n_;
  std::size_t bw_;
  std::vector<cplx> band_;  // unit lower factor, row-major band; diagonal slot holds D
};

/// Pivots below this fraction of ||A + diag m||_inf are treated as singular.
inline constexpr double kPivotFloor = 1e-14;

ResolventFactorization factorize_resolvent(const StiffnessOperator& op, const CVec& m);
CVec resolvent_solve(const StiffnessOperator& op, const CVec& m, const CVec& rhs);

/// Discrete sine eigenpairs of the constant-coefficient 1D operator
/// a * (-1, 2, -1) / h^2 + q: lambda_k and the l2-normalized phi_k, k >= 1.
double discrete_eigenvalue(const Mesh& mesh, int k, double a = 1.0, double q = 0.0);
Vec discrete_eigenvector(const Mesh& mesh, int k);

}  // namespace fracdiff
