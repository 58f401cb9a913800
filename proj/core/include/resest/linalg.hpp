// Small dense linear-algebra helpers on top of Eigen.
#pragma once

#include <Eigen/Dense>

namespace resest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default relative threshold for numerical rank decisions.
inline constexpr double kDefaultRankTol = 1e-8;

/// Orthonormal basis (as columns) of ker(M). Singular values at or below
/// `rel_tol * scale` count as zero, where `scale` defaults to the largest
/// singular value of M. A zero matrix has the whole space as kernel.
Matrix null_space(const Matrix& M, double rel_tol = kDefaultRankTol, double scale = -1.0);

/// Orthonormal basis of range(M) with the same rank convention as null_space.
Matrix range_basis(const Matrix& M, double rel_tol = kDefaultRankTol, double scale = -1.0);

Eigen::Index numerical_rank(const Matrix& M, double rel_tol = kDefaultRankTol,
                            double scale = -1.0);

/// Induced Euclidean norm (largest singular value); 0 for empty matrices.
double spectral_norm(const Matrix& M);

/// 2-norm condition number; +inf for singular or empty-rank matrices.
double condition_number(const Matrix& M);

/// Unique symmetric positive definite square root of a symmetric positive
/// definite matrix, together with its inverse. Throws DomainError when some
/// eigenvalue is below 1e-12 times the largest one.
struct SymmetricRoot {
  Matrix root;
  Matrix inverse_root;
};
SymmetricRoot symmetric_sqrt(const Matrix& P);

/// Same shape and bitwise-equal entries.
template <typename Derived1, typename Derived2>
bool identical(const Eigen::MatrixBase<Derived1>& a, const Eigen::MatrixBase<Derived2>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

/// Largest real part over the spectrum of a square matrix (-inf when empty).
double spectral_abscissa(const Matrix& M);

}  // namespace resest
