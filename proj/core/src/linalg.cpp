#include "resest/linalg.hpp"

#include <cmath>
#include <limits>

#include "resest/errors.hpp"

namespace resest {

namespace {

double threshold(const Eigen::VectorXd& sv, double rel_tol, double scale) {
  const double s = scale >= 0.0 ? scale : (sv.size() > 0 ? sv(0) : 0.0);
  return rel_tol * s;
}

}  // namespace

Matrix null_space(const Matrix& M, double rel_tol, double scale) {
  const Eigen::Index n = M.cols();
  if (M.rows() == 0 || n == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double tol = threshold(sv, rel_tol, scale);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > tol) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Matrix range_basis(const Matrix& M, double rel_tol, double scale) {
  if (M.rows() == 0 || M.cols() == 0) return Matrix(M.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double tol = threshold(sv, rel_tol, scale);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > tol) ++rank;
  return svd.matrixU().leftCols(rank);
}

Eigen::Index numerical_rank(const Matrix& M, double rel_tol, double scale) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double tol = threshold(sv, rel_tol, scale);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > tol) ++rank;
  return rank;
}

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

double condition_number(const Matrix& M) {
  if (M.size() == 0) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Matrix>(M).singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

SymmetricRoot symmetric_sqrt(const Matrix& P) {
  if (P.rows() != P.cols()) throw DimensionError("symmetric_sqrt: matrix is not square");
  if (P.size() == 0) return {Matrix(0, 0), Matrix(0, 0)};
  const Matrix sym = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& lambda = eig.eigenvalues();
  const double lmax = lambda.maxCoeff();
  if (!(lmax > 0.0) || lambda.minCoeff() < 1e-12 * lmax)
    throw DomainError("symmetric_sqrt: matrix is not positive definite");
  const Matrix& Q = eig.eigenvectors();
  const Vector r = lambda.array().sqrt();
  return {Q * r.asDiagonal() * Q.transpose(), Q * r.cwiseInverse().asDiagonal() * Q.transpose()};
}

double spectral_abscissa(const Matrix& M) {
  if (M.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace resest
