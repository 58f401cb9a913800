#include <doctest.h>

#include <cmath>
#include <limits>

#include "resest/errors.hpp"
#include "resest/linalg.hpp"

using namespace resest;

TEST_CASE("null space and range of a rank-deficient matrix") {
  Matrix M(3, 3);
  M << 1, 2, 3, 2, 4, 6, 1, 0, 1;
  const Matrix K = null_space(M);
  REQUIRE(K.cols() == 1);
  CHECK((M * K).norm() < 1e-12);
  CHECK(std::abs(K.norm() - 1.0) < 1e-12);
  CHECK(numerical_rank(M) == 2);
  const Matrix R = range_basis(M);
  CHECK(R.cols() == 2);
  CHECK((R.transpose() * R - Matrix::Identity(2, 2)).norm() < 1e-12);
  // Every column of M lies in the computed range.
  CHECK((M - R * (R.transpose() * M)).norm() < 1e-12);
}

TEST_CASE("zero matrix has the whole space as kernel") {
  CHECK(null_space(Matrix::Zero(2, 4)).cols() == 4);
  CHECK(numerical_rank(Matrix::Zero(3, 3)) == 0);
  CHECK(spectral_norm(Matrix(0, 0)) == 0.0);
}

TEST_CASE("condition number and spectral norm") {
  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 4, 2, 0.5;
  CHECK(spectral_norm(D) == doctest::Approx(4.0));
  CHECK(condition_number(D) == doctest::Approx(8.0));
  D(2, 2) = 0.0;
  CHECK(condition_number(D) == std::numeric_limits<double>::infinity());
}

TEST_CASE("symmetric square root") {
  Matrix P(2, 2);
  P << 5, 2, 2, 2;
  const auto r = symmetric_sqrt(P);
  CHECK((r.root * r.root - P).norm() < 1e-12);
  CHECK((r.root - r.root.transpose()).norm() < 1e-14);
  CHECK((r.root * r.inverse_root - Matrix::Identity(2, 2)).norm() < 1e-12);

  Matrix S(2, 2);
  S << 1, 0, 0, -1;
  CHECK_THROWS_AS(symmetric_sqrt(S), DomainError);
}

TEST_CASE("spectral abscissa") {
  Matrix A(2, 2);
  A << 0, 1, -2, -3;  // eigenvalues -1, -2
  CHECK(spectral_abscissa(A) == doctest::Approx(-1.0));
  CHECK(spectral_abscissa(Matrix(0, 0)) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("identical compares shape before values") {
  CHECK(identical(Matrix::Zero(2, 3), Matrix::Zero(2, 3)));
  CHECK_FALSE(identical(Matrix::Zero(2, 3), Matrix::Zero(3, 2)));
  CHECK(identical(Matrix(0, 4), Matrix(0, 4)));
}
