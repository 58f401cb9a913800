// Static analysis of the plant: unobservable subspaces, shared bases,
// redundant observability, Kalman decompositions and partial-observer gains.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "resest/linalg.hpp"

namespace resest {

/// x' = A x + B u, y_i = C_i x + a_i for i = 0..N-1.
struct PlantModel {
  Matrix A;
  Matrix B;
  std::vector<Matrix> C_blocks;

  std::size_t state_dim() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(B.cols()); }
  std::size_t bank_count() const { return C_blocks.size(); }
  std::size_t output_dim(std::size_t i) const { return static_cast<std::size_t>(C_blocks.at(i).rows()); }
  std::size_t total_output_dim() const;

  /// Rows of the banks in `banks`, stacked in the given order.
  Matrix stacked_output(const std::vector<std::size_t>& banks) const;

  /// Throws DimensionError on inconsistent shapes.
  void validate() const;

  friend bool operator==(const PlantModel& a, const PlantModel& b);
};

struct ObservabilityTolerances {
  /// Relative singular-value threshold for rank and null-space decisions.
  double rank_tol = kDefaultRankTol;
  /// Distance of a normalized basis vector from U_i below which it counts as a member.
  double membership_tol = 1e-6;
};

/// Orthonormal basis of the unobservable subspace of (C, A); n x 0 when observable.
///
/// Computed as the largest A-invariant subspace inside ker C by the usual
/// descending iteration U_{k+1} = {x in U_k : A x in U_k}. Each step only
/// takes a rank decision on (I - U U^T) A U, which stays well conditioned
/// even when the Krylov observability matrix does not.
Matrix unobservable_subspace(const Matrix& A, const Matrix& C,
                             double rank_tol = kDefaultRankTol);

bool is_observable(const Matrix& A, const Matrix& C, double rank_tol = kDefaultRankTol);

/// Basis v_1..v_n (columns of V), dual rows w_l^T (rows of W = V^-1) and the
/// indicator table s_i^l (N x n, 1 when v_l is not in U_i).
struct SharedBasis {
  Matrix V;
  Matrix W;
  Eigen::MatrixXi indicators;

  std::size_t state_dim() const { return static_cast<std::size_t>(V.cols()); }
  std::size_t bank_count() const { return static_cast<std::size_t>(indicators.rows()); }
  bool indicator(std::size_t i, std::size_t l) const {
    return indicators(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) != 0;
  }
  /// Number of banks that observe direction l.
  std::vector<std::size_t> column_counts() const;
};

/// Validates a candidate basis. Throws SingularBasis when cond(V) >= 1e12 and
/// BasisMismatch(i) when U_i is not spanned by the v_l it contains.
SharedBasis check_shared_basis(const PlantModel& plant, const Matrix& V,
                               const ObservabilityTolerances& tol = {});

/// Heuristic shared-basis search: identity for fully observable banks, the
/// real eigenbasis when eigenvalues are distinct, and otherwise a greedy
/// merge over the intersection lattice of the U_i. Throws NoSharedBasisFound.
SharedBasis construct_shared_basis(const PlantModel& plant,
                                   const ObservabilityTolerances& tol = {});

/// First bank subset of size N - 2q (0-based, ascending) from which (C', A)
/// is unobservable, or nullopt when the plant is 2q-redundant observable.
/// Throws DomainError unless 2q < N, CombinatorialLimit above 10^6 subsets.
std::optional<std::vector<std::size_t>> find_unobservable_subset(
    const PlantModel& plant, std::size_t q, double rank_tol = kDefaultRankTol);

bool check_redundant_observability(const PlantModel& plant, std::size_t q,
                                   double rank_tol = kDefaultRankTol);

/// Every indicator column has at least 2q+1 ones.
bool verify_indicator_redundancy(const SharedBasis& basis, std::size_t q);

struct KalmanDecomposition {
  Matrix V_obs;    ///< n x o_i, the v_l with s_i^l = 1
  Matrix W_obs;    ///< o_i x n
  Matrix V_unobs;  ///< n x (n - o_i)
  Matrix W_unobs;  ///< (n - o_i) x n
  std::vector<std::size_t> observed;  ///< indices l with s_i^l = 1
  std::size_t observable_dim() const { return observed.size(); }
};

/// Splits the shared basis for bank i and checks the block-triangular
/// structure to 1e-9 (relative). Throws StructureViolation.
KalmanDecomposition kalman_decompose(const PlantModel& plant, const SharedBasis& basis,
                                     std::size_t i);

/// Output-injection gain L with spec(Ao - L Co) near `pole_target`. Poles are
/// spread over [1.25, 0.75] * pole_target and assigned by Ackermann's formula
/// on the dual pair; among single-output reductions the smallest ||L|| whose
/// closed-loop spectrum lies within 0.5 |pole_target| of the target wins.
/// Multi-output pairs that no single channel observes fall back to a direct
/// inversion of Co (full column rank) or to a seeded random output feedback
/// that restores single-output observability.
Matrix design_observer_gain(const Matrix& Ao, const Matrix& Co, double pole_target);

/// Partial observer for one bank.
struct AgentObserver {
  KalmanDecomposition decomposition;
  Matrix L;      ///< o_i x m_i
  Matrix WAV;    ///< W_i A V_i
  Matrix CV;     ///< C_i V_i
  Matrix WB;     ///< W_i B
  std::size_t observable_dim() const { return decomposition.observable_dim(); }
};

struct ObserverBank {
  std::vector<AgentObserver> agents;
  double pole_target = -1.0;
  double hurwitz_margin = 0.1;
};

/// Decomposes every bank and designs its gain. Throws StructureViolation when
/// some W_i A V_i - L_i C_i V_i has an eigenvalue with real part above -margin.
ObserverBank build_observer_bank(const PlantModel& plant, const SharedBasis& basis,
                                 double pole_target = -1.0, double hurwitz_margin = 0.1);

}  // namespace resest
