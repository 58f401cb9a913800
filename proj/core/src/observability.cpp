#include "resest/observability.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "resest/errors.hpp"

namespace resest {

namespace {

constexpr double kBasisCondLimit = 1e12;
constexpr double kStructureTol = 1e-9;
constexpr double kMaxSubsets = 1e6;

// Distance of unit(v) from span(U), U orthonormal.
double distance_to_span(const Matrix& U, const Vector& v) {
  const double nv = v.norm();
  if (nv == 0.0) return 0.0;
  const Vector u = v / nv;
  if (U.cols() == 0) return 1.0;
  return (u - U * (U.transpose() * u)).norm();
}

// Orthonormal basis of span(S1) ∩ span(S2), both orthonormal.
Matrix intersect(const Matrix& S1, const Matrix& S2, double rank_tol) {
  const Eigen::Index n = S1.rows();
  if (S1.cols() == 0 || S2.cols() == 0) return Matrix(n, 0);
  Matrix stacked(n, S1.cols() + S2.cols());
  stacked << S1, -S2;
  const Matrix K = null_space(stacked, rank_tol, 1.0);
  if (K.cols() == 0) return Matrix(n, 0);
  return range_basis(S1 * K.topRows(S1.cols()), rank_tol, 1.0);
}

bool same_subspace(const Matrix& S1, const Matrix& S2, double rank_tol) {
  if (S1.cols() != S2.cols()) return false;
  Matrix both(S1.rows(), S1.cols() + S2.cols());
  both << S1, S2;
  return numerical_rank(both, rank_tol, 1.0) == S1.cols();
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
  return r;
}

// Sign convention for basis vectors: unit norm, largest-magnitude entry positive.
Vector normalized(Vector v) {
  v /= v.norm();
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0.0) v = -v;
  return v;
}

std::optional<Matrix> real_eigenbasis(const Matrix& A) {
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<Matrix> es(A);
  if (es.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const double scale = std::max(1.0, spectral_norm(A));
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      if (std::abs(lambda(a) - lambda(b)) <= 1e-6 * scale) return std::nullopt;

  const Eigen::MatrixXcd xi = es.eigenvectors();
  Matrix V(n, n);
  Eigen::Index col = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double im = lambda(k).imag();
    if (std::abs(im) <= 1e-12 * scale) {
      V.col(col++) = normalized(xi.col(k).real());
    } else if (im > 0.0) {
      // One member of each conjugate pair contributes Re and Im parts.
      if (col + 2 > n) return std::nullopt;
      V.col(col++) = normalized(xi.col(k).real());
      V.col(col++) = normalized(xi.col(k).imag());
    }
  }
  if (col != n) return std::nullopt;
  if (condition_number(V) > 1e10) return std::nullopt;
  return V;
}

std::optional<Matrix> lattice_merge_basis(const std::vector<Matrix>& subspaces, Eigen::Index n,
                                          double rank_tol, double membership_tol) {
  // Closure of the nonzero U_i under pairwise intersection.
  std::vector<Matrix> lattice;
  auto add_unique = [&](const Matrix& S) {
    if (S.cols() == 0) return false;
    for (const Matrix& T : lattice)
      if (same_subspace(S, T, rank_tol)) return false;
    lattice.push_back(S);
    return true;
  };
  for (const Matrix& U : subspaces) add_unique(U);
  for (bool grew = true; grew;) {
    grew = false;
    const std::size_t count = lattice.size();
    for (std::size_t a = 0; a < count; ++a)
      for (std::size_t b = a + 1; b < count; ++b)
        grew = add_unique(intersect(lattice[a], lattice[b], rank_tol)) || grew;
  }
  lattice.push_back(Matrix::Identity(n, n));
  std::stable_sort(lattice.begin(), lattice.end(),
                   [](const Matrix& a, const Matrix& b) { return a.cols() < b.cols(); });

  Matrix chosen(n, 0);
  for (const Matrix& S : lattice) {
    Eigen::Index inside = 0;
    for (Eigen::Index c = 0; c < chosen.cols(); ++c)
      if (distance_to_span(S, chosen.col(c)) <= membership_tol) ++inside;
    const Matrix overlap = chosen.cols() > 0 ? intersect(S, range_basis(chosen, rank_tol, 1.0), rank_tol)
                                             : Matrix(n, 0);
    // Part of span(chosen) ∩ S is not generated by chosen vectors inside S: greedy dead end.
    if (overlap.cols() > inside) return std::nullopt;
    const Matrix proj = overlap.cols() > 0 ? Matrix(overlap * overlap.transpose()) : Matrix::Zero(n, n);
    const Matrix fresh = range_basis(S - proj * S, rank_tol, 1.0);
    Matrix next(n, chosen.cols() + fresh.cols());
    next << chosen, fresh;
    chosen = std::move(next);
  }
  if (chosen.cols() != n) return std::nullopt;
  for (Eigen::Index c = 0; c < n; ++c) chosen.col(c) = normalized(chosen.col(c));
  return chosen;
}

}  // namespace

std::size_t PlantModel::total_output_dim() const {
  std::size_t m = 0;
  for (const Matrix& C : C_blocks) m += static_cast<std::size_t>(C.rows());
  return m;
}

Matrix PlantModel::stacked_output(const std::vector<std::size_t>& banks) const {
  Eigen::Index rows = 0;
  for (std::size_t i : banks) rows += C_blocks.at(i).rows();
  Matrix C(rows, A.cols());
  Eigen::Index r = 0;
  for (std::size_t i : banks) {
    C.middleRows(r, C_blocks[i].rows()) = C_blocks[i];
    r += C_blocks[i].rows();
  }
  return C;
}

void PlantModel::validate() const {
  const Eigen::Index n = A.rows();
  if (n == 0 || A.cols() != n) throw DimensionError("plant: A must be square and nonempty");
  if (B.rows() != n) throw DimensionError("plant: B must have as many rows as A");
  if (C_blocks.empty()) throw DimensionError("plant: at least one sensor bank is required");
  for (std::size_t i = 0; i < C_blocks.size(); ++i) {
    if (C_blocks[i].cols() != n || C_blocks[i].rows() == 0) {
      std::ostringstream msg;
      msg << "plant: C_" << i + 1 << " must be m_i x " << n << " with m_i >= 1";
      throw DimensionError(msg.str());
    }
  }
  if (!A.allFinite() || !B.allFinite()) throw DomainError("plant: non-finite entries");
  for (const Matrix& C : C_blocks)
    if (!C.allFinite()) throw DomainError("plant: non-finite entries");
}

bool operator==(const PlantModel& a, const PlantModel& b) {
  if (!identical(a.A, b.A) || !identical(a.B, b.B) || a.C_blocks.size() != b.C_blocks.size())
    return false;
  for (std::size_t i = 0; i < a.C_blocks.size(); ++i)
    if (!identical(a.C_blocks[i], b.C_blocks[i])) return false;
  return true;
}

Matrix unobservable_subspace(const Matrix& A, const Matrix& C, double rank_tol) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || C.cols() != n) throw DimensionError("unobservable_subspace: shape mismatch");
  Matrix U = null_space(C, rank_tol);
  const double a_scale = spectral_norm(A);
  const Matrix I = Matrix::Identity(n, n);
  while (U.cols() > 0) {
    const Matrix leak = (I - U * U.transpose()) * A * U;
    const Matrix K = null_space(leak, rank_tol, a_scale);
    if (K.cols() == U.cols()) break;
    if (K.cols() == 0) return Matrix(n, 0);
    U = range_basis(U * K, rank_tol, 1.0);
  }
  return U;
}

bool is_observable(const Matrix& A, const Matrix& C, double rank_tol) {
  return unobservable_subspace(A, C, rank_tol).cols() == 0;
}

std::vector<std::size_t> SharedBasis::column_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(indicators.cols()), 0);
  for (Eigen::Index l = 0; l < indicators.cols(); ++l)
    counts[static_cast<std::size_t>(l)] = static_cast<std::size_t>(indicators.col(l).sum());
  return counts;
}

SharedBasis check_shared_basis(const PlantModel& plant, const Matrix& V,
                               const ObservabilityTolerances& tol) {
  plant.validate();
  const Eigen::Index n = plant.A.rows();
  if (V.rows() != n || V.cols() != n) throw DimensionError("check_shared_basis: V must be n x n");
  if (!V.allFinite() || condition_number(V) >= kBasisCondLimit)
    throw SingularBasis("candidate basis is singular or too ill-conditioned (cond >= 1e12)");

  SharedBasis basis;
  basis.V = V;
  basis.W = V.fullPivLu().inverse();
  const auto N = static_cast<Eigen::Index>(plant.bank_count());
  basis.indicators = Eigen::MatrixXi::Ones(N, n);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Matrix U = unobservable_subspace(plant.A, plant.C_blocks[static_cast<std::size_t>(i)], tol.rank_tol);
    Eigen::Index members = 0;
    for (Eigen::Index l = 0; l < n; ++l) {
      if (distance_to_span(U, V.col(l)) <= tol.membership_tol) {
        basis.indicators(i, l) = 0;
        ++members;
      }
    }
    if (members != U.cols()) {
      std::ostringstream msg;
      msg << "unobservable subspace of bank " << i + 1 << " (dim " << U.cols()
          << ") is not spanned by a subset of the basis (" << members << " members)";
      throw BasisMismatch(static_cast<std::size_t>(i), msg.str());
    }
  }
  return basis;
}

SharedBasis construct_shared_basis(const PlantModel& plant, const ObservabilityTolerances& tol) {
  plant.validate();
  const Eigen::Index n = plant.A.rows();
  std::vector<Matrix> subspaces;
  bool all_observable = true;
  for (const Matrix& C : plant.C_blocks) {
    subspaces.push_back(unobservable_subspace(plant.A, C, tol.rank_tol));
    all_observable = all_observable && subspaces.back().cols() == 0;
  }
  if (all_observable) return check_shared_basis(plant, Matrix::Identity(n, n), tol);

  if (auto V = real_eigenbasis(plant.A)) {
    try {
      return check_shared_basis(plant, *V, tol);
    } catch (const BasisMismatch&) {
      // fall through to the lattice merge
    } catch (const SingularBasis&) {
    }
  }

  if (auto V = lattice_merge_basis(subspaces, n, tol.rank_tol, tol.membership_tol)) {
    try {
      return check_shared_basis(plant, *V, tol);
    } catch (const BasisMismatch&) {
    } catch (const SingularBasis&) {
    }
  }
  throw NoSharedBasisFound(
      "no shared basis found for the unobservable subspaces; supply one explicitly "
      "with the scenario's \"basis\" field");
}

std::optional<std::vector<std::size_t>> find_unobservable_subset(const PlantModel& plant,
                                                                 std::size_t q,
                                                                 double rank_tol) {
  plant.validate();
  const std::size_t N = plant.bank_count();
  if (2 * q >= N) throw DomainError("redundant observability needs 2q < N");
  if (binomial(N, 2 * q) > kMaxSubsets)
    throw CombinatorialLimit("more than 1e6 bank subsets to enumerate");
  const std::size_t k = N - 2 * q;

  std::vector<std::size_t> subset(k);
  for (std::size_t j = 0; j < k; ++j) subset[j] = j;
  while (true) {
    if (!is_observable(plant.A, plant.stacked_output(subset), rank_tol)) return subset;
    // Next k-combination in lexicographic order.
    std::size_t j = k;
    while (j > 0 && subset[j - 1] == N - k + (j - 1)) --j;
    if (j == 0) break;
    ++subset[j - 1];
    for (std::size_t t = j; t < k; ++t) subset[t] = subset[t - 1] + 1;
  }
  return std::nullopt;
}

bool check_redundant_observability(const PlantModel& plant, std::size_t q, double rank_tol) {
  return !find_unobservable_subset(plant, q, rank_tol).has_value();
}

bool verify_indicator_redundancy(const SharedBasis& basis, std::size_t q) {
  for (std::size_t c : basis.column_counts())
    if (c < 2 * q + 1) return false;
  return true;
}

KalmanDecomposition kalman_decompose(const PlantModel& plant, const SharedBasis& basis,
                                     std::size_t i) {
  const Eigen::Index n = plant.A.rows();
  if (i >= plant.bank_count() || basis.V.rows() != n)
    throw DimensionError("kalman_decompose: bank index or basis size out of range");
  KalmanDecomposition d;
  std::vector<Eigen::Index> hidden;
  for (Eigen::Index l = 0; l < n; ++l) {
    if (basis.indicator(i, static_cast<std::size_t>(l)))
      d.observed.push_back(static_cast<std::size_t>(l));
    else
      hidden.push_back(l);
  }
  const auto o = static_cast<Eigen::Index>(d.observed.size());
  d.V_obs.resize(n, o);
  d.W_obs.resize(o, n);
  for (Eigen::Index k = 0; k < o; ++k) {
    const auto l = static_cast<Eigen::Index>(d.observed[static_cast<std::size_t>(k)]);
    d.V_obs.col(k) = basis.V.col(l);
    d.W_obs.row(k) = basis.W.row(l);
  }
  const auto h = static_cast<Eigen::Index>(hidden.size());
  d.V_unobs.resize(n, h);
  d.W_unobs.resize(h, n);
  for (Eigen::Index k = 0; k < h; ++k) {
    d.V_unobs.col(k) = basis.V.col(hidden[static_cast<std::size_t>(k)]);
    d.W_unobs.row(k) = basis.W.row(hidden[static_cast<std::size_t>(k)]);
  }

  const Matrix& C = plant.C_blocks[i];
  const double vw = std::max(1.0, spectral_norm(basis.V) * spectral_norm(basis.W));
  const double a_scale = std::max(1.0, spectral_norm(plant.A) * vw);
  const double c_scale = std::max(1.0, spectral_norm(C) * spectral_norm(basis.V));
  auto fail = [&](const char* what) {
    std::ostringstream msg;
    msg << "Kalman decomposition of bank " << i + 1 << ": " << what;
    throw StructureViolation(msg.str());
  };
  if (o > 0 && (d.W_obs * d.V_obs - Matrix::Identity(o, o)).cwiseAbs().maxCoeff() > kStructureTol * vw)
    fail("W_i V_i != I");
  if (h > 0 && (d.W_unobs * d.V_unobs - Matrix::Identity(h, h)).cwiseAbs().maxCoeff() > kStructureTol * vw)
    fail("complement W V != I");
  if (o > 0 && h > 0 && (d.W_obs * plant.A * d.V_unobs).cwiseAbs().maxCoeff() > kStructureTol * a_scale)
    fail("observable rows of A leak into the unobservable block");
  if (h > 0 && (C * d.V_unobs).cwiseAbs().maxCoeff() > kStructureTol * c_scale)
    fail("C_i does not vanish on the unobservable block");
  return d;
}

namespace {

// Ackermann's formula for the dual pair: L = phi(Ao) O^{-1} e_o, with
// O the observability matrix of (c, Ao). Works on Ao / alpha for conditioning.
std::optional<Vector> ackermann_gain(const Matrix& Ao, const Eigen::RowVectorXd& c,
                                     const std::vector<double>& poles) {
  const Eigen::Index o = Ao.rows();
  const double alpha = std::max(1.0, spectral_norm(Ao));
  const Matrix As = Ao / alpha;
  Matrix O(o, o);
  Eigen::RowVectorXd row = c;
  for (Eigen::Index k = 0; k < o; ++k) {
    O.row(k) = row;
    row = row * As;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(O);
  if (qr.rank() < o) return std::nullopt;
  const Vector v = qr.solve(Vector::Unit(o, o - 1));
  Matrix phi = Matrix::Identity(o, o);
  for (double p : poles) phi = phi * (As - (p / alpha) * Matrix::Identity(o, o));
  return Vector(alpha * (phi * v));
}

}  // namespace

Matrix design_observer_gain(const Matrix& Ao, const Matrix& Co, double pole_target) {
  const Eigen::Index o = Ao.rows();
  const Eigen::Index m = Co.rows();
  if (Ao.cols() != o || Co.cols() != o) throw DimensionError("design_observer_gain: shape mismatch");
  if (!(pole_target < 0.0)) throw DomainError("design_observer_gain: pole target must be negative");
  if (o == 0) return Matrix(0, m);
  if (!is_observable(Ao, Co)) throw UnobservablePair("design_observer_gain: (Co, Ao) is not observable");

  std::vector<double> poles(static_cast<std::size_t>(o));
  for (Eigen::Index k = 0; k < o; ++k) {
    const double frac = o == 1 ? 0.0 : (static_cast<double>(k) / static_cast<double>(o - 1) - 0.5) * 2.0;
    poles[static_cast<std::size_t>(k)] = pole_target * (1.0 + 0.25 * frac);
  }

  // Single-output reductions: each channel, then the sum of all channels.
  std::vector<Vector> mixes;
  for (Eigen::Index j = 0; j < m; ++j) mixes.push_back(Vector::Unit(m, j));
  if (m > 1) mixes.push_back(Vector::Ones(m));

  const double radius = 0.5 * std::abs(pole_target);
  std::optional<Matrix> best_in_disc;
  std::optional<Matrix> best_hurwitz;
  auto consider = [&](const Matrix& L) {
    if (!L.allFinite()) return;
    const Eigen::VectorXcd spec = Eigen::EigenSolver<Matrix>(Ao - L * Co, false).eigenvalues();
    bool in_disc = true;
    bool hurwitz = true;
    for (Eigen::Index k = 0; k < spec.size(); ++k) {
      in_disc = in_disc && std::abs(spec(k) - pole_target) <= radius;
      hurwitz = hurwitz && spec(k).real() < 0.5 * pole_target;
    }
    if (in_disc && (!best_in_disc || L.norm() < best_in_disc->norm())) best_in_disc = L;
    if (hurwitz && (!best_hurwitz || L.norm() < best_hurwitz->norm())) best_hurwitz = L;
  };

  for (const Vector& g : mixes) {
    const Eigen::RowVectorXd c = g.transpose() * Co;
    if (!is_observable(Ao, c)) continue;
    if (auto ell = ackermann_gain(Ao, c, poles)) consider(*ell * g.transpose());
  }

  // Outputs that pin down every coordinate: invert Co and place the poles directly.
  if (numerical_rank(Co) == o) {
    const Matrix Cpinv = Co.completeOrthogonalDecomposition().pseudoInverse();
    consider((Ao - Vector(Eigen::Map<const Vector>(poles.data(), o)).asDiagonal().toDenseMatrix()) * Cpinv);
  }

  // Otherwise a random output feedback K0 makes (g^T Co, Ao - K0 Co) observable
  // for almost every g, after which the single-output design applies.
  if (!best_in_disc && m > 1) {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss;
    const double scale = std::max(1.0, Ao.norm()) / std::max(1e-12, Co.norm());
    for (int attempt = 0; attempt < 8 && !best_in_disc; ++attempt) {
      Matrix K0(o, m);
      Vector g(m);
      for (Eigen::Index r = 0; r < o; ++r)
        for (Eigen::Index c = 0; c < m; ++c) K0(r, c) = scale * gauss(rng);
      for (Eigen::Index c = 0; c < m; ++c) g(c) = gauss(rng);
      const Matrix A1 = Ao - K0 * Co;
      const Eigen::RowVectorXd c = g.transpose() * Co;
      if (!is_observable(A1, c)) continue;
      if (auto ell = ackermann_gain(A1, c, poles)) consider(K0 + *ell * g.transpose());
    }
  }
  if (best_in_disc) return *best_in_disc;
  if (best_hurwitz) return *best_hurwitz;
  throw UnobservablePair("design_observer_gain: pole placement did not reach the target spectrum");
}

ObserverBank build_observer_bank(const PlantModel& plant, const SharedBasis& basis,
                                 double pole_target, double hurwitz_margin) {
  ObserverBank bank;
  bank.pole_target = pole_target;
  bank.hurwitz_margin = hurwitz_margin;
  for (std::size_t i = 0; i < plant.bank_count(); ++i) {
    AgentObserver agent;
    agent.decomposition = kalman_decompose(plant, basis, i);
    const KalmanDecomposition& d = agent.decomposition;
    agent.WAV = d.W_obs * plant.A * d.V_obs;
    agent.CV = plant.C_blocks[i] * d.V_obs;
    agent.WB = d.W_obs * plant.B;
    agent.L = design_observer_gain(agent.WAV, agent.CV, pole_target);
    if (d.observable_dim() > 0 && spectral_abscissa(agent.WAV - agent.L * agent.CV) > -hurwitz_margin) {
      std::ostringstream msg;
      msg << "observer of bank " << i + 1 << " is not Hurwitz with margin " << hurwitz_margin;
      throw StructureViolation(msg.str());
    }
    bank.agents.push_back(std::move(agent));
  }
  return bank;
}

}  // namespace resest
