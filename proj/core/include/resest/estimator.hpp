// Resilient observer network: per-bank partial observers feeding median-type
// consensus estimators of the full state, in the general and the
// Lyapunov-weighted form, plus the closed-form bounds and parameter rules
// that go with the weighted form.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "resest/observability.hpp"

namespace resest {

enum class EstimatorVariant { General, Lyapunov };

struct EstimatorConfig {
  double kappa = 0.5;
  double gamma = 2.0;
  EstimatorVariant variant = EstimatorVariant::General;
  /// Lyapunov certificate (P > 0, PA + A^T P <= 0); only read by the Lyapunov variant.
  Matrix P;

  friend bool operator==(const EstimatorConfig& a, const EstimatorConfig& b) {
    return a.kappa == b.kappa && a.gamma == b.gamma && a.variant == b.variant && identical(a.P, b.P);
  }
};

/// Quantities derived from P in the shared-basis coordinates.
struct LyapunovWeights {
  Matrix P_bar;           ///< V^T P V
  Matrix sqrt_P_bar;
  Matrix sqrt_P_bar_inv;
  Matrix W_bar;           ///< sqrt(P_bar) W; row l is w_bar_l^T
  Matrix correction;      ///< V sqrt(P_bar)^-1 W
  double weight_norm = 0; ///< || V sqrt(P_bar)^-1 ||
};

/// Throws InvalidLyapunovCertificate when P is not symmetric positive definite
/// or PA + A^T P has an eigenvalue above 1e-9.
LyapunovWeights make_lyapunov_weights(const Matrix& A, const SharedBasis& basis, const Matrix& P);

/// Largest |sqrt(P_bar)(l, k)| relative to the largest entry, over pairs of
/// directions l, k that some bank tells apart (s_i^l != s_i^k). The weighted
/// comparison of bank i reads w_bar_l^T V_i z_i, which only sees the observed
/// directions, so a nonzero value here biases honest banks and the error
/// bound no longer follows. Zero when P_bar is block diagonal along the
/// indicator pattern, e.g. for P = W^T W.
double indicator_coupling(const LyapunovWeights& weights, const SharedBasis& basis);

/// Everything a running estimator network needs, fixed at construction.
class EstimatorModel {
 public:
  EstimatorModel(PlantModel plant, SharedBasis basis, ObserverBank bank, EstimatorConfig config);

  const PlantModel& plant() const { return plant_; }
  const SharedBasis& basis() const { return basis_; }
  const ObserverBank& bank() const { return bank_; }
  const EstimatorConfig& config() const { return config_; }
  const std::optional<LyapunovWeights>& lyapunov() const { return lyapunov_; }

  std::size_t state_dim() const { return plant_.state_dim(); }
  std::size_t agent_count() const { return plant_.bank_count(); }
  std::size_t observable_dim(std::size_t i) const { return bank_.agents.at(i).observable_dim(); }

  /// Rows that map an estimate to the coordinates compared inside the signum:
  /// W (general) or sqrt(P_bar) W (Lyapunov).
  const Matrix& comparison_rows() const { return compare_; }
  /// comparison_rows() * V_i, applied to z_i.
  const Matrix& partial_comparison(std::size_t i) const { return compare_partial_.at(i); }

  /// Right-hand side of agent i's resilient estimator. `coupling` is
  /// sum_{j in N_i} (xhat_j - xhat_i) over the currently linked neighbors.
  void resilient_rhs(std::size_t i, const Eigen::Ref<const Vector>& xhat,
                     const Eigen::Ref<const Vector>& coupling, const Eigen::Ref<const Vector>& z,
                     const Eigen::Ref<const Vector>& u, Eigen::Ref<Vector> out) const;

 private:
  PlantModel plant_;
  SharedBasis basis_;
  ObserverBank bank_;
  EstimatorConfig config_;
  std::optional<LyapunovWeights> lyapunov_;
  Matrix compare_;
  std::vector<Matrix> compare_partial_;
  Matrix kick_;  // maps the signum vector to state space: V or correction * V
};

/// W_i (A V_i z_i + B u) + L_i (y_i - C_i V_i z_i); empty when o_i = 0.
Vector partial_observer_rhs(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& u,
                            const Eigen::Ref<const Vector>& y, const AgentObserver& observer);

/// General-form resilient right-hand side with neighbor estimates listed explicitly.
Vector resilient_rhs_general(const EstimatorModel& model, std::size_t i, const Vector& xhat,
                             std::span<const Vector> neighbors, const Vector& z, const Vector& u);

/// Lyapunov-weighted resilient right-hand side.
Vector resilient_rhs_lyapunov(const EstimatorModel& model, std::size_t i, const Vector& xhat,
                              std::span<const Vector> neighbors, const Vector& z, const Vector& u);

/// (N n^2 + sqrt(n)) sqrt(N) / (gamma lambda_2) * weight_norm.
double theorem3_bound(std::size_t N, std::size_t n, double gamma, double lambda2,
                      double weight_norm);
double theorem3_bound(std::size_t N, std::size_t n, double gamma, double lambda2,
                      const LyapunovWeights& weights);

/// sqrt(N n) / (gamma lambda_2), the steady-state bound on the disagreement norm W(t).
double disagreement_bound(std::size_t N, std::size_t n, double gamma, double lambda2);

struct GainPair {
  double kappa = 0.0;
  double gamma = 0.0;
};

/// Gains that keep the steady-state error below `s_bar` for any connected
/// graph with at most `N_bar` nodes: gamma from the worst-case lambda_2 of
/// 4 / (N_bar^2 - N_bar), kappa = 1 / gamma, nudged by a few ulps towards
/// a value whose product with gamma rounds to exactly 1 when one exists.
GainPair plug_and_play_params(std::size_t N_bar, std::size_t n, double s_bar, double weight_norm);

/// || z_i - W_i xhat_i ||.
double attack_residual(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& xhat,
                       const AgentObserver& observer);

/// True iff the residual stays above `threshold` for at least `dwell` time
/// units without interruption. `times` must be increasing.
bool detect_attacked(std::span<const double> times, std::span<const double> residuals,
                     double threshold, double dwell);

}  // namespace resest
