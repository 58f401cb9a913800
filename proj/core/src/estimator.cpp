#include "resest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "resest/errors.hpp"
#include "resest/median.hpp"

namespace resest {

LyapunovWeights make_lyapunov_weights(const Matrix& A, const SharedBasis& basis, const Matrix& P) {
  const Eigen::Index n = A.rows();
  if (P.rows() != n || P.cols() != n)
    throw InvalidLyapunovCertificate("Lyapunov certificate P must be n x n");
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff()))
    throw InvalidLyapunovCertificate("Lyapunov certificate P must be symmetric");
  const Matrix Ps = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> pe(Ps, Eigen::EigenvaluesOnly);
  if (!(pe.eigenvalues().minCoeff() > 0.0))
    throw InvalidLyapunovCertificate("Lyapunov certificate P must be positive definite");
  const Matrix lyap = Ps * A + A.transpose() * Ps;
  Eigen::SelfAdjointEigenSolver<Matrix> le(0.5 * (lyap + lyap.transpose()), Eigen::EigenvaluesOnly);
  const double worst = le.eigenvalues().maxCoeff();
  if (worst > 1e-9) {
    std::ostringstream msg;
    msg << "PA + A^T P has eigenvalue " << worst << " > 1e-9";
    throw InvalidLyapunovCertificate(msg.str());
  }

  LyapunovWeights w;
  w.P_bar = basis.V.transpose() * Ps * basis.V;
  try {
    auto root = symmetric_sqrt(w.P_bar);
    w.sqrt_P_bar = std::move(root.root);
    w.sqrt_P_bar_inv = std::move(root.inverse_root);
  } catch (const DomainError&) {
    throw InvalidLyapunovCertificate("V^T P V is not positive definite");
  }
  w.W_bar = w.sqrt_P_bar * basis.W;
  w.correction = basis.V * w.sqrt_P_bar_inv * basis.W;
  w.weight_norm = spectral_norm(basis.V * w.sqrt_P_bar_inv);
  return w;
}

double indicator_coupling(const LyapunovWeights& weights, const SharedBasis& basis) {
  const Matrix& S = weights.sqrt_P_bar;
  const double scale = S.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return 0.0;
  double worst = 0.0;
  for (Eigen::Index l = 0; l < S.rows(); ++l)
    for (Eigen::Index k = 0; k < S.cols(); ++k)
      if (basis.indicators.col(l) != basis.indicators.col(k)) worst = std::max(worst, std::abs(S(l, k)));
  return worst / scale;
}

EstimatorModel::EstimatorModel(PlantModel plant, SharedBasis basis, ObserverBank bank,
                               EstimatorConfig config)
    : plant_(std::move(plant)), basis_(std::move(basis)), bank_(std::move(bank)), config_(std::move(config)) {
  plant_.validate();
  if (!(config_.kappa > 0.0) || !(config_.gamma > 0.0))
    throw DomainError("estimator gains kappa and gamma must be positive");
  if (bank_.agents.size() != plant_.bank_count() || basis_.state_dim() != plant_.state_dim())
    throw DimensionError("estimator: plant, basis and observer bank disagree");
  if (config_.variant == EstimatorVariant::Lyapunov) {
    lyapunov_ = make_lyapunov_weights(plant_.A, basis_, config_.P);
    compare_ = lyapunov_->W_bar;
    kick_ = lyapunov_->correction * basis_.V;
  } else {
    compare_ = basis_.W;
    kick_ = basis_.V;
  }
  for (const AgentObserver& a : bank_.agents) compare_partial_.push_back(compare_ * a.decomposition.V_obs);
}

void EstimatorModel::resilient_rhs(std::size_t i, const Eigen::Ref<const Vector>& xhat,
                                   const Eigen::Ref<const Vector>& coupling,
                                   const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& u,
                                   Eigen::Ref<Vector> out) const {
  out.noalias() = plant_.A.lazyProduct(xhat);
  if (plant_.B.cols() > 0) out.noalias() += plant_.B.lazyProduct(u);
  const Matrix& cz = compare_partial_[i];
  const auto n = static_cast<Eigen::Index>(plant_.state_dim());
  for (Eigen::Index l = 0; l < n; ++l) {
    if (basis_.indicators(static_cast<Eigen::Index>(i), l) == 0) continue;
    const double d = cz.row(l).dot(z) - compare_.row(l).dot(xhat);
    const double sigma = sgn(d);
    if (sigma != 0.0) out += (config_.kappa * sigma) * kick_.col(l);
  }
  out += (config_.kappa * config_.gamma) * coupling;
}

Vector partial_observer_rhs(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& u,
                            const Eigen::Ref<const Vector>& y, const AgentObserver& observer) {
  if (observer.observable_dim() == 0) return Vector(0);
  Vector out = observer.WAV * z;
  if (observer.WB.cols() > 0) out.noalias() += observer.WB * u;
  out.noalias() += observer.L * (y - observer.CV * z);
  return out;
}

namespace {

Vector resilient_rhs_checked(const EstimatorModel& model, EstimatorVariant expected, std::size_t i,
                             const Vector& xhat, std::span<const Vector> neighbors, const Vector& z,
                             const Vector& u) {
  if (model.config().variant != expected)
    throw DomainError("resilient right-hand side called for the wrong estimator variant");
  Vector coupling = Vector::Zero(xhat.size());
  for (const Vector& xj : neighbors) coupling += xj - xhat;
  Vector out(xhat.size());
  model.resilient_rhs(i, xhat, coupling, z, u, out);
  return out;
}

}  // namespace

Vector resilient_rhs_general(const EstimatorModel& model, std::size_t i, const Vector& xhat,
                             std::span<const Vector> neighbors, const Vector& z, const Vector& u) {
  return resilient_rhs_checked(model, EstimatorVariant::General, i, xhat, neighbors, z, u);
}

Vector resilient_rhs_lyapunov(const EstimatorModel& model, std::size_t i, const Vector& xhat,
                              std::span<const Vector> neighbors, const Vector& z, const Vector& u) {
  return resilient_rhs_checked(model, EstimatorVariant::Lyapunov, i, xhat, neighbors, z, u);
}

double theorem3_bound(std::size_t N, std::size_t n, double gamma, double lambda2, double weight_norm) {
  if (N == 0 || n == 0 || !(gamma > 0.0) || !(lambda2 > 0.0) || !(weight_norm > 0.0))
    throw DomainError("theorem3_bound: N, n, gamma, lambda_2 and the weight norm must be positive");
  const double Nd = static_cast<double>(N);
  const double nd = static_cast<double>(n);
  return (Nd * nd * nd + std::sqrt(nd)) * std::sqrt(Nd) / (gamma * lambda2) * weight_norm;
}

double theorem3_bound(std::size_t N, std::size_t n, double gamma, double lambda2,
                      const LyapunovWeights& weights) {
  return theorem3_bound(N, n, gamma, lambda2, weights.weight_norm);
}

double disagreement_bound(std::size_t N, std::size_t n, double gamma, double lambda2) {
  if (N == 0 || n == 0 || !(gamma > 0.0) || !(lambda2 > 0.0))
    throw DomainError("disagreement_bound: arguments must be positive");
  return std::sqrt(static_cast<double>(N * n)) / (gamma * lambda2);
}

GainPair plug_and_play_params(std::size_t N_bar, std::size_t n, double s_bar, double weight_norm) {
  if (N_bar < 2 || n == 0 || !(s_bar > 0.0) || !(weight_norm > 0.0))
    throw DomainError("plug_and_play_params: need N_bar >= 2, n >= 1, s_bar > 0, weight norm > 0");
  const double Nb = static_cast<double>(N_bar);
  const double nd = static_cast<double>(n);
  const double worst_lambda2 = 4.0 * s_bar / (Nb * Nb - Nb);
  GainPair g;
  g.gamma = weight_norm * std::sqrt(Nb) / worst_lambda2 * (Nb * nd * nd + std::sqrt(nd));
  g.kappa = 1.0 / g.gamma;
  for (int step = 0; step < 4 && g.kappa * g.gamma != 1.0; ++step) {
    g.kappa = std::nextafter(g.kappa, g.kappa * g.gamma > 1.0 ? 0.0 : 2.0 * g.kappa);
  }
  return g;
}

double attack_residual(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& xhat,
                       const AgentObserver& observer) {
  if (observer.observable_dim() == 0) return 0.0;
  return (z - observer.decomposition.W_obs * xhat).norm();
}

bool detect_attacked(std::span<const double> times, std::span<const double> residuals,
                     double threshold, double dwell) {
  if (times.size() != residuals.size()) throw DimensionError("detect_attacked: size mismatch");
  if (!(threshold > 0.0) || !(dwell > 0.0)) throw DomainError("detect_attacked: threshold and dwell must be positive");
  bool above = false;
  double since = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (residuals[k] > threshold) {
      if (!above) {
        above = true;
        since = times[k];
      }
      if (times[k] - since >= dwell) return true;
    } else {
      above = false;
    }
  }
  return false;
}

}  // namespace resest
