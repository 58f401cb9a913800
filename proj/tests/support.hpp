// Shared helpers for the test binaries: seeded random graphs and plants and
// a few independent reference computations.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resest/graph.hpp"
#include "resest/observability.hpp"

namespace testing_support {

inline std::string scenario_path(const std::string& name) {
  return std::string(RESEST_SCENARIO_DIR) + "/" + name;
}

/// Random spanning tree plus each remaining edge with probability `extra`.
inline resest::Topology random_connected(std::size_t n, double extra, std::mt19937_64& rng) {
  Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    const auto a = static_cast<Eigen::Index>(order[k]);
    const auto b = static_cast<Eigen::Index>(order[pick(rng)]);
    adj(a, b) = adj(b, a) = 1;
  }
  std::bernoulli_distribution coin(extra);
  for (Eigen::Index i = 0; i < adj.rows(); ++i)
    for (Eigen::Index j = i + 1; j < adj.cols(); ++j)
      if (adj(i, j) == 0 && coin(rng)) adj(i, j) = adj(j, i) = 1;
  return resest::Topology(adj);
}

/// Any graph: each edge independently with probability p.
inline resest::Topology random_graph(std::size_t n, double p, std::mt19937_64& rng) {
  Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::bernoulli_distribution coin(p);
  for (Eigen::Index i = 0; i < adj.rows(); ++i)
    for (Eigen::Index j = i + 1; j < adj.cols(); ++j)
      if (coin(rng)) adj(i, j) = adj(j, i) = 1;
  return resest::Topology(adj);
}

/// Popov-Belevitch-Hautus test: (C, A) is observable iff [A - lambda I; C]
/// has full column rank at every eigenvalue lambda of A. Shares no code
/// with the library's subspace iteration.
inline bool pbh_observable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, double tol = 1e-7) {
  const Eigen::Index n = A.rows();
  if (C.rows() == 0) return n == 0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  const double scale = std::max({1.0, A.norm(), C.norm()});
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lambda = es.eigenvalues()(k);
    Eigen::MatrixXcd M(n + C.rows(), n);
    M.topRows(n) = A.cast<std::complex<double>>() - lambda * Eigen::MatrixXcd::Identity(n, n);
    M.bottomRows(C.rows()) = C.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    if (svd.singularValues()(n - 1) <= tol * scale) return false;
  }
  return true;
}

/// Every (N - 2q)-subset observable, by PBH and plain recursion.
inline bool brute_force_redundant(const resest::PlantModel& plant, std::size_t q) {
  const std::size_t N = plant.bank_count();
  const std::size_t k = N - 2 * q;
  std::vector<std::size_t> pick;
  bool ok = true;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (!ok) return;
    if (pick.size() == k) {
      ok = pbh_observable(plant.A, plant.stacked_output(pick));
      return;
    }
    for (std::size_t i = start; i < N; ++i) {
      pick.push_back(i);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  return ok;
}

/// Dense plant with small integer entries; some banks see only part of the state.
inline resest::PlantModel random_plant(std::size_t N, std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> entry(-2, 2);
  std::bernoulli_distribution sparse(0.6);
  resest::PlantModel p;
  const auto nn = static_cast<Eigen::Index>(n);
  p.A = Eigen::MatrixXd::Zero(nn, nn);
  // Block structure makes partial observability common.
  const Eigen::Index split = nn > 1 ? nn / 2 : 1;
  for (Eigen::Index r = 0; r < nn; ++r)
    for (Eigen::Index c = 0; c < nn; ++c)
      if ((r < split) == (c < split) || sparse(rng)) p.A(r, c) = entry(rng);
  p.B = Eigen::MatrixXd::Zero(nn, 1);
  for (std::size_t i = 0; i < N; ++i) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, nn);
    for (Eigen::Index c = 0; c < nn; ++c)
      if (sparse(rng)) C(0, c) = entry(rng);
    p.C_blocks.push_back(C);
  }
  return p;
}

}  // namespace testing_support
