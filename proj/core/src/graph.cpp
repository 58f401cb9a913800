#include "resest/graph.hpp"

#include <queue>

#include "resest/errors.hpp"

namespace resest {

Topology::Topology(Eigen::MatrixXi adjacency) : adjacency_(std::move(adjacency)) {
  const Eigen::Index n = adjacency_.rows();
  if (adjacency_.cols() != n) throw DimensionError("adjacency matrix must be square");
  neighbors_.assign(static_cast<std::size_t>(n), {});
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency_(i, i) != 0) throw DomainError("adjacency matrix must have a zero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      const int a = adjacency_(i, j);
      if (a != 0 && a != 1) throw DomainError("adjacency entries must be 0 or 1");
      if (a != adjacency_(j, i)) throw DomainError("adjacency matrix must be symmetric");
      if (a == 1) neighbors_[static_cast<std::size_t>(i)].push_back(static_cast<std::size_t>(j));
    }
  }
}

Topology Topology::empty(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return Topology(Eigen::MatrixXi::Zero(m, m));
}

Topology Topology::ring(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(m, m);
  if (m >= 2) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index j = (i + 1) % m;
      if (i != j) a(i, j) = a(j, i) = 1;
    }
  }
  return Topology(std::move(a));
}

Topology Topology::complete(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXi a = Eigen::MatrixXi::Ones(m, m);
  a.diagonal().setZero();
  return Topology(std::move(a));
}

Topology Topology::path(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(m, m);
  for (Eigen::Index i = 0; i + 1 < m; ++i) a(i, i + 1) = a(i + 1, i) = 1;
  return Topology(std::move(a));
}

Topology Topology::preset(const std::string& name, std::size_t n) {
  if (name == "ring") return ring(n);
  if (name == "complete") return complete(n);
  if (name == "path") return path(n);
  if (name == "empty") return empty(n);
  throw DomainError("unknown topology preset '" + name + "'");
}

std::size_t Topology::edge_count() const {
  return static_cast<std::size_t>(adjacency_.sum() / 2);
}

Topology Topology::induced(const std::vector<bool>& keep) const {
  if (keep.size() != node_count()) throw DimensionError("induced: mask size mismatch");
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i]) idx.push_back(static_cast<Eigen::Index>(i));
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXi a(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) a(r, c) = adjacency_(idx[r], idx[c]);
  return Topology(std::move(a));
}

Matrix laplacian(const Topology& topology) {
  const Matrix a = topology.adjacency().cast<double>();
  Matrix L = -a;
  L.diagonal() = a.rowwise().sum();
  return L;
}

bool is_connected(const Topology& topology) {
  const std::size_t n = topology.node_count();
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    for (std::size_t j : topology.neighbors(i)) {
      if (!seen[j]) {
        seen[j] = true;
        ++reached;
        frontier.push(j);
      }
    }
  }
  return reached == n;
}

double algebraic_connectivity(const Matrix& L) {
  if (L.rows() != L.cols()) throw DimensionError("algebraic_connectivity: Laplacian must be square");
  if (L.rows() < 2) throw DimensionError("algebraic_connectivity: needs at least two nodes");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(L, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(1);  // ascending order
}

Matrix orthonormal_complement(std::size_t n) {
  if (n < 2) throw DimensionError("orthonormal_complement: needs N >= 2");
  const auto m = static_cast<Eigen::Index>(n);
  const Matrix ones = Matrix::Ones(m, 1);
  Eigen::HouseholderQR<Matrix> qr(ones);
  const Matrix Q = qr.householderQ() * Matrix::Identity(m, m);
  return Q.rightCols(m - 1);
}

}  // namespace resest
