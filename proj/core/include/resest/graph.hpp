// Undirected communication graphs: Laplacian, connectivity, algebraic
// connectivity, and the orthonormal complement of the consensus direction.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "resest/linalg.hpp"

namespace resest {

/// Undirected, unweighted graph on `node_count()` nodes. Adjacency is
/// symmetric with entries in {0,1} and a zero diagonal; the constructor
/// rejects anything else.
class Topology {
 public:
  Topology() = default;
  explicit Topology(Eigen::MatrixXi adjacency);

  static Topology ring(std::size_t n);
  static Topology complete(std::size_t n);
  static Topology path(std::size_t n);
  static Topology empty(std::size_t n);
  /// Build from a preset name ("ring", "complete", "path", "empty").
  static Topology preset(const std::string& name, std::size_t n);

  std::size_t node_count() const { return static_cast<std::size_t>(adjacency_.rows()); }
  const Eigen::MatrixXi& adjacency() const { return adjacency_; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  std::size_t edge_count() const;

  /// Subgraph induced by the nodes with `keep[i] == true`; node order is preserved.
  Topology induced(const std::vector<bool>& keep) const;

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.adjacency_ == b.adjacency_;
  }

 private:
  Eigen::MatrixXi adjacency_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

/// L = D - A.
Matrix laplacian(const Topology& topology);

/// Breadth-first reachability from node 0. The one-node graph is connected;
/// the zero-node graph is not.
bool is_connected(const Topology& topology);

/// Second-smallest eigenvalue of a Laplacian. Throws DimensionError for N < 2.
double algebraic_connectivity(const Matrix& L);

/// N x (N-1) matrix R with orthonormal columns orthogonal to 1_N (Householder
/// completion). Consumers may rely only on R^T R = I and 1^T R = 0.
Matrix orthonormal_complement(std::size_t n);

}  // namespace resest
