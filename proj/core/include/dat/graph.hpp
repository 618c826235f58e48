#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace dat {

// Edge stored with tail < head. The tail carries +1 in the incidence matrix.
struct Edge {
  int tail = 0;
  int head = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Undirected simple graph on nodes 0..n-1. Construction rejects self-loops,
// duplicate edges and out-of-range endpoints, so every instance is valid.
class UndirectedGraph {
 public:
  UndirectedGraph(int n_nodes, const std::vector<std::pair<int, int>>& edges);

  static UndirectedGraph path(int n);
  static UndirectedGraph cycle(int n);
  static UndirectedGraph complete(int n);

  int n_nodes() const noexcept { return n_nodes_; }
  std::size_t n_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  // Sorted neighbor lists, one per node.
  const std::vector<std::vector<int>>& neighbors() const noexcept { return neighbors_; }
  int degree(int node) const { return static_cast<int>(neighbors_.at(node).size()); }

  Eigen::MatrixXd adjacency() const;
  Eigen::MatrixXd degree_matrix() const;

 private:
  int n_nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> neighbors_;
};

struct GraphSpectrum {
  Eigen::MatrixXd laplacian;
  Eigen::VectorXd eigenvalues;  // ascending
  double lambda2 = 0.0;
};

// L = degree - adjacency.
Eigen::MatrixXd laplacian(const UndirectedGraph& g);

// n x |E| incidence matrix; column k has +1 at edges()[k].tail, -1 at head.
Eigen::MatrixXd incidence(const UndirectedGraph& g);

// Breadth-first search from node 0. A single node counts as connected.
bool is_connected(const UndirectedGraph& g);

// Full Laplacian spectrum. lambda2 is left at 0 for n = 1 and for
// disconnected graphs.
GraphSpectrum spectrum(const UndirectedGraph& g);

// Algebraic connectivity. Throws AssumptionViolation(1) on a disconnected
// graph; a single node has no second eigenvalue and returns 0.
double lambda2(const UndirectedGraph& g);

// M = I - (1/n) 1 1^T.
Eigen::MatrixXd averaging_projector(int n);

}  // namespace dat
