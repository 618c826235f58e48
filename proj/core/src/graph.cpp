#include "dat/graph.hpp"

#include "dat/error.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace dat {

UndirectedGraph::UndirectedGraph(int n_nodes, const std::vector<std::pair<int, int>>& edges)
    : n_nodes_(n_nodes), neighbors_(n_nodes > 0 ? static_cast<std::size_t>(n_nodes) : 0) {
  if (n_nodes < 1) {
    throw InvalidArgument("graph must have at least one node, got " + std::to_string(n_nodes));
  }
  edges_.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_nodes || b >= n_nodes) {
      throw InvalidArgument("edge (" + std::to_string(a) + "," + std::to_string(b) +
                            ") references a node outside 0.." + std::to_string(n_nodes - 1));
    }
    if (a == b) {
      throw InvalidArgument("self-loop on node " + std::to_string(a));
    }
    edges_.push_back(Edge{std::min(a, b), std::max(a, b)});
  }
  std::vector<Edge> sorted = edges_;
  std::sort(sorted.begin(), sorted.end());
  if (auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end()) {
    throw InvalidArgument("duplicate edge (" + std::to_string(dup->tail) + "," +
                          std::to_string(dup->head) + ")");
  }
  for (const Edge& e : edges_) {
    neighbors_[e.tail].push_back(e.head);
    neighbors_[e.head].push_back(e.tail);
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
  }
}

UndirectedGraph UndirectedGraph::path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return UndirectedGraph(n, e);
}

UndirectedGraph UndirectedGraph::cycle(int n) {
  if (n < 3) throw InvalidArgument("a simple cycle needs at least 3 nodes");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return UndirectedGraph(n, e);
}

UndirectedGraph UndirectedGraph::complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return UndirectedGraph(n, e);
}

Eigen::MatrixXd UndirectedGraph::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_nodes_, n_nodes_);
  for (const Edge& e : edges_) {
    a(e.tail, e.head) = 1.0;
    a(e.head, e.tail) = 1.0;
  }
  return a;
}

Eigen::MatrixXd UndirectedGraph::degree_matrix() const {
  Eigen::VectorXd d(n_nodes_);
  for (int i = 0; i < n_nodes_; ++i) d(i) = static_cast<double>(degree(i));
  return d.asDiagonal();
}

Eigen::MatrixXd laplacian(const UndirectedGraph& g) {
  return g.degree_matrix() - g.adjacency();
}

Eigen::MatrixXd incidence(const UndirectedGraph& g) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(g.n_nodes(), static_cast<Eigen::Index>(g.n_edges()));
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const Edge& e = g.edges()[k];
    d(e.tail, static_cast<Eigen::Index>(k)) = 1.0;
    d(e.head, static_cast<Eigen::Index>(k)) = -1.0;
  }
  return d;
}

bool is_connected(const UndirectedGraph& g) {
  std::vector<char> seen(static_cast<std::size_t>(g.n_nodes()), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int w : g.neighbors()[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == g.n_nodes();
}

GraphSpectrum spectrum(const UndirectedGraph& g) {
  GraphSpectrum s;
  s.laplacian = laplacian(g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.laplacian, Eigen::EigenvaluesOnly);
  s.eigenvalues = eig.eigenvalues();  // already ascending
  if (g.n_nodes() > 1 && is_connected(g)) {
    s.lambda2 = s.eigenvalues(1);
  }
  return s;
}

double lambda2(const UndirectedGraph& g) {
  if (!is_connected(g)) {
    throw AssumptionViolation(1, "graph not connected");
  }
  return spectrum(g).lambda2;
}

Eigen::MatrixXd averaging_projector(int n) {
  if (n < 1) throw InvalidArgument("averaging projector needs n >= 1");
  return Eigen::MatrixXd::Identity(n, n) -
         Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
}

}  // namespace dat
