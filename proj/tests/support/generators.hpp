#pragma once

// Seeded problem generators shared by the unit and acceptance suites.

#include "dat/care.hpp"
#include "dat/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <limits>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace dat::testgen {

// Random spanning tree plus extra edges, so the result is always connected.
inline UndirectedGraph random_connected_graph(std::mt19937_64& rng, int max_nodes) {
  std::uniform_int_distribution<int> n_dist(2, max_nodes);
  const int n = n_dist(rng);
  std::set<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> parent(0, v - 1);
    edges.insert({parent(rng), v});
  }
  std::bernoulli_distribution extra(0.3);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (extra(rng)) edges.insert({i, j});
    }
  }
  return UndirectedGraph(n, std::vector<std::pair<int, int>>(edges.begin(), edges.end()));
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

// Smallest singular value of [A - lambda I, B] over eigenvalues with Re >= 0.
// Zero means not stabilizable; tiny values mean a huge Riccati solution.
inline double stabilizability_margin(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::Index n = A.rows();
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(A).eigenvalues();
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (ev(k).real() < 0.0) continue;
    Eigen::MatrixXcd pbh(n, n + B.cols());
    pbh.leftCols(n) = A.cast<std::complex<double>>() - ev(k) * Eigen::MatrixXcd::Identity(n, n);
    pbh.rightCols(B.cols()) = B.cast<std::complex<double>>();
    margin = std::min(margin, Eigen::JacobiSVD<Eigen::MatrixXcd>(pbh).singularValues().minCoeff());
  }
  return margin;
}

// n <= max_n, p <= min(2, n), Q = M M^T + 0.1 I. Redraws until (A, B) is
// stabilizable with PBH margin >= 0.05, so the Riccati solution stays within
// the range where a 1e-8 relative residual is reachable in double precision.
inline CareProblem random_care_problem(std::mt19937_64& rng, int max_n) {
  std::uniform_int_distribution<int> n_dist(1, max_n);
  for (;;) {
    const int n = n_dist(rng);
    std::uniform_int_distribution<int> p_dist(1, std::min(2, n));
    const int p = p_dist(rng);
    Eigen::MatrixXd A = random_matrix(rng, n, n);
    Eigen::MatrixXd B = random_matrix(rng, n, p);
    const Eigen::MatrixXd M = random_matrix(rng, n, n);
    Eigen::MatrixXd Q = M * M.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Q = 0.5 * (Q + Q.transpose());
    if (is_stabilizable(A, B) && stabilizability_margin(A, B) >= 0.05) return CareProblem{A, B, Q};
  }
}

// Stabilizing CARE solution from the stable invariant subspace of the
// Hamiltonian [[A, -BB^T], [-Q, -A^T]]: P = X2 X1^{-1}. Shares no code with
// the Newton iteration.
inline Eigen::MatrixXd hamiltonian_care(const CareProblem& prob) {
  const Eigen::Index n = prob.A.rows();
  Eigen::MatrixXd H(2 * n, 2 * n);
  H << prob.A, -prob.B * prob.B.transpose(), -prob.Q, -prob.A.transpose();
  Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(H);
  Eigen::MatrixXcd stable(2 * n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (es.eigenvalues()(i).real() < 0.0 && k < n) stable.col(k++) = es.eigenvectors().col(i);
  }
  const Eigen::MatrixXcd X1 = stable.topRows(n);
  const Eigen::MatrixXcd X2 = stable.bottomRows(n);
  const Eigen::MatrixXd P = (X2 * X1.inverse()).real();
  return 0.5 * (P + P.transpose());
}

}  // namespace dat::testgen
