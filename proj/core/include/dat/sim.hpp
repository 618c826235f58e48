#pragma once

#include "dat/controller.hpp"
#include "dat/dynamics.hpp"
#include "dat/error.hpp"
#include "dat/graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dat {

// Sampling parameters for the Assumption 3 spot check done at load time.
struct LipschitzSpotCheck {
  int samples = 10000;
  double box_radius = 10.0;
  std::uint64_t seed = 0x5eed;
};

// Complete experiment: network, plant, nonlinearity, tracker, initial
// conditions and integration grid.
struct Scenario {
  UndirectedGraph graph;
  SystemMatrices matrices;
  NonlinearField field;
  ControllerVariant variant;
  RobustGains gains;
  std::vector<Eigen::VectorXd> x0, s0, r0;
  double t_end = 20.0;
  double dt = 1e-3;
  int monitor_stride = 10;
  // Declared bound on ||r_i(t)|| (bounded-reference assumption), audited post-run.
  std::optional<double> reference_bound;
  // Diagnostic mode: force u_i = 0 for every agent.
  bool zero_input = false;
  LipschitzSpotCheck lipschitz;

  int n_nodes() const noexcept { return graph.n_nodes(); }
  int state_dim() const noexcept { return matrices.state_dim(); }
  int input_dim() const noexcept { return matrices.input_dim(); }
};

struct Diagnostic {
  int assumption = 0;  // 1..4 for a standing assumption, 0 for structural problems
  std::string detail;
};

// "Assumption 1 violated: graph not connected", "Assumption 3 spot-check
// failed: ...", or the bare detail for structural problems.
std::string to_string(const Diagnostic& d);

// Every violated invariant, in a stable order. Empty means the scenario is valid.
std::vector<Diagnostic> validate_scenario(const Scenario& sc);

struct NodeSample {
  Eigen::VectorXd x, s, p, r, u;
  double mu = 0.0;     // effective mu (adaptive state or design constant)
  double alpha = 0.0;  // effective alpha
};

struct Sample {
  double t = 0.0;
  std::vector<NodeSample> nodes;
  double V1 = 0.0;
  double V2 = 0.0;
  double consensus_err = 0.0;  // ||(M kron I) p||
  double avg_track_err = 0.0;  // max_i ||x_i - mean_k r_k||
};

struct AbortInfo {
  double t = 0.0;
  int node = -1;
  std::string reason;
};

struct Trajectory {
  VariantTag variant = VariantTag::robust;
  int n_nodes = 0;
  int state_dim = 0;
  int input_dim = 0;
  double dt = 0.0;
  int monitor_stride = 1;
  std::vector<Sample> samples;  // uniform stride, starting at t = 0
  Sample final;                 // state at the last integrated step
  // Per node, max ||r_i(t)|| over every integration step.
  std::vector<double> max_reference_norm;
  std::optional<AbortInfo> abort;

  std::vector<double> times() const;
  std::vector<double> v1_series() const;
  std::vector<double> v2_series() const;
  std::vector<double> consensus_series() const;
  std::vector<double> tracking_series() const;
  std::vector<double> mu_series(int node) const;
  std::vector<double> alpha_series(int node) const;
  // samples x p matrix of u_i.
  Eigen::MatrixXd input_series(int node) const;
};

// Non-finite state during integration. Carries everything integrated so far.
class SimulationAbort : public Error {
 public:
  SimulationAbort(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}

  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

// Fixed-step classical RK4 on the stacked (x_i, s_i, r_i, mu_i, alpha_i)
// state. Validates the scenario first and throws the first violation.
Trajectory simulate(const Scenario& sc);

// Stacking helpers for per-node vectors.
Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& parts);
std::vector<Eigen::VectorXd> unstack(const Eigen::VectorXd& stacked, int block);

// (M kron I_n) p: deviation of each node's block from the network mean.
Eigen::VectorXd consensus_error(const Eigen::VectorXd& p_stacked, int block);

// xi^T (L kron P1) xi
double lyapunov_v1(const Eigen::VectorXd& xi, const Eigen::MatrixXd& L, const Eigen::MatrixXd& P1);

// xt^T (I kron P2) xt
double lyapunov_v2(const Eigen::VectorXd& x_tilde, const Eigen::MatrixXd& P2);

// e_i = ||x_i - (1/N) sum_k r_k||
std::vector<double> average_tracking_error(const std::vector<Eigen::VectorXd>& x,
                                           const std::vector<Eigen::VectorXd>& r);

}  // namespace dat
