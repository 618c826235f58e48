#pragma once

#include "dat/dynamics.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace dat {

// Slack added on top of the minimum parameter values.
struct GainMargins {
  double alpha_margin = 0.0;  // alpha = gamma + ||B^T P1|| + alpha_margin
  double beta = 0.1;
  double mu_margin = 0.0;     // mu = gamma + mu_margin
  double nu = 0.1;
};

// Feedback gains and coupling parameters of the robust tracker.
struct RobustGains {
  Eigen::MatrixXd Q1, Q2;  // design weights, kept for rate predictions
  Eigen::MatrixXd P1, P2;
  Eigen::MatrixXd K1, K2;  // -B^T P1, -B^T P2
  double alpha = 0.0;
  double beta = 0.1;
  double mu = 0.0;
  double nu = 0.1;
};

// Solves the two Riccati equations for P1, P2 and sets K_i = -B^T P_i, then
// picks alpha >= gamma + ||B^T P1||_2, mu >= gamma.
RobustGains design_gains(const SystemMatrices& mat, const Eigen::MatrixXd& Q1,
                         const Eigen::MatrixXd& Q2, double gamma, const GainMargins& margins);

// Per-node adaptation rates and initial values for mu_i(t), alpha_i(t).
struct AdaptiveParams {
  std::vector<double> kappa;
  std::vector<double> chi;
  std::vector<double> mu0;
  std::vector<double> alpha0;

  static AdaptiveParams broadcast(int n_nodes, double kappa, double chi, double mu0 = 0.0,
                                  double alpha0 = 0.0);

  int n_nodes() const noexcept { return static_cast<int>(kappa.size()); }
  // Throws InvalidArgument unless all lists have n_nodes entries, kappa,chi > 0
  // and initial gains >= 0.
  void validate(int n_nodes) const;
};

enum class VariantTag { robust, adaptive, continuous };

std::string_view to_string(VariantTag tag);

class ControllerVariant {
 public:
  static ControllerVariant robust();
  static ControllerVariant adaptive(AdaptiveParams params);
  static ControllerVariant continuous(BoundaryLayer layer);

  VariantTag tag() const noexcept { return tag_; }
  const BoundaryLayer& layer() const;         // continuous only
  const AdaptiveParams& adaptive_params() const;  // adaptive only

  // h for robust/adaptive, h_eps for continuous.
  Eigen::VectorXd direction(const Eigen::VectorXd& x, double t) const;

 private:
  explicit ControllerVariant(VariantTag tag) : tag_(tag) {}

  VariantTag tag_;
  std::optional<BoundaryLayer> layer_;
  std::optional<AdaptiveParams> adaptive_;
};

// ||x_i - r_i|| + nu
double phi(const Eigen::VectorXd& x_i, const Eigen::VectorXd& r_i, double nu);

// ||r_i|| + beta
double vartheta(const Eigen::VectorXd& r_i, double beta);

// sum_{j in N_i} K1 (p_i - p_j)
Eigen::VectorXd consensus_signal(const Eigen::MatrixXd& K1, const Eigen::VectorXd& p_i,
                                 std::span<const Eigen::VectorXd> p_neighbors);

// Coupling gain actually used: the design constant, or the node's adaptive state.
double effective_alpha(const ControllerVariant& v, const RobustGains& g, double alpha_i);
double effective_mu(const ControllerVariant& v, const RobustGains& g, double mu_i);

// Filter right-hand side for s_i:
//   A s_i + B K1 (p_i - r_i) + alpha_eff * vartheta_i * B dir(consensus)
// with p_i = s_i + r_i.
Eigen::VectorXd filter_rhs(const ControllerVariant& v, const RobustGains& g,
                           const SystemMatrices& mat, const Eigen::VectorXd& s_i,
                           const Eigen::VectorXd& r_i, const Eigen::VectorXd& consensus,
                           double alpha_i, double t);

Eigen::VectorXd filter_rhs(const ControllerVariant& v, const RobustGains& g,
                           const SystemMatrices& mat, const Eigen::VectorXd& s_i,
                           const Eigen::VectorXd& r_i,
                           std::span<const Eigen::VectorXd> p_neighbors, double alpha_i, double t);

// Agent input u_i in R^p:
//   K1 (p_i - r_i) + K2 xt_i + mu_eff phi_i dir(K2 xt_i) + alpha_eff vartheta_i dir(consensus)
// with xt_i = x_i - p_i. The last term has no B factor so that B u_i matches
// the filter's coupling term and cancels in the tracking-error dynamics.
Eigen::VectorXd control_input(const ControllerVariant& v, const RobustGains& g,
                              const Eigen::VectorXd& x_i, const Eigen::VectorXd& p_i,
                              const Eigen::VectorXd& r_i, const Eigen::VectorXd& consensus,
                              double mu_i, double alpha_i, double t);

Eigen::VectorXd control_input(const ControllerVariant& v, const RobustGains& g,
                              const Eigen::VectorXd& x_i, const Eigen::VectorXd& p_i,
                              const Eigen::VectorXd& r_i,
                              std::span<const Eigen::VectorXd> p_neighbors, double mu_i,
                              double alpha_i, double t);

struct GainRates {
  double dmu = 0.0;
  double dalpha = 0.0;
};

// dmu_i = kappa_i phi_i ||K2 xt_i||,  dalpha_i = chi_i vartheta_i ||consensus_i||
GainRates adaptive_gain_rates(const AdaptiveParams& params, int node,
                              const Eigen::VectorXd& k2_xtilde, const Eigen::VectorXd& consensus,
                              double phi_i, double vartheta_i);

}  // namespace dat
