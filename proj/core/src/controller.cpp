#include "dat/controller.hpp"

#include "dat/care.hpp"
#include "dat/error.hpp"
#include "dat/linalg.hpp"

#include <cmath>
#include <string>

namespace dat {

RobustGains design_gains(const SystemMatrices& mat, const Eigen::MatrixXd& Q1,
                         const Eigen::MatrixXd& Q2, double gamma, const GainMargins& margins) {
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be >= 0");
  if (!(margins.alpha_margin >= 0.0) || !(margins.mu_margin >= 0.0)) {
    throw InvalidArgument("gain margins must be >= 0");
  }
  if (!(margins.beta > 0.0)) throw InvalidArgument("beta must be > 0");
  if (!(margins.nu > 0.0)) throw InvalidArgument("nu must be > 0");

  const CareSolution s1 = solve_care(CareProblem{mat.A, mat.B, Q1});
  const CareSolution s2 = solve_care(CareProblem{mat.A, mat.B, Q2});

  RobustGains g;
  g.Q1 = Q1;
  g.Q2 = Q2;
  g.P1 = s1.P;
  g.P2 = s2.P;
  g.K1 = s1.K;
  g.K2 = s2.K;
  g.alpha = gamma + spectral_norm(mat.B.transpose() * s1.P) + margins.alpha_margin;
  g.mu = gamma + margins.mu_margin;
  g.beta = margins.beta;
  g.nu = margins.nu;
  return g;
}

AdaptiveParams AdaptiveParams::broadcast(int n_nodes, double kappa, double chi, double mu0,
                                         double alpha0) {
  const auto n = static_cast<std::size_t>(n_nodes);
  return AdaptiveParams{std::vector<double>(n, kappa), std::vector<double>(n, chi),
                        std::vector<double>(n, mu0), std::vector<double>(n, alpha0)};
}

void AdaptiveParams::validate(int n_nodes) const {
  const auto n = static_cast<std::size_t>(n_nodes);
  if (kappa.size() != n || chi.size() != n || mu0.size() != n || alpha0.size() != n) {
    throw DimensionError("adaptive parameters need one entry per node (" + std::to_string(n_nodes) + ")");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(kappa[i] > 0.0)) throw InvalidArgument("kappa_" + std::to_string(i) + " must be > 0");
    if (!(chi[i] > 0.0)) throw InvalidArgument("chi_" + std::to_string(i) + " must be > 0");
    if (!(mu0[i] >= 0.0)) throw InvalidArgument("mu0_" + std::to_string(i) + " must be >= 0");
    if (!(alpha0[i] >= 0.0)) throw InvalidArgument("alpha0_" + std::to_string(i) + " must be >= 0");
  }
}

std::string_view to_string(VariantTag tag) {
  switch (tag) {
    case VariantTag::robust: return "robust";
    case VariantTag::adaptive: return "adaptive";
    case VariantTag::continuous: return "continuous";
  }
  return "unknown";
}

ControllerVariant ControllerVariant::robust() {
  return ControllerVariant(VariantTag::robust);
}

ControllerVariant ControllerVariant::adaptive(AdaptiveParams params) {
  ControllerVariant v(VariantTag::adaptive);
  v.adaptive_ = std::move(params);
  return v;
}

ControllerVariant ControllerVariant::continuous(BoundaryLayer layer) {
  ControllerVariant v(VariantTag::continuous);
  v.layer_ = layer;
  return v;
}

const BoundaryLayer& ControllerVariant::layer() const {
  if (!layer_) throw InvalidArgument("only the continuous variant has a boundary layer");
  return *layer_;
}

const AdaptiveParams& ControllerVariant::adaptive_params() const {
  if (!adaptive_) throw InvalidArgument("only the adaptive variant has adaptive parameters");
  return *adaptive_;
}

Eigen::VectorXd ControllerVariant::direction(const Eigen::VectorXd& x, double t) const {
  if (tag_ == VariantTag::continuous) return h_eps(x, *layer_, t);
  return h(x);
}

double phi(const Eigen::VectorXd& x_i, const Eigen::VectorXd& r_i, double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("nu must be > 0");
  return (x_i - r_i).norm() + nu;
}

double vartheta(const Eigen::VectorXd& r_i, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("beta must be > 0");
  return r_i.norm() + beta;
}

Eigen::VectorXd consensus_signal(const Eigen::MatrixXd& K1, const Eigen::VectorXd& p_i,
                                 std::span<const Eigen::VectorXd> p_neighbors) {
  Eigen::VectorXd diff = Eigen::VectorXd::Zero(p_i.size());
  for (const Eigen::VectorXd& p_j : p_neighbors) {
    if (p_j.size() != p_i.size()) throw DimensionError("neighbor state dimension mismatch");
    diff += p_i - p_j;
  }
  return K1 * diff;
}

double effective_alpha(const ControllerVariant& v, const RobustGains& g, double alpha_i) {
  return v.tag() == VariantTag::adaptive ? alpha_i : g.alpha;
}

double effective_mu(const ControllerVariant& v, const RobustGains& g, double mu_i) {
  return v.tag() == VariantTag::adaptive ? mu_i : g.mu;
}

namespace {

void check_node_dims(const RobustGains& g, const SystemMatrices* mat, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b, const Eigen::VectorXd& consensus) {
  const Eigen::Index n = g.K1.cols();
  if (a.size() != n || b.size() != n) {
    throw DimensionError("node state dimension does not match gain matrices (n = " +
                         std::to_string(n) + ")");
  }
  if (consensus.size() != g.K1.rows()) {
    throw DimensionError("consensus signal must have dimension p = " + std::to_string(g.K1.rows()));
  }
  if (mat && (mat->state_dim() != n || mat->input_dim() != g.K1.rows())) {
    throw DimensionError("system matrices do not match gain matrices");
  }
}

}  // namespace

Eigen::VectorXd filter_rhs(const ControllerVariant& v, const RobustGains& g,
                           const SystemMatrices& mat, const Eigen::VectorXd& s_i,
                           const Eigen::VectorXd& r_i, const Eigen::VectorXd& consensus,
                           double alpha_i, double t) {
  check_node_dims(g, &mat, s_i, r_i, consensus);
  const Eigen::VectorXd p_i = s_i + r_i;
  const double coupling = effective_alpha(v, g, alpha_i) * vartheta(r_i, g.beta);
  return mat.A * s_i + mat.B * (g.K1 * (p_i - r_i)) +
         coupling * (mat.B * v.direction(consensus, t));
}

Eigen::VectorXd filter_rhs(const ControllerVariant& v, const RobustGains& g,
                           const SystemMatrices& mat, const Eigen::VectorXd& s_i,
                           const Eigen::VectorXd& r_i,
                           std::span<const Eigen::VectorXd> p_neighbors, double alpha_i, double t) {
  const Eigen::VectorXd consensus = consensus_signal(g.K1, s_i + r_i, p_neighbors);
  return filter_rhs(v, g, mat, s_i, r_i, consensus, alpha_i, t);
}

Eigen::VectorXd control_input(const ControllerVariant& v, const RobustGains& g,
                              const Eigen::VectorXd& x_i, const Eigen::VectorXd& p_i,
                              const Eigen::VectorXd& r_i, const Eigen::VectorXd& consensus,
                              double mu_i, double alpha_i, double t) {
  check_node_dims(g, nullptr, x_i, r_i, consensus);
  if (p_i.size() != x_i.size()) throw DimensionError("p_i dimension mismatch");
  const Eigen::VectorXd k2_xt = g.K2 * (x_i - p_i);
  const double tracking = effective_mu(v, g, mu_i) * phi(x_i, r_i, g.nu);
  const double coupling = effective_alpha(v, g, alpha_i) * vartheta(r_i, g.beta);
  return g.K1 * (p_i - r_i) + k2_xt + tracking * v.direction(k2_xt, t) +
         coupling * v.direction(consensus, t);
}

Eigen::VectorXd control_input(const ControllerVariant& v, const RobustGains& g,
                              const Eigen::VectorXd& x_i, const Eigen::VectorXd& p_i,
                              const Eigen::VectorXd& r_i,
                              std::span<const Eigen::VectorXd> p_neighbors, double mu_i,
                              double alpha_i, double t) {
  const Eigen::VectorXd consensus = consensus_signal(g.K1, p_i, p_neighbors);
  return control_input(v, g, x_i, p_i, r_i, consensus, mu_i, alpha_i, t);
}

GainRates adaptive_gain_rates(const AdaptiveParams& params, int node,
                              const Eigen::VectorXd& k2_xtilde, const Eigen::VectorXd& consensus,
                              double phi_i, double vartheta_i) {
  if (node < 0 || node >= params.n_nodes()) throw InvalidArgument("node index out of range");
  if (!(phi_i > 0.0) || !(vartheta_i > 0.0)) {
    throw InvalidArgument("phi_i and vartheta_i must be > 0");
  }
  const auto i = static_cast<std::size_t>(node);
  return GainRates{params.kappa[i] * phi_i * k2_xtilde.norm(),
                   params.chi[i] * vartheta_i * consensus.norm()};
}

}  // namespace dat
