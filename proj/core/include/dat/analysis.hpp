#pragma once

#include "dat/sim.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace dat {

struct TimeWindow {
  double t0 = 0.0;
  double t1 = 0.0;
};

// Exponential fit v(t) ~ exp(intercept - eta_hat t).
struct DecayFit {
  double eta_hat = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;  // 0 when ln v has no variance in the window
  TimeWindow window;
  int samples_used = 0;
};

// Least squares on (t, ln v) over samples with t in [t0, t1] and v > 0.
// Throws InvalidArgument with fewer than 10 such samples.
DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values,
                        TimeWindow window);

// [skip_fraction * T, last t with v > floor]. Falls back to the whole
// horizon tail when v never drops below floor.
TimeWindow decay_window(std::span<const double> times, std::span<const double> values,
                        double floor = 1e-8, double skip_fraction = 0.1);

// Times t_{k+1} with v_{k+1} > v_k + slack.
std::vector<double> monotonicity_violations(std::span<const double> times,
                                            std::span<const double> values, double slack);

// factor * dt * max_k |v_{k+1} - v_k| / (t_{k+1} - t_k)
double derivative_slack(std::span<const double> times, std::span<const double> values,
                        double dt, double factor = 10.0);

// Total variation per input channel of a sampled control (rows = samples).
struct ChatteringReport {
  std::vector<double> total_variation;
  std::vector<double> max_step_jump;
};

ChatteringReport total_variation(const Eigen::MatrixXd& u_series);

// True iff max - min over the trailing tail_fraction of the samples is <= tol.
// Throws InvalidArgument on a decreasing series.
bool gain_converged(std::span<const double> series, double tail_fraction, double tol);
std::vector<bool> gains_converged(const std::vector<std::vector<double>>& per_node,
                                  double tail_fraction, double tol);

// lambda_min(Q) / lambda_max(P).
double predicted_eta(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& P);
inline double predicted_eta1(const Eigen::MatrixXd& Q1, const Eigen::MatrixXd& P1) {
  return predicted_eta(Q1, P1);
}
inline double predicted_eta2(const Eigen::MatrixXd& Q2, const Eigen::MatrixXd& P2) {
  return predicted_eta(Q2, P2);
}

// Boundary-layer bound on the consensus energy:
//   V1(t) <= exp(-eta t) V1(0) + tail_gain * eps * int_0^t exp(-eta (t - tau) - c tau) dtau
// with tail_gain = 2 alpha sum_i sup vartheta_i.
struct EnvelopeCheck {
  std::vector<double> envelope;
  std::vector<double> violation_times;
  double worst_ratio = 0.0;  // max V1 / envelope
};

double boundary_layer_integral(double eta, double c, double t);

EnvelopeCheck comparison_envelope(std::span<const double> times, std::span<const double> v1,
                                  double eta, double tail_gain, double epsilon, double c,
                                  double rel_tol = 1e-9);

// Every convergence and chattering check that can be made on one run.
struct RunReport {
  double eta1_pred = 0.0;
  double eta2_pred = 0.0;
  std::optional<DecayFit> v1_fit;
  std::optional<DecayFit> v2_fit;
  double v1_slack = 0.0;
  double v2_slack = 0.0;
  std::vector<double> v1_violations;
  std::vector<double> v2_violations;
  std::vector<ChatteringReport> chattering;  // per node
  std::vector<double> tv_per_node;           // max channel TV per node
  std::vector<bool> gains_converged;         // adaptive runs only
  bool gains_monotone = true;
  double final_tracking_error = 0.0;
  double final_consensus_error = 0.0;
  double max_reference_norm = 0.0;
  std::optional<double> reference_bound;
  bool assumption4_ok = true;
  std::optional<EnvelopeCheck> envelope;  // continuous runs only
};

struct ReportOptions {
  double slack_factor = 10.0;
  double decay_floor = 1e-8;
  double skip_fraction = 0.1;
  double gain_tail_fraction = 0.1;
  double gain_tol = 1e-3;
};

RunReport analyze(const Scenario& sc, const Trajectory& traj, const ReportOptions& opts = {});

}  // namespace dat
