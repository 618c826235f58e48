#include "dat/analysis.hpp"

#include "dat/error.hpp"
#include "dat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dat {
namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("time and value series differ in length");
}

}  // namespace

DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values,
                        TimeWindow window) {
  require_same_length(times, values);
  std::vector<double> ts;
  std::vector<double> ys;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < window.t0 || times[k] > window.t1) continue;
    if (!(values[k] > 0.0)) continue;
    ts.push_back(times[k]);
    ys.push_back(std::log(values[k]));
  }
  if (ts.size() < 10) {
    throw InvalidArgument("decay fit needs at least 10 positive samples in [" +
                          std::to_string(window.t0) + ", " + std::to_string(window.t1) +
                          "], found " + std::to_string(ts.size()));
  }
  const double m = static_cast<double>(ts.size());
  double t_mean = 0.0;
  double y_mean = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    t_mean += ts[k];
    y_mean += ys[k];
  }
  t_mean /= m;
  y_mean /= m;
  double stt = 0.0;
  double sty = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - t_mean) * (ts[k] - t_mean);
    sty += (ts[k] - t_mean) * (ys[k] - y_mean);
    syy += (ys[k] - y_mean) * (ys[k] - y_mean);
  }
  const double slope = stt > 0.0 ? sty / stt : 0.0;
  DecayFit fit;
  fit.eta_hat = -slope;
  fit.intercept = y_mean - slope * t_mean;
  fit.window = window;
  fit.samples_used = static_cast<int>(ts.size());
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double e = ys[k] - (fit.intercept + slope * ts[k]);
      ss_res += e * e;
    }
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

TimeWindow decay_window(std::span<const double> times, std::span<const double> values,
                        double floor, double skip_fraction) {
  require_same_length(times, values);
  if (times.empty()) throw InvalidArgument("empty series");
  const double t_first = times.front();
  const double t_last = times.back();
  TimeWindow w{t_first + skip_fraction * (t_last - t_first), t_last};
  for (std::size_t k = times.size(); k-- > 0;) {
    if (values[k] > floor) {
      w.t1 = times[k];
      break;
    }
  }
  return w;
}

std::vector<double> monotonicity_violations(std::span<const double> times,
                                            std::span<const double> values, double slack) {
  require_same_length(times, values);
  if (times.size() < 2) throw InvalidArgument("monotonicity audit needs at least 2 samples");
  if (!(slack >= 0.0)) throw InvalidArgument("slack must be >= 0");
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    if (values[k + 1] > values[k] + slack) out.push_back(times[k + 1]);
  }
  return out;
}

double derivative_slack(std::span<const double> times, std::span<const double> values,
                        double dt, double factor) {
  require_same_length(times, values);
  double max_rate = 0.0;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double span = times[k + 1] - times[k];
    if (span > 0.0) max_rate = std::max(max_rate, std::abs(values[k + 1] - values[k]) / span);
  }
  return factor * dt * max_rate;
}

ChatteringReport total_variation(const Eigen::MatrixXd& u_series) {
  if (u_series.rows() < 2) throw InvalidArgument("total variation needs at least 2 samples");
  ChatteringReport rep;
  for (Eigen::Index c = 0; c < u_series.cols(); ++c) {
    double tv = 0.0;
    double jump = 0.0;
    for (Eigen::Index k = 0; k + 1 < u_series.rows(); ++k) {
      const double d = std::abs(u_series(k + 1, c) - u_series(k, c));
      tv += d;
      jump = std::max(jump, d);
    }
    rep.total_variation.push_back(tv);
    rep.max_step_jump.push_back(jump);
  }
  return rep;
}

bool gain_converged(std::span<const double> series, double tail_fraction, double tol) {
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
    throw InvalidArgument("tail fraction must lie in (0, 1)");
  }
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be > 0");
  if (series.empty()) throw InvalidArgument("empty gain series");
  for (std::size_t k = 0; k + 1 < series.size(); ++k) {
    if (series[k + 1] < series[k]) {
      throw InvalidArgument("gain series decreases at sample " + std::to_string(k + 1) +
                            "; adaptive gains must be non-decreasing");
    }
  }
  const auto tail = static_cast<std::size_t>(
      std::max(1.0, std::ceil(tail_fraction * static_cast<double>(series.size()))));
  const auto first = series.size() - std::min(tail, series.size());
  const auto [lo, hi] = std::minmax_element(series.begin() + static_cast<std::ptrdiff_t>(first), series.end());
  return (*hi - *lo) <= tol;
}

std::vector<bool> gains_converged(const std::vector<std::vector<double>>& per_node,
                                  double tail_fraction, double tol) {
  std::vector<bool> out;
  out.reserve(per_node.size());
  for (const auto& s : per_node) out.push_back(gain_converged(s, tail_fraction, tol));
  return out;
}

double predicted_eta(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& P) {
  if (!is_symmetric(Q) || !is_spd(Q)) throw InvalidArgument("Q must be symmetric positive definite");
  if (!is_symmetric(P) || !is_spd(P)) throw InvalidArgument("P must be symmetric positive definite");
  return min_eigenvalue_sym(Q) / max_eigenvalue_sym(P);
}

double boundary_layer_integral(double eta, double c, double t) {
  // int_0^t exp(-eta (t - tau) - c tau) dtau
  // expm1 keeps the nearly-equal-rate case free of cancellation.
  const double d = eta - c;
  if (d == 0.0) return t * std::exp(-c * t);
  return -std::exp(-c * t) * std::expm1(-d * t) / d;
}

EnvelopeCheck comparison_envelope(std::span<const double> times, std::span<const double> v1,
                                  double eta, double tail_gain, double epsilon, double c,
                                  double rel_tol) {
  require_same_length(times, v1);
  if (times.empty()) throw InvalidArgument("empty series");
  EnvelopeCheck out;
  const double t0 = times.front();
  const double v0 = v1.front();
  out.envelope.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k] - t0;
    const double env = std::exp(-eta * t) * v0 + tail_gain * epsilon * boundary_layer_integral(eta, c, t);
    out.envelope.push_back(env);
    if (env > 0.0) out.worst_ratio = std::max(out.worst_ratio, v1[k] / env);
    if (v1[k] > env * (1.0 + rel_tol) + 1e-300) out.violation_times.push_back(times[k]);
  }
  return out;
}

RunReport analyze(const Scenario& sc, const Trajectory& traj, const ReportOptions& opts) {
  RunReport rep;
  rep.eta1_pred = predicted_eta1(sc.gains.Q1, sc.gains.P1);
  rep.eta2_pred = predicted_eta2(sc.gains.Q2, sc.gains.P2);

  const std::vector<double> t = traj.times();
  const std::vector<double> v1 = traj.v1_series();
  const std::vector<double> v2 = traj.v2_series();

  auto try_fit = [&](const std::vector<double>& v) -> std::optional<DecayFit> {
    try {
      return fit_decay_rate(t, v, decay_window(t, v, opts.decay_floor, opts.skip_fraction));
    } catch (const InvalidArgument&) {
      return std::nullopt;
    }
  };
  rep.v1_fit = try_fit(v1);
  rep.v2_fit = try_fit(v2);

  if (t.size() >= 2) {
    rep.v1_slack = derivative_slack(t, v1, traj.dt, opts.slack_factor);
    rep.v2_slack = derivative_slack(t, v2, traj.dt, opts.slack_factor);
    rep.v1_violations = monotonicity_violations(t, v1, rep.v1_slack);
    rep.v2_violations = monotonicity_violations(t, v2, rep.v2_slack);
    for (int i = 0; i < traj.n_nodes; ++i) {
      ChatteringReport c = total_variation(traj.input_series(i));
      rep.tv_per_node.push_back(*std::max_element(c.total_variation.begin(), c.total_variation.end()));
      rep.chattering.push_back(std::move(c));
    }
  }

  if (traj.variant == VariantTag::adaptive && !t.empty()) {
    for (int i = 0; i < traj.n_nodes; ++i) {
      bool converged = true;
      for (const auto& series : {traj.mu_series(i), traj.alpha_series(i)}) {
        try {
          converged = gain_converged(series, opts.gain_tail_fraction, opts.gain_tol) && converged;
        } catch (const InvalidArgument&) {
          rep.gains_monotone = false;
          converged = false;
        }
      }
      rep.gains_converged.push_back(converged);
    }
  }

  rep.final_tracking_error = traj.final.avg_track_err;
  rep.final_consensus_error = traj.final.consensus_err;
  if (!traj.max_reference_norm.empty()) {
    rep.max_reference_norm =
        *std::max_element(traj.max_reference_norm.begin(), traj.max_reference_norm.end());
  }
  rep.reference_bound = sc.reference_bound;
  rep.assumption4_ok = !sc.reference_bound || rep.max_reference_norm <= *sc.reference_bound;

  if (traj.variant == VariantTag::continuous && rep.v1_fit && !t.empty()) {
    double vartheta_sum = 0.0;
    for (double r : traj.max_reference_norm) vartheta_sum += r + sc.gains.beta;
    const double tail_gain = 2.0 * sc.gains.alpha * vartheta_sum;
    const BoundaryLayer& layer = sc.variant.layer();
    rep.envelope = comparison_envelope(t, v1, rep.v1_fit->eta_hat, tail_gain, layer.epsilon(), layer.c());
  }
  return rep;
}

}  // namespace dat
