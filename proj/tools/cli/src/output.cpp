#include "dat/cli/output.hpp"

#include <charconv>
#include <system_error>

namespace dat::cli {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void put_vector(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) os << ',' << format_double(v(k));
}

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

json fit_json(const std::optional<DecayFit>& fit) {
  if (!fit) return nullptr;
  return json{{"eta_hat", fit->eta_hat},
              {"intercept", fit->intercept},
              {"r_squared", fit->r_squared},
              {"window", {fit->window.t0, fit->window.t1}},
              {"samples_used", fit->samples_used}};
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,node";
  for (const char* name : {"x", "s", "p", "r"}) {
    for (int k = 0; k < traj.state_dim; ++k) os << ',' << name << '_' << k;
  }
  for (int k = 0; k < traj.input_dim; ++k) os << ",u_" << k;
  os << ",mu,alpha,V1,V2,consensus_err,avg_track_err\n";

  for (const Sample& s : traj.samples) {
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
      const NodeSample& ns = s.nodes[i];
      os << format_double(s.t) << ',' << i;
      put_vector(os, ns.x);
      put_vector(os, ns.s);
      put_vector(os, ns.p);
      put_vector(os, ns.r);
      put_vector(os, ns.u);
      os << ',' << format_double(ns.mu) << ',' << format_double(ns.alpha) << ','
         << format_double(s.V1) << ',' << format_double(s.V2) << ','
         << format_double(s.consensus_err) << ',' << format_double(s.avg_track_err) << '\n';
    }
  }
  if (traj.abort) {
    os << "# aborted t=" << format_double(traj.abort->t) << " node=" << traj.abort->node
       << " reason=" << traj.abort->reason << '\n';
  }
}

json trajectory_json(const Trajectory& traj) {
  json j;
  j["variant"] = std::string(to_string(traj.variant));
  j["n_nodes"] = traj.n_nodes;
  j["state_dim"] = traj.state_dim;
  j["input_dim"] = traj.input_dim;
  j["dt"] = traj.dt;
  j["monitor_stride"] = traj.monitor_stride;
  j["t"] = traj.times();
  j["V1"] = traj.v1_series();
  j["V2"] = traj.v2_series();
  j["consensus_err"] = traj.consensus_series();
  j["avg_track_err"] = traj.tracking_series();
  json nodes = json::array();
  for (int i = 0; i < traj.n_nodes; ++i) {
    json x = json::array(), p = json::array(), r = json::array(), u = json::array();
    for (const Sample& s : traj.samples) {
      const NodeSample& ns = s.nodes[static_cast<std::size_t>(i)];
      x.push_back(to_json(ns.x));
      p.push_back(to_json(ns.p));
      r.push_back(to_json(ns.r));
      u.push_back(to_json(ns.u));
    }
    nodes.push_back(json{{"x", std::move(x)},
                         {"p", std::move(p)},
                         {"r", std::move(r)},
                         {"u", std::move(u)},
                         {"mu", traj.mu_series(i)},
                         {"alpha", traj.alpha_series(i)}});
  }
  j["nodes"] = std::move(nodes);
  j["final"] = json{{"t", traj.final.t},
                    {"V1", traj.final.V1},
                    {"V2", traj.final.V2},
                    {"consensus_err", traj.final.consensus_err},
                    {"avg_track_err", traj.final.avg_track_err}};
  j["max_reference_norm"] = traj.max_reference_norm;
  if (traj.abort) {
    j["aborted"] = json{{"t", traj.abort->t}, {"node", traj.abort->node}, {"reason", traj.abort->reason}};
  } else {
    j["aborted"] = nullptr;
  }
  return j;
}

json report_json(const RunReport& rep, const std::string& status) {
  json violations = json::array();
  for (double t : rep.v1_violations) violations.push_back(json{{"series", "V1"}, {"t", t}});
  for (double t : rep.v2_violations) violations.push_back(json{{"series", "V2"}, {"t", t}});

  json j;
  j["status"] = status;
  j["eta1_pred"] = rep.eta1_pred;
  j["eta2_pred"] = rep.eta2_pred;
  j["eta_fit"] = json{{"V1", fit_json(rep.v1_fit)}, {"V2", fit_json(rep.v2_fit)}};
  j["violations"] = std::move(violations);
  j["slack"] = json{{"V1", rep.v1_slack}, {"V2", rep.v2_slack}};
  j["tv_per_node"] = rep.tv_per_node;
  j["gains_converged"] = rep.gains_converged;
  j["gains_monotone"] = rep.gains_monotone;
  j["final_tracking_error"] = rep.final_tracking_error;
  j["final_consensus_error"] = rep.final_consensus_error;
  j["max_reference_norm"] = rep.max_reference_norm;
  j["reference_bound"] = rep.reference_bound ? json(*rep.reference_bound) : json(nullptr);
  j["assumption4_ok"] = rep.assumption4_ok;
  if (rep.envelope) {
    j["envelope"] = json{{"violations", rep.envelope->violation_times.size()},
                         {"worst_ratio", rep.envelope->worst_ratio}};
  } else {
    j["envelope"] = nullptr;
  }
  return j;
}

}  // namespace dat::cli
