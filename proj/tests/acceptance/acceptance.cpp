// Runs the acceptance criteria at their pinned tolerances. One line per
// criterion; exit status is nonzero if any criterion fails.

#include "dat/analysis.hpp"
#include "dat/care.hpp"
#include "dat/cli/output.hpp"
#include "dat/cli/scenario_io.hpp"
#include "dat/graph.hpp"
#include "dat/linalg.hpp"
#include "dat/sim.hpp"
#include "generators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace dat;
using nlohmann::json;

namespace {

const std::filesystem::path kScenarios = DAT_SCENARIO_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAIL]");
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

json load(const std::string& name) { return cli::parse_document(cli::read_file(kScenarios / name)); }

struct Run {
  Scenario sc;
  Trajectory traj;
  RunReport rep;
};

Run run(const json& doc) {
  cli::LoadedScenario ls = cli::build_scenario(doc);
  Trajectory traj = simulate(ls.scenario);
  RunReport rep = analyze(ls.scenario, traj);
  return {std::move(ls.scenario), std::move(traj), std::move(rep)};
}

bool all_true(const std::vector<bool>& v) {
  return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

Outcome are_correctness() {
  Outcome o;
  const CareProblem di{(Eigen::MatrixXd(2, 2) << 0, 1, 0, 0).finished(),
                       (Eigen::MatrixXd(2, 1) << 0, 1).finished(), Eigen::MatrixXd::Identity(2, 2)};
  const double s3 = std::sqrt(3.0);
  const Eigen::MatrixXd expect = (Eigen::MatrixXd(2, 2) << s3, 1, 1, s3).finished();
  const double err = (solve_care(di).P - expect).cwiseAbs().maxCoeff();
  o.check(err <= 1e-6, "double integrator max|dP| " + fmt(err));

  std::mt19937_64 rng(20261017);
  int ok = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const CareProblem prob = testgen::random_care_problem(rng, 5);
    const CareSolution sol = solve_care(prob);
    const double rel = care_residual(prob, sol.P).norm() / prob.Q.norm();
    worst = std::max(worst, rel);
    if (rel <= 1e-8 && is_hurwitz(prob.A + prob.B * sol.K)) ++ok;
  }
  o.check(ok == 100, std::to_string(ok) + "/100 random problems, worst residual/||Q|| " + fmt(worst));
  return o;
}

Outcome graph_spectral() {
  Outcome o;
  std::mt19937_64 rng(7);
  double worst_l2 = 0.0, worst_m = 0.0;
  for (int g = 0; g < 50; ++g) {
    const UndirectedGraph graph = testgen::random_connected_graph(rng, 12);
    const int n = graph.n_nodes();
    const Eigen::MatrixXd L = laplacian(graph);
    const Eigen::MatrixXd M = averaging_projector(n);
    // Minimum Rayleigh quotient over the complement of 1, via an orthonormal
    // basis of that complement built from a QR of [1 | I].
    Eigen::MatrixXd seed(n, n);
    seed.col(0).setOnes();
    seed.rightCols(n - 1) = Eigen::MatrixXd::Identity(n, n).leftCols(n - 1);
    const Eigen::MatrixXd Qf = Eigen::HouseholderQR<Eigen::MatrixXd>(seed).householderQ();
    const Eigen::MatrixXd U = Qf.rightCols(n - 1);
    const double rq = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(U.transpose() * L * U).eigenvalues()(0);
    worst_l2 = std::max(worst_l2, std::abs(rq - lambda2(graph)));
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    worst_m = std::max({worst_m, (M * one).norm(), (M * M - M).cwiseAbs().maxCoeff(),
                        (L * M - L).cwiseAbs().maxCoeff(), (M * L - L).cwiseAbs().maxCoeff()});
  }
  o.check(worst_l2 <= 1e-9, "lambda2 vs Rayleigh " + fmt(worst_l2));
  o.check(worst_m <= 1e-12, "projector identities " + fmt(worst_m));
  return o;
}

void check_robust(Outcome& o, const Run& r) {
  o.check(r.rep.final_tracking_error <= 1e-2, "tracking " + fmt(r.rep.final_tracking_error));
  o.check(r.rep.v1_violations.empty(), "V1 violations " + std::to_string(r.rep.v1_violations.size()));
  o.check(r.rep.v2_violations.empty(), "V2 violations " + std::to_string(r.rep.v2_violations.size()));
  const double eta2 = r.rep.v2_fit ? r.rep.v2_fit->eta_hat : 0.0;
  o.check(r.rep.v2_fit && eta2 >= 0.5 * r.rep.eta2_pred,
          "eta2 fit " + fmt(eta2) + " vs 0.5*pred " + fmt(0.5 * r.rep.eta2_pred));
}

Outcome robust_tracking(const Run& r) {
  Outcome o;
  check_robust(o, r);
  return o;
}

Outcome initialization() {
  Outcome o;
  for (int seed : {11, 12}) {
    json doc = load("cycle4_robust.json");
    doc["initial"]["s0"] = {{"uniform", {-1, 1}}, {"seed", seed}};
    const Run r = run(doc);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(r.sc.state_dim());
    for (const auto& s : r.sc.s0) sum += s;
    o.check(sum.norm() > 1e-6, "seed " + std::to_string(seed) + " |sum s0| " + fmt(sum.norm()));
    o.check(r.rep.final_tracking_error <= 1e-2, "tracking " + fmt(r.rep.final_tracking_error));
  }
  return o;
}

Outcome adaptive_tracking() {
  Outcome o;
  try {
    const Run r = run(load("cycle4_adaptive.json"));
    o.check(r.rep.final_tracking_error <= 1e-2, "tracking " + fmt(r.rep.final_tracking_error));
    o.check(r.rep.gains_monotone, "gains monotone");
    o.check(all_true(r.rep.gains_converged), "gains converged");
  } catch (const SimulationAbort& e) {
    o.check(false, std::string("aborted: ") + e.what());
  }
  return o;
}

Outcome continuous_tracking(const Run& robust) {
  Outcome o;
  const Run r = run(load("cycle4_continuous.json"));
  o.check(r.rep.final_tracking_error <= 1e-2, "tracking " + fmt(r.rep.final_tracking_error));
  o.check(r.rep.envelope && r.rep.envelope->violation_times.empty(),
          "envelope worst ratio " + fmt(r.rep.envelope ? r.rep.envelope->worst_ratio : NAN));
  double worst = 0.0;
  for (std::size_t i = 0; i < r.rep.chattering.size(); ++i) {
    const auto& c = r.rep.chattering[i].total_variation;
    const auto& b = robust.rep.chattering[i].total_variation;
    for (std::size_t k = 0; k < c.size(); ++k) worst = std::max(worst, b[k] > 0 ? c[k] / b[k] : INFINITY);
  }
  o.check(worst <= 0.2, "max TV ratio to robust " + fmt(worst));
  return o;
}

Outcome single_agent() {
  Outcome o;
  const Run r = run(load("single_agent.json"));
  const auto& n = r.traj.final.nodes[0];
  const double e = (n.x - n.r).norm();
  o.check(e <= 1e-3, "||x - r|| " + fmt(e));
  return o;
}

Outcome determinism(const Run& first) {
  Outcome o;
  const Run second = run(load("cycle4_robust.json"));
  std::ostringstream a, b;
  cli::write_trajectory_csv(a, first.traj);
  cli::write_trajectory_csv(b, second.traj);
  o.check(a.str() == b.str(), "CSV exports " + std::string(a.str() == b.str() ? "identical" : "differ") + " (" +
                                  std::to_string(a.str().size()) + " bytes)");
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  std::optional<Run> robust;
  report(1, "Riccati solver", are_correctness);
  report(2, "graph spectra", graph_spectral);
  report(3, "robust tracking", [&] {
    robust = run(load("cycle4_robust.json"));
    return robust_tracking(*robust);
  });
  report(4, "initialization independence", initialization);
  report(5, "adaptive tracking", adaptive_tracking);
  report(6, "continuous tracking", [&] {
    if (!robust) throw std::runtime_error("robust reference run unavailable");
    return continuous_tracking(*robust);
  });
  report(7, "single agent", single_agent);
  report(8, "determinism", [&] {
    if (!robust) throw std::runtime_error("robust reference run unavailable");
    return determinism(*robust);
  });
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
