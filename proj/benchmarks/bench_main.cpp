#include "dat/care.hpp"
#include "dat/controller.hpp"
#include "dat/graph.hpp"
#include "dat/sim.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dat;

namespace {

CareProblem chain_problem(int n) {
  // Chain of integrators with the input on the last state.
  CareProblem p{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, 1), Eigen::MatrixXd::Identity(n, n)};
  for (int i = 0; i + 1 < n; ++i) p.A(i, i + 1) = 1.0;
  p.B(n - 1, 0) = 1.0;
  return p;
}

void BM_SolveCare(benchmark::State& state) {
  const CareProblem p = chain_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_care(p));
}
BENCHMARK(BM_SolveCare)->Arg(2)->Arg(5)->Arg(10);

void BM_Lambda2(benchmark::State& state) {
  const UndirectedGraph g = UndirectedGraph::cycle(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lambda2(g));
}
BENCHMARK(BM_Lambda2)->Arg(4)->Arg(16)->Arg(64);

void BM_SimulateRobustCycle(benchmark::State& state) {
  const int n_nodes = static_cast<int>(state.range(0));
  const SystemMatrices mat((Eigen::MatrixXd(2, 2) << 0, 1, 0, 0).finished(), (Eigen::MatrixXd(2, 1) << 0, 1).finished());
  GainMargins m;
  m.alpha_margin = 0.1;
  m.mu_margin = 0.1;
  const RobustGains g = design_gains(mat, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2), 0.5, m);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<Eigen::VectorXd> x0, s0, r0;
  for (int i = 0; i < n_nodes; ++i) {
    x0.push_back(Eigen::Vector2d(u(rng), u(rng)));
    s0.push_back(Eigen::Vector2d(u(rng), u(rng)));
    r0.push_back(Eigen::Vector2d(u(rng), u(rng)));
  }
  Scenario sc{UndirectedGraph::cycle(n_nodes), mat, NonlinearField(FieldKind::sine, 0.5, 1),
              ControllerVariant::robust(), g, x0, s0, r0, 1.0, 1e-3, 10, std::nullopt, false, {}};
  sc.lipschitz.samples = 100;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(sc));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SimulateRobustCycle)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
