#include "dat/care.hpp"
#include "dat/error.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dat;

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

const Eigen::MatrixXd kDoubleIntegratorA = (Eigen::MatrixXd(2, 2) << 0, 1, 0, 0).finished();
const Eigen::MatrixXd kDoubleIntegratorB = (Eigen::MatrixXd(2, 1) << 0, 1).finished();

}  // namespace

TEST(Stabilizable, Examples) {
  EXPECT_TRUE(is_stabilizable(kDoubleIntegratorA, kDoubleIntegratorB));
  EXPECT_FALSE(is_stabilizable(Eigen::MatrixXd::Identity(2, 2), (Eigen::MatrixXd(2, 1) << 1, 0).finished()));
  EXPECT_TRUE(is_stabilizable(scalar(-1), scalar(0)));
}

TEST(Hurwitz, Examples) {
  EXPECT_TRUE(is_hurwitz((Eigen::MatrixXd(2, 2) << -1, 0, 0, -2).finished()));
  EXPECT_FALSE(is_hurwitz((Eigen::MatrixXd(2, 2) << 0, 1, -1, 0).finished()));
  EXPECT_FALSE(is_hurwitz(scalar(1)));
}

TEST(Lyapunov, SolvesEquation) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd A = testgen::random_matrix(rng, 4, 4);
    A -= (spectral_abscissa(A) + 1.0) * Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd M = testgen::random_matrix(rng, 4, 4);
    const Eigen::MatrixXd C = M * M.transpose();
    const Eigen::MatrixXd X = solve_lyapunov(A, C);
    EXPECT_LT((A.transpose() * X + X * A + C).norm(), 1e-10 * C.norm());
  }
}

TEST(Care, ScalarClosedForm) {
  // 2aP - b^2 P^2 + q = 0 has stabilizing root (a + sqrt(a^2 + q b^2)) / b^2.
  const auto s1 = solve_care(CareProblem{scalar(0), scalar(1), scalar(1)});
  EXPECT_NEAR(s1.P(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(s1.K(0, 0), -1.0, 1e-12);

  const auto s2 = solve_care(CareProblem{scalar(1), scalar(1), scalar(3)});
  EXPECT_NEAR(s2.P(0, 0), 3.0, 1e-12);
  EXPECT_NEAR(s2.K(0, 0), -3.0, 1e-12);

  for (double a : {-2.0, -0.5, 0.0, 0.7, 4.0}) {
    for (double b : {0.3, 1.0, 2.5}) {
      for (double q : {0.1, 1.0, 9.0}) {
        const double expected = (a + std::sqrt(a * a + q * b * b)) / (b * b);
        const auto s = solve_care(CareProblem{scalar(a), scalar(b), scalar(q)});
        EXPECT_NEAR(s.P(0, 0), expected, 1e-10 * std::max(1.0, expected)) << a << " " << b << " " << q;
      }
    }
  }
}

TEST(Care, DoubleIntegrator) {
  const auto s = solve_care(CareProblem{kDoubleIntegratorA, kDoubleIntegratorB, Eigen::MatrixXd::Identity(2, 2)});
  const double r3 = std::sqrt(3.0);
  EXPECT_NEAR(s.P(0, 0), r3, 1e-9);
  EXPECT_NEAR(s.P(0, 1), 1.0, 1e-9);
  EXPECT_NEAR(s.P(1, 0), 1.0, 1e-9);
  EXPECT_NEAR(s.P(1, 1), r3, 1e-9);
  EXPECT_NEAR(s.K(0, 0), -1.0, 1e-9);
  EXPECT_NEAR(s.K(0, 1), -r3, 1e-9);
}

TEST(Care, RandomProblemsMatchHamiltonianOracle) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const CareProblem prob = testgen::random_care_problem(rng, 5);
    const CareSolution s = solve_care(prob);
    const double qn = prob.Q.norm();
    EXPECT_LE(care_residual(prob, s.P).norm(), 1e-8 * qn) << "trial " << trial;
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.P).eigenvalues()(0), 0.0);
    EXPECT_TRUE(is_hurwitz(prob.A - prob.B * prob.B.transpose() * s.P));
    const Eigen::MatrixXd oracle = testgen::hamiltonian_care(prob);
    EXPECT_LE((s.P - oracle).norm(), 1e-6 * std::max(1.0, oracle.norm())) << "trial " << trial;
  }
}

TEST(Care, RejectsNonStabilizable) {
  EXPECT_THROW(solve_care(CareProblem{scalar(1), scalar(0), scalar(1)}), AssumptionViolation);
}

TEST(Care, RejectsIndefiniteWeight) {
  EXPECT_THROW(solve_care(CareProblem{kDoubleIntegratorA, kDoubleIntegratorB,
                                      (Eigen::MatrixXd(2, 2) << 1, 0, 0, -1).finished()}),
               InvalidArgument);
}

TEST(Care, StabilizingGainOnUnstablePlant) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const CareProblem prob = testgen::random_care_problem(rng, 5);
    const Eigen::MatrixXd K = stabilizing_gain(prob.A, prob.B);
    EXPECT_TRUE(is_hurwitz(prob.A + prob.B * K)) << "trial " << trial;
  }
}

TEST(Care, RoundoffFloorHandling) {
  std::mt19937_64 rng(5);
  const CareProblem prob = testgen::random_care_problem(rng, 5);
  CareOptions strict;
  strict.tol = 1e-22;
  EXPECT_THROW(solve_care(prob, strict), ConvergenceError);
  CareOptions relaxed = strict;
  relaxed.floor_factor = 1e12;
  const CareSolution s = solve_care(prob, relaxed);
  EXPECT_LE(s.residual_norm, 1e-10 * std::max(1.0, prob.Q.norm()));
}
