#pragma once

#include <Eigen/Dense>

namespace dat {

// Continuous algebraic Riccati equation  P A + A^T P - P B B^T P + Q = 0.
struct CareProblem {
  Eigen::MatrixXd A;  // n x n
  Eigen::MatrixXd B;  // n x p
  Eigen::MatrixXd Q;  // n x n, symmetric positive definite
};

struct CareSolution {
  Eigen::MatrixXd P;          // stabilizing solution, symmetric positive definite
  Eigen::MatrixXd K;          // -B^T P, so that A + B K is Hurwitz
  double residual_norm = 0;   // Frobenius norm of the Riccati residual
  int iterations = 0;         // Newton steps taken
};

struct CareOptions {
  double tol = 1e-10;  // residual target, relative to max(1, ||Q||_F)
  int max_iterations = 100;
  // When the residual stops improving (roundoff floor), the best iterate is
  // accepted if it is within floor_factor * target; otherwise the solve fails.
  double floor_factor = 100.0;
};

// PBH test: rank [A - lambda I, B] = n at every eigenvalue with Re >= 0.
// Rank is counted with singular values above 1e-9 * sigma_max.
bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Largest real part over the eigenvalues of A.
double spectral_abscissa(const Eigen::MatrixXd& A);

bool is_hurwitz(const Eigen::MatrixXd& A);

// Solves A^T X + X A + C = 0 through the n^2 x n^2 Kronecker system.
// The returned X is symmetrized when C is symmetric.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);

// Riccati residual P A + A^T P - P B B^T P + Q.
Eigen::MatrixXd care_residual(const CareProblem& prob, const Eigen::MatrixXd& P);

// A gain K0 with A + B K0 Hurwitz. K0 = 0 when A is already Hurwitz,
// otherwise a shifted (Bass) design that moves the controllable modes left
// of -shift.
Eigen::MatrixXd stabilizing_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Newton-Kleinman iteration from stabilizing_gain(). Throws
// AssumptionViolation(2) for a non-stabilizable pair, InvalidArgument if Q is
// not SPD, and ConvergenceError if the residual target is not reached.
CareSolution solve_care(const CareProblem& prob, const CareOptions& opts = {});
CareSolution solve_care(const CareProblem& prob, double tol);

}  // namespace dat
