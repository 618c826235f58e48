#include "dat/care.hpp"

#include "dat/error.hpp"
#include "dat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>

namespace dat {
namespace {

std::string format_residual(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", r);
  return buf;
}

void check_pair(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  require_square(A, "A");
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw DimensionError("B must be " + std::to_string(A.rows()) + " x p with p >= 1, got " +
                         std::to_string(B.rows()) + "x" + std::to_string(B.cols()));
  }
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) {
    throw Error("eigenvalue computation did not converge");
  }
  return es.eigenvalues();
}

}  // namespace

bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  check_pair(A, B);
  const Eigen::Index n = A.rows();
  const Eigen::Index p = B.cols();
  const Eigen::VectorXcd lambdas = eigenvalues(A);
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const std::complex<double> lambda = lambdas(k);
    if (lambda.real() < 0.0) continue;
    Eigen::MatrixXcd pbh(n, n + p);
    pbh.leftCols(n) = A.cast<std::complex<double>>() -
                      lambda * Eigen::MatrixXcd::Identity(n, n);
    pbh.rightCols(p) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double threshold = 1e-9 * sv(0);
    const auto rank = (sv.array() > threshold).count();
    if (rank < n) return false;
  }
  return true;
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
  require_square(A, "A");
  return eigenvalues(A).real().maxCoeff();
}

bool is_hurwitz(const Eigen::MatrixXd& A) {
  return spectral_abscissa(A) < 0.0;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C) {
  require_square(A, "A");
  if (C.rows() != A.rows() || C.cols() != A.cols()) {
    throw DimensionError("Lyapunov right-hand side must match A");
  }
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd At = A.transpose();
  // Column-major vec: vec(A^T X) = (I kron A^T) vec X, vec(X A) = (A^T kron I) vec X.
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      op.block(i * n, j * n, n, n) += I(i, j) * At + At(i, j) * I;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(C.data(), n * n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(op);
  if (!lu.isInvertible()) {
    throw Error("Lyapunov operator is singular (A has eigenvalues summing to zero)");
  }
  Eigen::VectorXd x = lu.solve(rhs);
  Eigen::MatrixXd X = Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
  if (is_symmetric(C)) X = symmetrize(X);
  return X;
}

Eigen::MatrixXd care_residual(const CareProblem& prob, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd PB = P * prob.B;
  return P * prob.A + prob.A.transpose() * P - PB * PB.transpose() + prob.Q;
}

Eigen::MatrixXd stabilizing_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  check_pair(A, B);
  const Eigen::Index n = A.rows();
  if (is_hurwitz(A)) {
    return Eigen::MatrixXd::Zero(B.cols(), n);
  }
  // Shift so that F = A + s I has every eigenvalue strictly in the right half
  // plane; then F Z + Z F^T = 2 B B^T has a unique PSD solution whose range is
  // the controllable subspace, and K = -B^T Z^+ places the controllable modes
  // at real part <= -s while leaving the (stable) uncontrollable ones alone.
  const double min_re = eigenvalues(A).real().minCoeff();
  const double shift = std::max(0.0, -min_re) + 1.0;
  const Eigen::MatrixXd F = A + shift * Eigen::MatrixXd::Identity(n, n);
  // solve_lyapunov handles X^T-form: (-F) Z + Z (-F)^T + 2 B B^T = 0 with A := -F^T.
  const Eigen::MatrixXd Z = solve_lyapunov(-F.transpose(), 2.0 * B * B.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(Z));
  const Eigen::VectorXd& w = eig.eigenvalues();
  const double cutoff = static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                        std::max(w.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Eigen::VectorXd w_inv = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > cutoff) w_inv(i) = 1.0 / w(i);
  }
  const Eigen::MatrixXd Z_pinv = eig.eigenvectors() * w_inv.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::MatrixXd K0 = -B.transpose() * Z_pinv;
  if (!is_hurwitz(A + B * K0)) {
    throw AssumptionViolation(2, "(A,B) is not stabilizable (no stabilizing initial gain)");
  }
  return K0;
}

CareSolution solve_care(const CareProblem& prob, const CareOptions& opts) {
  check_pair(prob.A, prob.B);
  require_symmetric(prob.Q, "Q");
  if (prob.Q.rows() != prob.A.rows()) {
    throw DimensionError("Q must match A");
  }
  if (!is_spd(prob.Q)) {
    throw InvalidArgument("Q must be symmetric positive definite");
  }
  if (!(opts.tol > 0.0)) {
    throw InvalidArgument("CARE tolerance must be positive");
  }
  if (!is_stabilizable(prob.A, prob.B)) {
    throw AssumptionViolation(2, "(A,B) is not stabilizable");
  }

  const Eigen::MatrixXd Q = symmetrize(prob.Q);
  const double target = opts.tol * std::max(1.0, Q.norm());
  Eigen::MatrixXd K = stabilizing_gain(prob.A, prob.B);
  Eigen::MatrixXd P;
  double residual = std::numeric_limits<double>::infinity();
  CareSolution best{Eigen::MatrixXd(), Eigen::MatrixXd(), residual, 0};
  int stalls = 0;

  auto finish = [&](const CareSolution& sol) {
    if (!is_hurwitz(prob.A + prob.B * sol.K)) {
      throw ConvergenceError("CARE iterate is not stabilizing", sol.residual_norm, sol.iterations);
    }
    return sol;
  };

  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Eigen::MatrixXd Ak = prob.A + prob.B * K;
    // (A + B K)^T P + P (A + B K) + Q + K^T K = 0
    P = symmetrize(solve_lyapunov(Ak, Q + K.transpose() * K));
    K = -prob.B.transpose() * P;
    residual = care_residual(prob, P).norm();
    if (residual <= target) return finish(CareSolution{P, K, residual, it});
    if (!std::isfinite(residual)) {
      throw ConvergenceError("CARE iteration diverged", residual, it);
    }
    // Newton-Kleinman converges quadratically; once roundoff dominates the
    // residual stops improving and further steps are wasted.
    if (residual < best.residual_norm) {
      best = CareSolution{P, K, residual, it};
      stalls = 0;
    } else if (++stalls >= 5) {
      if (best.residual_norm <= opts.floor_factor * target) return finish(best);
      throw ConvergenceError("CARE iteration stagnated at residual " + format_residual(best.residual_norm),
                             best.residual_norm, it);
    }
  }
  throw ConvergenceError("CARE iteration hit max iterations with residual " + format_residual(residual),
                         residual, opts.max_iterations);
}

CareSolution solve_care(const CareProblem& prob, double tol) {
  CareOptions opts;
  opts.tol = tol;
  return solve_care(prob, opts);
}

}  // namespace dat
