#include "dat/dynamics.hpp"

#include "dat/error.hpp"
#include "dat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace dat {

SystemMatrices::SystemMatrices(Eigen::MatrixXd a, Eigen::MatrixXd b) : A(std::move(a)), B(std::move(b)) {
  require_square(A, "A");
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw DimensionError("B must have " + std::to_string(A.rows()) + " rows and at least one column");
  }
}

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::zero: return "zero";
    case FieldKind::sine: return "sine";
    case FieldKind::saturation: return "saturation";
  }
  return "unknown";
}

std::optional<FieldKind> parse_field_kind(std::string_view name) {
  if (name == "zero") return FieldKind::zero;
  if (name == "sine") return FieldKind::sine;
  if (name == "saturation") return FieldKind::saturation;
  return std::nullopt;
}

NonlinearField::NonlinearField(FieldKind kind, double gamma, int output_dim)
    : NonlinearField(kind, gamma, output_dim, gamma) {}

NonlinearField::NonlinearField(FieldKind kind, double gamma, int output_dim, double amplitude)
    : kind_(kind), gamma_(gamma), amplitude_(amplitude), output_dim_(output_dim) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgument("Lipschitz constant gamma must be finite and >= 0");
  }
  if (!std::isfinite(amplitude)) {
    throw InvalidArgument("field amplitude must be finite");
  }
  if (output_dim < 1) {
    throw DimensionError("field output dimension must be >= 1");
  }
}

Eigen::VectorXd NonlinearField::eval(const Eigen::VectorXd& theta, double /*t*/) const {
  if (theta.size() < output_dim_) {
    throw DimensionError("field acts on the first " + std::to_string(output_dim_) +
                         " state components but the state has dimension " +
                         std::to_string(theta.size()));
  }
  const auto head = theta.head(output_dim_).array();
  switch (kind_) {
    case FieldKind::zero:
      return Eigen::VectorXd::Zero(output_dim_);
    case FieldKind::sine:
      return amplitude_ * head.sin().matrix();
    case FieldKind::saturation:
      return amplitude_ * head.max(-1.0).min(1.0).matrix();
  }
  return Eigen::VectorXd::Zero(output_dim_);
}

Eigen::VectorXd eval_field(const NonlinearField& f, const Eigen::VectorXd& theta, double t) {
  return f.eval(theta, t);
}

LipschitzCheck verify_lipschitz(const NonlinearField& f, int state_dim, int samples,
                                double box_radius, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("verify_lipschitz needs at least one sample");
  if (!(box_radius > 0.0)) throw InvalidArgument("box radius must be positive");
  if (state_dim < f.output_dim()) {
    throw DimensionError("state dimension smaller than field output dimension");
  }

  LipschitzCheck out;
  out.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-box_radius, box_radius);
  std::uniform_real_distribution<double> time(0.0, 100.0);

  const double limit = f.gamma() * (1.0 + 1e-12);
  Eigen::VectorXd a(state_dim);
  Eigen::VectorXd b(state_dim);
  for (int k = 0; k < samples; ++k) {
    for (int i = 0; i < state_dim; ++i) a(i) = coord(rng);
    for (int i = 0; i < state_dim; ++i) b(i) = coord(rng);
    const double t = time(rng);
    if (f.eval(Eigen::VectorXd::Zero(state_dim), t).norm() != 0.0) {
      out.ok = false;
    }
    const double dtheta = (a - b).norm();
    if (dtheta == 0.0) continue;
    const double ratio = (f.eval(a, t) - f.eval(b, t)).norm() / dtheta;
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    if (ratio > limit) out.ok = false;
  }
  return out;
}

BoundaryLayer::BoundaryLayer(double epsilon, double c) : epsilon_(epsilon), c_(c) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("boundary layer epsilon must be > 0");
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidArgument("boundary layer decay c must be > 0");
  }
}

double BoundaryLayer::width(double t) const {
  return epsilon_ * std::exp(-c_ * t);
}

Eigen::VectorXd h(const Eigen::VectorXd& x) {
  const double n = x.norm();
  if (n == 0.0) return Eigen::VectorXd::Zero(x.size());
  return x / n;
}

Eigen::VectorXd h_eps(const Eigen::VectorXd& x, const BoundaryLayer& layer, double t) {
  return x / (x.norm() + layer.width(t));
}

Eigen::VectorXd reference_rhs(const SystemMatrices& mat, const NonlinearField& f,
                              const Eigen::VectorXd& r, double t) {
  if (r.size() != mat.state_dim()) {
    throw DimensionError("reference state has dimension " + std::to_string(r.size()) +
                         ", expected " + std::to_string(mat.state_dim()));
  }
  if (f.output_dim() != mat.input_dim()) {
    throw DimensionError("field output dimension does not match B's column count");
  }
  return mat.A * r + mat.B * f.eval(r, t);
}

}  // namespace dat
