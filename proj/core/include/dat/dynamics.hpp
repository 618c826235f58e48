#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dat {

// Plant/reference pair (A, B) shared by all agents and reference generators.
struct SystemMatrices {
  Eigen::MatrixXd A;  // n x n
  Eigen::MatrixXd B;  // n x p

  SystemMatrices() = default;
  SystemMatrices(Eigen::MatrixXd a, Eigen::MatrixXd b);

  int state_dim() const noexcept { return static_cast<int>(A.rows()); }
  int input_dim() const noexcept { return static_cast<int>(B.cols()); }
};

enum class FieldKind { zero, sine, saturation };

std::string_view to_string(FieldKind kind);
std::optional<FieldKind> parse_field_kind(std::string_view name);

// Built-in Lipschitz-type nonlinearity f: R^n x R+ -> R^p acting on the first
// p state components:
//   zero        f = 0
//   sine        f_k = amplitude * sin(theta_k)
//   saturation  f_k = amplitude * clamp(theta_k, -1, 1)
// gamma is the declared Lipschitz constant handed to gain design. amplitude
// is what the field actually applies; it equals gamma unless a scenario
// deliberately mis-declares the constant.
class NonlinearField {
 public:
  NonlinearField() = default;
  NonlinearField(FieldKind kind, double gamma, int output_dim);
  NonlinearField(FieldKind kind, double gamma, int output_dim, double amplitude);

  FieldKind kind() const noexcept { return kind_; }
  double gamma() const noexcept { return gamma_; }
  double amplitude() const noexcept { return amplitude_; }
  int output_dim() const noexcept { return output_dim_; }

  Eigen::VectorXd eval(const Eigen::VectorXd& theta, double t) const;

 private:
  FieldKind kind_ = FieldKind::zero;
  double gamma_ = 0.0;
  double amplitude_ = 0.0;
  int output_dim_ = 1;
};

Eigen::VectorXd eval_field(const NonlinearField& f, const Eigen::VectorXd& theta, double t);

struct LipschitzCheck {
  bool ok = true;
  double worst_ratio = 0.0;  // max ||f(a)-f(b)|| / ||a-b|| over the sampled pairs
  int samples = 0;
};

// Draws `samples` pairs uniformly in [-box_radius, box_radius]^state_dim and
// checks ||f(a,t)-f(b,t)|| <= gamma ||a-b|| (1 + 1e-12). Also checks f(0,t)=0.
LipschitzCheck verify_lipschitz(const NonlinearField& f, int state_dim, int samples,
                                double box_radius, std::uint64_t seed);

// Time-decaying boundary layer width epsilon * exp(-c t).
class BoundaryLayer {
 public:
  BoundaryLayer(double epsilon, double c);

  double epsilon() const noexcept { return epsilon_; }
  double c() const noexcept { return c_; }
  double width(double t) const;

 private:
  double epsilon_;
  double c_;
};

// x / ||x||, with h(0) = 0.
Eigen::VectorXd h(const Eigen::VectorXd& x);

// x / (||x|| + epsilon e^{-ct}).
Eigen::VectorXd h_eps(const Eigen::VectorXd& x, const BoundaryLayer& layer, double t);

// A r + B f(r, t).
Eigen::VectorXd reference_rhs(const SystemMatrices& mat, const NonlinearField& f,
                              const Eigen::VectorXd& r, double t);

}  // namespace dat
