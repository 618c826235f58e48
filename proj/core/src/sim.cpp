#include "dat/sim.hpp"

#include "dat/care.hpp"
#include "dat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dat {

std::string to_string(const Diagnostic& d) {
  if (d.assumption == 3) return "Assumption 3 spot-check failed: " + d.detail;
  if (d.assumption > 0) return "Assumption " + std::to_string(d.assumption) + " violated: " + d.detail;
  return d.detail;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_initial(std::vector<Diagnostic>& out, const std::vector<Eigen::VectorXd>& v,
                   const char* name, int n_nodes, int n) {
  if (static_cast<int>(v.size()) != n_nodes) {
    out.push_back({0, std::string(name) + " has " + std::to_string(v.size()) +
                          " entries, expected one per node (" + std::to_string(n_nodes) + ")"});
    return;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].size() != n) {
      out.push_back({0, std::string(name) + "[" + std::to_string(i) + "] has dimension " +
                            std::to_string(v[i].size()) + ", expected " + std::to_string(n)});
    } else if (!v[i].allFinite()) {
      out.push_back({0, std::string(name) + "[" + std::to_string(i) + "] is not finite"});
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate_scenario(const Scenario& sc) {
  std::vector<Diagnostic> out;
  const int N = sc.n_nodes();
  const int n = sc.state_dim();
  const int p = sc.input_dim();

  if (!is_connected(sc.graph)) {
    out.push_back({1, "graph not connected"});
  }

  bool shapes_ok = true;
  if (sc.matrices.B.rows() != n || n == 0 || p == 0) {
    out.push_back({0, "system matrices have inconsistent shapes"});
    shapes_ok = false;
  } else if (!is_stabilizable(sc.matrices.A, sc.matrices.B)) {
    out.push_back({2, "(A,B) not stabilizable"});
  }

  if (sc.field.output_dim() != p) {
    out.push_back({0, "field output dimension " + std::to_string(sc.field.output_dim()) +
                          " does not match input dimension p = " + std::to_string(p)});
    shapes_ok = false;
  } else if (p > n) {
    out.push_back({0, "field acts on the first p state components, so p must not exceed n"});
    shapes_ok = false;
  } else {
    const LipschitzCheck lc = verify_lipschitz(sc.field, n, sc.lipschitz.samples,
                                               sc.lipschitz.box_radius, sc.lipschitz.seed);
    if (!lc.ok) {
      out.push_back({3, "observed ratio " + fmt(lc.worst_ratio) + " exceeds declared gamma " +
                            fmt(sc.field.gamma()) + " (" + std::to_string(lc.samples) +
                            " pairs, radius " + fmt(sc.lipschitz.box_radius) + ")"});
    }
  }

  const RobustGains& g = sc.gains;
  if (g.K1.rows() != p || g.K1.cols() != n || g.K2.rows() != p || g.K2.cols() != n) {
    out.push_back({0, "gain matrices K1, K2 must be p x n"});
    shapes_ok = false;
  }
  if (g.P1.rows() != n || g.P1.cols() != n || g.P2.rows() != n || g.P2.cols() != n) {
    out.push_back({0, "P1, P2 must be n x n"});
    shapes_ok = false;
  }
  if (!(g.beta > 0.0)) out.push_back({0, "beta must be > 0"});
  if (!(g.nu > 0.0)) out.push_back({0, "nu must be > 0"});

  if (sc.variant.tag() == VariantTag::adaptive) {
    try {
      sc.variant.adaptive_params().validate(N);
    } catch (const Error& e) {
      out.push_back({0, e.what()});
    }
  } else if (shapes_ok) {
    const double alpha_min = sc.field.gamma() + spectral_norm(sc.matrices.B.transpose() * g.P1);
    if (g.alpha < alpha_min - 1e-12) {
      out.push_back({0, "alpha = " + fmt(g.alpha) + " below gamma + ||B^T P1|| = " + fmt(alpha_min)});
    }
    if (g.mu < sc.field.gamma() - 1e-12) {
      out.push_back({0, "mu = " + fmt(g.mu) + " below gamma = " + fmt(sc.field.gamma())});
    }
  }

  check_initial(out, sc.x0, "x0", N, n);
  check_initial(out, sc.s0, "s0", N, n);
  check_initial(out, sc.r0, "r0", N, n);

  if (sc.variant.tag() != VariantTag::robust && !sc.reference_bound) {
    out.push_back({4, "no reference bound declared (required by the " +
                          std::string(to_string(sc.variant.tag())) + " variant)"});
  }
  if (sc.reference_bound) {
    if (!(*sc.reference_bound > 0.0)) {
      out.push_back({0, "reference bound must be > 0"});
    } else if (static_cast<int>(sc.r0.size()) == N) {
      for (int i = 0; i < N; ++i) {
        if (sc.r0[i].size() == n && sc.r0[i].norm() > *sc.reference_bound) {
          out.push_back({4, "||r0[" + std::to_string(i) + "]|| = " + fmt(sc.r0[i].norm()) +
                                " exceeds declared bound " + fmt(*sc.reference_bound)});
        }
      }
    }
  }

  if (!(sc.dt > 0.0) || !(sc.t_end > 0.0) || !(sc.dt < sc.t_end)) {
    out.push_back({0, "need 0 < dt < t_end"});
  }
  if (sc.monitor_stride < 1) out.push_back({0, "monitor_stride must be >= 1"});
  if (sc.lipschitz.samples < 1 || !(sc.lipschitz.box_radius > 0.0)) {
    out.push_back({0, "Lipschitz spot check needs samples >= 1 and radius > 0"});
  }
  return out;
}

std::vector<double> Trajectory::times() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.t);
  return out;
}

std::vector<double> Trajectory::v1_series() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.V1);
  return out;
}

std::vector<double> Trajectory::v2_series() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.V2);
  return out;
}

std::vector<double> Trajectory::consensus_series() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.consensus_err);
  return out;
}

std::vector<double> Trajectory::tracking_series() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.avg_track_err);
  return out;
}

std::vector<double> Trajectory::mu_series(int node) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.nodes.at(node).mu);
  return out;
}

std::vector<double> Trajectory::alpha_series(int node) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.nodes.at(node).alpha);
  return out;
}

Eigen::MatrixXd Trajectory::input_series(int node) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(samples.size()), input_dim);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = samples[k].nodes.at(node).u.transpose();
  }
  return out;
}

Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& parts) {
  Eigen::Index total = 0;
  for (const auto& v : parts) total += v.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& v : parts) {
    out.segment(at, v.size()) = v;
    at += v.size();
  }
  return out;
}

std::vector<Eigen::VectorXd> unstack(const Eigen::VectorXd& stacked, int block) {
  if (block < 1 || stacked.size() % block != 0) {
    throw DimensionError("stacked vector length is not a multiple of the block size");
  }
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index at = 0; at < stacked.size(); at += block) {
    out.emplace_back(stacked.segment(at, block));
  }
  return out;
}

Eigen::VectorXd consensus_error(const Eigen::VectorXd& p_stacked, int block) {
  const std::vector<Eigen::VectorXd> parts = unstack(p_stacked, block);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(block);
  for (const auto& v : parts) mean += v;
  mean /= static_cast<double>(parts.size());
  Eigen::VectorXd out(p_stacked.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out.segment(static_cast<Eigen::Index>(i) * block, block) = parts[i] - mean;
  }
  return out;
}

double lyapunov_v1(const Eigen::VectorXd& xi, const Eigen::MatrixXd& L, const Eigen::MatrixXd& P1) {
  const Eigen::Index N = L.rows();
  const Eigen::Index n = P1.rows();
  if (L.cols() != N || P1.cols() != n || xi.size() != N * n) {
    throw DimensionError("lyapunov_v1: xi must have N*n entries for an N x N Laplacian and n x n P1");
  }
  double v = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::VectorXd P1xi = P1 * xi.segment(i * n, n);
    for (Eigen::Index j = 0; j < N; ++j) {
      if (L(i, j) != 0.0) v += L(i, j) * xi.segment(j * n, n).dot(P1xi);
    }
  }
  return v;
}

double lyapunov_v2(const Eigen::VectorXd& x_tilde, const Eigen::MatrixXd& P2) {
  const Eigen::Index n = P2.rows();
  if (P2.cols() != n || n == 0 || x_tilde.size() % n != 0) {
    throw DimensionError("lyapunov_v2: stacked length must be a multiple of P2's size");
  }
  double v = 0.0;
  for (Eigen::Index at = 0; at < x_tilde.size(); at += n) {
    const auto seg = x_tilde.segment(at, n);
    v += seg.dot(P2 * seg);
  }
  return v;
}

std::vector<double> average_tracking_error(const std::vector<Eigen::VectorXd>& x,
                                           const std::vector<Eigen::VectorXd>& r) {
  if (x.size() != r.size() || r.empty()) {
    throw DimensionError("average_tracking_error needs equal, non-empty node lists");
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(r.front().size());
  for (const auto& ri : r) {
    if (ri.size() != mean.size()) throw DimensionError("reference dimension mismatch");
    mean += ri;
  }
  mean /= static_cast<double>(r.size());
  std::vector<double> out;
  out.reserve(x.size());
  for (const auto& xi : x) {
    if (xi.size() != mean.size()) throw DimensionError("agent state dimension mismatch");
    out.push_back((xi - mean).norm());
  }
  return out;
}

namespace {

// Integrates the closed loop. State per node: [x (n), s (n), r (n), mu, alpha].
class ClosedLoop {
 public:
  explicit ClosedLoop(const Scenario& sc)
      : sc_(sc),
        N_(sc.n_nodes()),
        n_(sc.state_dim()),
        block_(3 * sc.state_dim() + 2),
        L_(laplacian(sc.graph)),
        p_(static_cast<std::size_t>(N_)),
        consensus_(static_cast<std::size_t>(N_)) {}

  int block() const noexcept { return block_; }

  Eigen::VectorXd initial_state() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(N_) * block_);
    const bool adaptive = sc_.variant.tag() == VariantTag::adaptive;
    for (int i = 0; i < N_; ++i) {
      auto b = y.segment(static_cast<Eigen::Index>(i) * block_, block_);
      b.segment(0, n_) = sc_.x0[i];
      b.segment(n_, n_) = sc_.s0[i];
      b.segment(2 * n_, n_) = sc_.r0[i];
      const auto ui = static_cast<std::size_t>(i);
      b(3 * n_) = adaptive ? sc_.variant.adaptive_params().mu0[ui] : sc_.gains.mu;
      b(3 * n_ + 1) = adaptive ? sc_.variant.adaptive_params().alpha0[ui] : sc_.gains.alpha;
    }
    return y;
  }

  // Fills p_ and consensus_ from the state y.
  void prepare(const Eigen::VectorXd& y) {
    for (int i = 0; i < N_; ++i) {
      const auto b = y.segment(static_cast<Eigen::Index>(i) * block_, block_);
      p_[i] = b.segment(n_, n_) + b.segment(2 * n_, n_);
    }
    for (int i = 0; i < N_; ++i) {
      Eigen::VectorXd diff = Eigen::VectorXd::Zero(n_);
      for (int j : sc_.graph.neighbors()[i]) diff += p_[i] - p_[j];
      consensus_[i] = sc_.gains.K1 * diff;
    }
  }

  Eigen::VectorXd input(const Eigen::VectorXd& y, int i, double t) const {
    if (sc_.zero_input) return Eigen::VectorXd::Zero(sc_.input_dim());
    const auto b = y.segment(static_cast<Eigen::Index>(i) * block_, block_);
    return control_input(sc_.variant, sc_.gains, b.segment(0, n_), p_[i], b.segment(2 * n_, n_),
                         consensus_[i], b(3 * n_), b(3 * n_ + 1), t);
  }

  Eigen::VectorXd rhs(const Eigen::VectorXd& y, double t) {
    prepare(y);
    Eigen::VectorXd dy(y.size());
    const SystemMatrices& m = sc_.matrices;
    const bool adaptive = sc_.variant.tag() == VariantTag::adaptive;
    for (int i = 0; i < N_; ++i) {
      const auto b = y.segment(static_cast<Eigen::Index>(i) * block_, block_);
      auto db = dy.segment(static_cast<Eigen::Index>(i) * block_, block_);
      const Eigen::VectorXd x = b.segment(0, n_);
      const Eigen::VectorXd s = b.segment(n_, n_);
      const Eigen::VectorXd r = b.segment(2 * n_, n_);
      const double alpha_i = b(3 * n_ + 1);

      db.segment(2 * n_, n_) = reference_rhs(m, sc_.field, r, t);
      db.segment(n_, n_) = filter_rhs(sc_.variant, sc_.gains, m, s, r, consensus_[i], alpha_i, t);
      const Eigen::VectorXd u = input(y, i, t);
      db.segment(0, n_) = m.A * x + m.B * (sc_.field.eval(x, t) + u);

      if (adaptive) {
        const GainRates rates = adaptive_gain_rates(
            sc_.variant.adaptive_params(), i, sc_.gains.K2 * (x - p_[i]), consensus_[i],
            phi(x, r, sc_.gains.nu), vartheta(r, sc_.gains.beta));
        db(3 * n_) = rates.dmu;
        db(3 * n_ + 1) = rates.dalpha;
      } else {
        db(3 * n_) = 0.0;
        db(3 * n_ + 1) = 0.0;
      }
    }
    return dy;
  }

  Sample sample(const Eigen::VectorXd& y, double t) {
    prepare(y);
    Sample s;
    s.t = t;
    s.nodes.reserve(static_cast<std::size_t>(N_));
    std::vector<Eigen::VectorXd> xs, rs, xts;
    for (int i = 0; i < N_; ++i) {
      const auto b = y.segment(static_cast<Eigen::Index>(i) * block_, block_);
      NodeSample ns;
      ns.x = b.segment(0, n_);
      ns.s = b.segment(n_, n_);
      ns.r = b.segment(2 * n_, n_);
      ns.p = p_[i];
      ns.u = input(y, i, t);
      ns.mu = effective_mu(sc_.variant, sc_.gains, b(3 * n_));
      ns.alpha = effective_alpha(sc_.variant, sc_.gains, b(3 * n_ + 1));
      xs.push_back(ns.x);
      rs.push_back(ns.r);
      xts.push_back(ns.x - ns.p);
      s.nodes.push_back(std::move(ns));
    }
    const Eigen::VectorXd xi = consensus_error(stack(p_), n_);
    s.V1 = lyapunov_v1(xi, L_, sc_.gains.P1);
    s.V2 = lyapunov_v2(stack(xts), sc_.gains.P2);
    s.consensus_err = xi.norm();
    const std::vector<double> e = average_tracking_error(xs, rs);
    s.avg_track_err = *std::max_element(e.begin(), e.end());
    return s;
  }

  // First node whose block holds a non-finite value, or -1.
  int non_finite_node(const Eigen::VectorXd& y) const {
    for (int i = 0; i < N_; ++i) {
      if (!y.segment(static_cast<Eigen::Index>(i) * block_, block_).allFinite()) return i;
    }
    return -1;
  }

  void track_reference_norms(const Eigen::VectorXd& y, std::vector<double>& max_norm) const {
    for (int i = 0; i < N_; ++i) {
      const double r = y.segment(static_cast<Eigen::Index>(i) * block_ + 2 * n_, n_).norm();
      max_norm[i] = std::max(max_norm[i], r);
    }
  }

 private:
  const Scenario& sc_;
  int N_;
  int n_;
  int block_;
  Eigen::MatrixXd L_;
  std::vector<Eigen::VectorXd> p_;
  std::vector<Eigen::VectorXd> consensus_;
};

}  // namespace

Trajectory simulate(const Scenario& sc) {
  const std::vector<Diagnostic> problems = validate_scenario(sc);
  if (!problems.empty()) {
    const Diagnostic& d = problems.front();
    if (d.assumption > 0) throw AssumptionViolation(d.assumption, d.detail);
    throw InvalidArgument(d.detail);
  }

  ClosedLoop loop(sc);
  Trajectory traj;
  traj.variant = sc.variant.tag();
  traj.n_nodes = sc.n_nodes();
  traj.state_dim = sc.state_dim();
  traj.input_dim = sc.input_dim();
  traj.dt = sc.dt;
  traj.monitor_stride = sc.monitor_stride;
  traj.max_reference_norm.assign(static_cast<std::size_t>(sc.n_nodes()), 0.0);

  const long long n_steps = std::max(1LL, std::llround(sc.t_end / sc.dt));
  traj.samples.reserve(static_cast<std::size_t>(n_steps / sc.monitor_stride + 1));

  Eigen::VectorXd y = loop.initial_state();
  const double dt = sc.dt;
  loop.track_reference_norms(y, traj.max_reference_norm);
  traj.samples.push_back(loop.sample(y, 0.0));

  for (long long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Eigen::VectorXd k1 = loop.rhs(y, t);
    const Eigen::VectorXd k2 = loop.rhs(y + 0.5 * dt * k1, t + 0.5 * dt);
    const Eigen::VectorXd k3 = loop.rhs(y + 0.5 * dt * k2, t + 0.5 * dt);
    const Eigen::VectorXd k4 = loop.rhs(y + dt * k3, t + dt);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double t_next = static_cast<double>(k + 1) * dt;
    if (const int bad = loop.non_finite_node(y); bad >= 0) {
      traj.abort = AbortInfo{t_next, bad, "non-finite state"};
      traj.final = traj.samples.back();
      std::ostringstream os;
      os << "non-finite state at t=" << t_next << " in node " << bad;
      throw SimulationAbort(os.str(), std::move(traj));
    }
    loop.track_reference_norms(y, traj.max_reference_norm);
    if ((k + 1) % sc.monitor_stride == 0) {
      traj.samples.push_back(loop.sample(y, t_next));
    }
  }
  const double t_final = static_cast<double>(n_steps) * dt;
  traj.final = (n_steps % sc.monitor_stride == 0) ? traj.samples.back() : loop.sample(y, t_final);
  return traj;
}

}  // namespace dat
