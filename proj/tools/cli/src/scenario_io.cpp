#include "dat/cli/scenario_io.hpp"

#include "dat/care.hpp"
#include "dat/controller.hpp"
#include "dat/error.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace dat::cli {

using nlohmann::json;

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

std::string index_path(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

// Object view that remembers which keys were read, so anything left over
// can be reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ScenarioFileError(path_.empty() ? "document" : path_, "expected an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) throw ScenarioFileError(join_path(path_, key), "missing required field");
    return *v;
  }

  std::string at(const std::string& key) const { return join_path(path_, key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ScenarioFileError(join_path(path_, it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioFileError(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ScenarioFileError(path, "expected an integer");
  return j.get<int>();
}

std::uint64_t as_seed(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ScenarioFileError(path, "expected a non-negative integer");
}

Eigen::VectorXd as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ScenarioFileError(path, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_number(j[i], index_path(path, i));
  return v;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ScenarioFileError(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw ScenarioFileError(index_path(path, 0), "expected a non-empty row");
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = index_path(path, r);
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ScenarioFileError(row_path, "rows must all have " + std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(j[r][c], index_path(row_path, c));
    }
  }
  return m;
}

// Scalar broadcast to every node, or an explicit per-node list.
std::vector<double> per_node(const json& j, const std::string& path, int n_nodes) {
  if (j.is_number()) return std::vector<double>(static_cast<std::size_t>(n_nodes), j.get<double>());
  if (!j.is_array()) throw ScenarioFileError(path, "expected a number or one number per node");
  if (static_cast<int>(j.size()) != n_nodes) {
    throw ScenarioFileError(path, "expected " + std::to_string(n_nodes) + " entries, got " +
                                      std::to_string(j.size()));
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], index_path(path, i)));
  return out;
}

UndirectedGraph read_graph(const json& j) {
  Fields f(j, "graph");
  const int n = as_int(f.require("n"), f.at("n"));
  const json* topology = f.find("topology");
  const json* edges = f.find("edges");
  f.finish();
  if (n < 1) throw ScenarioFileError(f.at("n"), "need at least one node");
  if ((topology != nullptr) == (edges != nullptr)) {
    throw ScenarioFileError("graph", "give exactly one of \"topology\" or \"edges\"");
  }
  try {
    if (topology) {
      if (!topology->is_string()) throw ScenarioFileError(f.at("topology"), "expected a string");
      const std::string name = topology->get<std::string>();
      if (name == "path") return UndirectedGraph::path(n);
      if (name == "cycle") return UndirectedGraph::cycle(n);
      if (name == "complete") return UndirectedGraph::complete(n);
      throw ScenarioFileError(f.at("topology"), "unknown topology \"" + name + "\" (path, cycle, complete)");
    }
    if (!edges->is_array()) throw ScenarioFileError(f.at("edges"), "expected an array of [i, j] pairs");
    std::vector<std::pair<int, int>> list;
    for (std::size_t k = 0; k < edges->size(); ++k) {
      const json& e = (*edges)[k];
      const std::string at = index_path(f.at("edges"), k);
      if (!e.is_array() || e.size() != 2) throw ScenarioFileError(at, "expected an [i, j] pair");
      list.emplace_back(as_int(e[0], at), as_int(e[1], at));
    }
    return UndirectedGraph(n, list);
  } catch (const InvalidArgument& e) {
    throw ScenarioFileError("graph", e.what());
  }
}

SystemMatrices read_system(const json& j) {
  Fields f(j, "system");
  Eigen::MatrixXd A = as_matrix(f.require("A"), f.at("A"));
  Eigen::MatrixXd B = as_matrix(f.require("B"), f.at("B"));
  f.finish();
  try {
    return SystemMatrices(std::move(A), std::move(B));
  } catch (const Error& e) {
    throw ScenarioFileError("system", e.what());
  }
}

NonlinearField read_field(const json& j, int input_dim) {
  Fields f(j, "field");
  const json& kind_j = f.require("kind");
  if (!kind_j.is_string()) throw ScenarioFileError(f.at("kind"), "expected a string");
  const auto kind = parse_field_kind(kind_j.get<std::string>());
  if (!kind) throw ScenarioFileError(f.at("kind"), "unknown field kind (zero, sine, saturation)");
  const double gamma = as_number(f.require("gamma"), f.at("gamma"));
  const json* amp = f.find("amplitude");
  f.finish();
  try {
    if (amp) return NonlinearField(*kind, gamma, input_dim, as_number(*amp, f.at("amplitude")));
    return NonlinearField(*kind, gamma, input_dim);
  } catch (const Error& e) {
    throw ScenarioFileError("field", e.what());
  }
}

RobustGains read_gains(const json* j, const SystemMatrices& mat, double gamma) {
  const json empty = json::object();
  Fields f(j ? *j : empty, "gains");
  const Eigen::Index n = mat.state_dim();
  auto weight = [&](const char* key) -> Eigen::MatrixXd {
    const json* q = f.find(key);
    if (!q) return Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd m = as_matrix(*q, f.at(key));
    if (m.rows() != n || m.cols() != n) {
      throw ScenarioFileError(f.at(key), "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    }
    return m;
  };
  auto scalar = [&](const char* key, double fallback) {
    const json* v = f.find(key);
    return v ? as_number(*v, f.at(key)) : fallback;
  };
  const Eigen::MatrixXd Q1 = weight("Q1");
  const Eigen::MatrixXd Q2 = weight("Q2");
  GainMargins m;
  m.alpha_margin = scalar("alpha_margin", m.alpha_margin);
  m.mu_margin = scalar("mu_margin", m.mu_margin);
  m.beta = scalar("beta", m.beta);
  m.nu = scalar("nu", m.nu);
  f.finish();

  if (!is_stabilizable(mat.A, mat.B)) {
    // No Riccati solution exists. Keep well-shaped placeholders so validation
    // can still report every other problem alongside the stabilizability one.
    RobustGains g;
    g.Q1 = Q1;
    g.Q2 = Q2;
    g.P1 = g.P2 = Eigen::MatrixXd::Zero(n, n);
    g.K1 = g.K2 = Eigen::MatrixXd::Zero(mat.input_dim(), n);
    g.alpha = gamma + m.alpha_margin;
    g.mu = gamma + m.mu_margin;
    g.beta = m.beta;
    g.nu = m.nu;
    return g;
  }
  try {
    return design_gains(mat, Q1, Q2, gamma, m);
  } catch (const Error& e) {
    throw ScenarioFileError("gains", e.what());
  }
}

ControllerVariant read_variant(const json& j, const std::string& path, int n_nodes, std::string& label) {
  Fields f(j, path);
  const json& kind_j = f.require("kind");
  if (!kind_j.is_string()) throw ScenarioFileError(f.at("kind"), "expected a string");
  label = kind_j.get<std::string>();
  try {
    if (label == "robust") {
      f.finish();
      return ControllerVariant::robust();
    }
    if (label == "continuous") {
      const double eps = as_number(f.require("epsilon"), f.at("epsilon"));
      const double c = as_number(f.require("c"), f.at("c"));
      f.finish();
      return ControllerVariant::continuous(BoundaryLayer(eps, c));
    }
    if (label == "adaptive") {
      AdaptiveParams p;
      p.kappa = per_node(f.require("kappa"), f.at("kappa"), n_nodes);
      p.chi = per_node(f.require("chi"), f.at("chi"), n_nodes);
      const json* mu0 = f.find("mu0");
      const json* alpha0 = f.find("alpha0");
      p.mu0 = mu0 ? per_node(*mu0, f.at("mu0"), n_nodes) : std::vector<double>(p.kappa.size(), 0.0);
      p.alpha0 = alpha0 ? per_node(*alpha0, f.at("alpha0"), n_nodes) : std::vector<double>(p.kappa.size(), 0.0);
      f.finish();
      return ControllerVariant::adaptive(std::move(p));
    }
  } catch (const InvalidArgument& e) {
    throw ScenarioFileError(path, e.what());
  }
  throw ScenarioFileError(f.at("kind"), "unknown variant \"" + label + "\" (robust, continuous, adaptive)");
}

// 53 random bits mapped to [0, 1). Spelled out rather than using
// std::uniform_real_distribution so draws are identical across standard libraries.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Eigen::VectorXd> read_initial(const json* j, const std::string& path, int n_nodes,
                                          int dim, std::uint64_t default_seed, unsigned stream) {
  if (!j) throw ScenarioFileError(path, "missing required field");
  if (j->is_array()) {
    if (static_cast<int>(j->size()) != n_nodes) {
      throw ScenarioFileError(path, "expected one vector per node (" + std::to_string(n_nodes) + ")");
    }
    std::vector<Eigen::VectorXd> out;
    for (std::size_t i = 0; i < j->size(); ++i) {
      Eigen::VectorXd v = as_vector((*j)[i], index_path(path, i));
      if (v.size() != dim) {
        throw ScenarioFileError(index_path(path, i), "expected dimension " + std::to_string(dim));
      }
      out.push_back(std::move(v));
    }
    return out;
  }
  Fields f(*j, path);
  const json& range = f.require("uniform");
  if (!range.is_array() || range.size() != 2) throw ScenarioFileError(f.at("uniform"), "expected [lo, hi]");
  const double lo = as_number(range[0], f.at("uniform"));
  const double hi = as_number(range[1], f.at("uniform"));
  if (!(lo <= hi)) throw ScenarioFileError(f.at("uniform"), "need lo <= hi");
  const json* seed_j = f.find("seed");
  f.finish();
  const std::uint64_t seed = seed_j ? as_seed(*seed_j, f.at("seed")) : default_seed;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  std::mt19937_64 rng(seq);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n_nodes; ++i) {
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) v(k) = lo + (hi - lo) * unit_draw(rng);
    out.push_back(std::move(v));
  }
  return out;
}

struct Common {
  Common(UndirectedGraph g, SystemMatrices m, NonlinearField f, RobustGains k)
      : graph(std::move(g)), matrices(std::move(m)), field(f), gains(std::move(k)) {}

  UndirectedGraph graph;
  SystemMatrices matrices;
  NonlinearField field;
  RobustGains gains;
  std::vector<Eigen::VectorXd> x0, s0, r0;
  double t_end = 20.0;
  double dt = 1e-3;
  int monitor_stride = 10;
  std::optional<double> reference_bound;
  bool zero_input = false;
  LipschitzSpotCheck lipschitz;
  const json* variant = nullptr;
  const json* variants = nullptr;
};

Common read_common(const json& doc) {
  Fields f(doc, "");
  const json& version = f.require("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    throw ScenarioFileError("schema_version", "unsupported schema version " + version.dump() +
                                                  " (this tool reads version " +
                                                  std::to_string(kSchemaVersion) + ")");
  }
  const json* seed_j = f.find("seed");
  const std::uint64_t seed = seed_j ? as_seed(*seed_j, "seed") : 0;

  UndirectedGraph graph = read_graph(f.require("graph"));
  SystemMatrices mat = read_system(f.require("system"));
  NonlinearField field = read_field(f.require("field"), mat.input_dim());
  RobustGains gains = read_gains(f.find("gains"), mat, field.gamma());

  const int N = graph.n_nodes();
  const int n = mat.state_dim();
  Fields init(f.require("initial"), "initial");
  auto x0 = read_initial(init.find("x0"), init.at("x0"), N, n, seed, 0);
  auto s0 = read_initial(init.find("s0"), init.at("s0"), N, n, seed, 1);
  auto r0 = read_initial(init.find("r0"), init.at("r0"), N, n, seed, 2);
  init.finish();

  Common c(std::move(graph), std::move(mat), field, std::move(gains));
  c.x0 = std::move(x0);
  c.s0 = std::move(s0);
  c.r0 = std::move(r0);

  if (const json* h = f.find("horizon")) {
    Fields hf(*h, "horizon");
    if (const json* v = hf.find("t_end")) c.t_end = as_number(*v, hf.at("t_end"));
    if (const json* v = hf.find("dt")) c.dt = as_number(*v, hf.at("dt"));
    if (const json* v = hf.find("monitor_stride")) c.monitor_stride = as_int(*v, hf.at("monitor_stride"));
    hf.finish();
  }
  if (const json* v = f.find("reference_bound")) c.reference_bound = as_number(*v, "reference_bound");
  if (const json* v = f.find("zero_input")) {
    if (!v->is_boolean()) throw ScenarioFileError("zero_input", "expected true or false");
    c.zero_input = v->get<bool>();
  }
  if (const json* l = f.find("lipschitz_check")) {
    Fields lf(*l, "lipschitz_check");
    if (const json* v = lf.find("samples")) c.lipschitz.samples = as_int(*v, lf.at("samples"));
    if (const json* v = lf.find("radius")) c.lipschitz.box_radius = as_number(*v, lf.at("radius"));
    if (const json* v = lf.find("seed")) c.lipschitz.seed = as_seed(*v, lf.at("seed"));
    lf.finish();
  }
  c.variant = f.find("variant");
  c.variants = f.find("variants");
  f.finish();
  if (c.variants && (!c.variants->is_array() || c.variants->empty())) {
    throw ScenarioFileError("variants", "expected a non-empty array of variant objects");
  }
  return c;
}

LoadedScenario assemble(const Common& c, const json& variant_j, const std::string& path) {
  std::string label;
  ControllerVariant variant = read_variant(variant_j, path, c.graph.n_nodes(), label);
  Scenario sc{c.graph, c.matrices, c.field, std::move(variant), c.gains, c.x0, c.s0, c.r0,
              c.t_end, c.dt, c.monitor_stride, c.reference_bound, c.zero_input, c.lipschitz};
  return LoadedScenario{label, std::move(sc)};
}

// Variant fields each kind accepts, used to route variant.* overrides.
const std::map<std::string, std::set<std::string>>& variant_fields() {
  static const std::map<std::string, std::set<std::string>> table{
      {"robust", {}},
      {"continuous", {"epsilon", "c"}},
      {"adaptive", {"kappa", "chi", "mu0", "alpha0"}},
  };
  return table;
}

// Override key -> JSON pointer, for everything outside "variant".
const std::map<std::string, std::string>& pointer_table() {
  static const std::map<std::string, std::string> table{
      {"dt", "/horizon/dt"},
      {"t_end", "/horizon/t_end"},
      {"monitor_stride", "/horizon/monitor_stride"},
      {"seed", "/seed"},
      {"gains.alpha_margin", "/gains/alpha_margin"},
      {"gains.mu_margin", "/gains/mu_margin"},
      {"gains.beta", "/gains/beta"},
      {"gains.nu", "/gains/nu"},
      {"field.gamma", "/field/gamma"},
      {"field.amplitude", "/field/amplitude"},
      {"reference_bound", "/reference_bound"},
  };
  return table;
}

}  // namespace

Override parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw OverrideError("override \"" + std::string(text) + "\" is not of the form key=value");
  }
  return Override{std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

const std::vector<std::string>& override_keys() {
  static const std::vector<std::string> keys{
      "dt",           "t_end",          "monitor_stride",     "seed",
      "gains.alpha_margin", "gains.mu_margin", "gains.beta",  "gains.nu",
      "field.gamma",  "field.amplitude", "reference_bound",
      "variant.epsilon", "variant.c",   "variant.kappa",      "variant.chi",
      "variant.mu0",  "variant.alpha0",
  };
  return keys;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioFileError(path.string(), "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto colon = what.rfind(": "); colon != std::string::npos) what = what.substr(colon + 2);
    throw ScenarioFileError("line " + std::to_string(line) + ", column " + std::to_string(col), what);
  }
}

void apply_overrides(json& doc, const std::vector<Override>& overrides) {
  for (const Override& o : overrides) {
    json value;
    try {
      value = json::parse(o.value);
    } catch (const json::parse_error&) {
      throw OverrideError("value for " + o.key + " is not a number or boolean: \"" + o.value + "\"");
    }
    if (!value.is_number() && !value.is_boolean()) {
      throw OverrideError("value for " + o.key + " is not a number or boolean: \"" + o.value + "\"");
    }

    if (auto it = pointer_table().find(o.key); it != pointer_table().end()) {
      doc[json::json_pointer(it->second)] = value;
      continue;
    }
    if (o.key.rfind("variant.", 0) == 0 &&
        std::find(override_keys().begin(), override_keys().end(), o.key) != override_keys().end()) {
      const std::string field = o.key.substr(8);
      int applied = 0;
      auto route = [&](json& v) {
        if (!v.is_object() || !v.contains("kind") || !v["kind"].is_string()) return;
        const auto kinds = variant_fields().find(v["kind"].get<std::string>());
        if (kinds != variant_fields().end() && kinds->second.count(field)) {
          v[field] = value;
          ++applied;
        }
      };
      if (doc.is_object() && doc.contains("variant")) route(doc["variant"]);
      if (doc.is_object() && doc.contains("variants") && doc["variants"].is_array()) {
        for (json& v : doc["variants"]) route(v);
      }
      if (applied == 0) throw OverrideError(o.key + " does not apply to any variant in this scenario");
      continue;
    }

    std::string valid;
    for (const std::string& k : override_keys()) valid += (valid.empty() ? "" : ", ") + k;
    throw OverrideError("unknown parameter \"" + o.key + "\"; valid keys: " + valid);
  }
}

LoadedScenario build_scenario(const json& doc) {
  const Common c = read_common(doc);
  if (c.variant) return assemble(c, *c.variant, "variant");
  if (c.variants) return assemble(c, (*c.variants)[0], "variants[0]");
  throw ScenarioFileError("variant", "missing required field");
}

std::vector<LoadedScenario> build_variants(const json& doc) {
  const Common c = read_common(doc);
  std::vector<LoadedScenario> out;
  if (!c.variants) return out;
  for (std::size_t i = 0; i < c.variants->size(); ++i) {
    out.push_back(assemble(c, (*c.variants)[i], index_path("variants", i)));
  }
  return out;
}

}  // namespace dat::cli
