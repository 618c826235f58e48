#include "dat/cli/commands.hpp"

#include "dat/analysis.hpp"
#include "dat/cli/manifest.hpp"
#include "dat/cli/output.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

namespace dat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UnwritableOutput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Document {
  std::string bytes;
  json doc;
};

Document load(const fs::path& path, const std::vector<Override>& overrides) {
  Document d;
  d.bytes = read_file(path);
  d.doc = parse_document(d.bytes);
  apply_overrides(d.doc, overrides);
  return d;
}

// Creates the directory and proves a file can be written there.
void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UnwritableOutput("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".write-probe";
  {
    std::ofstream f(probe);
    if (!f || !(f << "probe") || !f.flush()) {
      throw UnwritableOutput("output directory " + dir.string() + " is not writable");
    }
  }
  fs::remove(probe, ec);
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  fn(f);
  f.flush();
  if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

struct RunResult {
  int code = kOk;
  std::string status;
  std::optional<RunReport> report;
  double final_v1 = 0.0;
};

// validate -> simulate -> analyze -> export, for one concrete scenario.
RunResult execute(const LoadedScenario& loaded, const fs::path& dir, RunManifest manifest,
                  std::ostream& log) {
  RunResult res;
  const Scenario& sc = loaded.scenario;
  manifest.variant = loaded.label;
  manifest.started = utc_timestamp();

  const std::vector<Diagnostic> problems = validate_scenario(sc);
  if (!problems.empty()) {
    for (const Diagnostic& d : problems) log << to_string(d) << '\n';
    res.code = kValidationFailure;
    res.status = "invalid";
    return res;
  }

  const fs::path csv = dir / "trajectory.csv";
  const fs::path traj_json = dir / "trajectory.json";
  const fs::path report = dir / "report.json";
  const fs::path manifest_path = dir / "manifest.json";

  auto export_trajectory = [&](const Trajectory& traj) {
    write_file(csv, [&](std::ostream& os) { write_trajectory_csv(os, traj); });
    write_file(traj_json, [&](std::ostream& os) { os << trajectory_json(traj).dump() << '\n'; });
  };
  auto finish = [&](const std::vector<fs::path>& outputs) {
    manifest.finished = utc_timestamp();
    manifest.status = res.status;
    for (const fs::path& p : outputs) manifest.outputs.push_back(p.string());
    manifest.outputs.push_back(manifest_path.string());
    write_file(manifest_path, [&](std::ostream& os) { os << manifest.to_json().dump(2) << '\n'; });
  };

  Trajectory traj;
  try {
    traj = simulate(sc);
  } catch (const SimulationAbort& e) {
    log << "simulation aborted: " << e.what() << '\n';
    export_trajectory(e.partial());
    res.code = kRuntimeAbort;
    res.status = "aborted";
    finish({csv, traj_json});
    return res;
  }

  RunReport rep = analyze(sc, traj);
  res.status = "ok";
  if (!rep.assumption4_ok) {
    log << "Assumption 4 violated: max ||r_i(t)|| = " << rep.max_reference_norm
        << " exceeds declared bound " << *rep.reference_bound << '\n';
    res.status = "assumption-violated";
    res.code = kValidationFailure;
  }
  export_trajectory(traj);
  write_file(report, [&](std::ostream& os) { os << report_json(rep, res.status).dump(2) << '\n'; });
  finish({csv, traj_json, report});
  res.final_v1 = traj.final.V1;
  res.report = std::move(rep);
  return res;
}

double max_tv(const RunReport& rep) {
  return rep.tv_per_node.empty() ? 0.0 : *std::max_element(rep.tv_per_node.begin(), rep.tv_per_node.end());
}

std::string safe_component(std::string s) {
  for (char& c : s) {
    if (c == '/' || c == '\\' || c == ' ') c = '_';
  }
  return s;
}

// Shared handling of the errors every command can raise while loading.
template <class Fn>
int guarded(CommandIo io, const fs::path& scenario, Fn&& fn) {
  try {
    return fn();
  } catch (const ScenarioFileError& e) {
    io.err << scenario.string() << ": " << e.what() << '\n';
    return kValidationFailure;
  } catch (const OverrideError& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const UnwritableOutput& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kRuntimeAbort;
  }
}

}  // namespace

int cmd_validate(const fs::path& scenario, CommandIo io) {
  return guarded(io, scenario, [&] {
    const Document d = load(scenario, {});
    std::vector<LoadedScenario> all;
    all.push_back(build_scenario(d.doc));
    for (LoadedScenario& v : build_variants(d.doc)) all.push_back(std::move(v));

    std::vector<std::string> lines;
    std::set<std::string> seen;
    for (const LoadedScenario& ls : all) {
      for (const Diagnostic& diag : validate_scenario(ls.scenario)) {
        const std::string line = to_string(diag);
        if (seen.insert(line).second) lines.push_back(line);
      }
    }
    if (lines.empty()) {
      io.out << "OK\n";
      return int{kOk};
    }
    for (const std::string& l : lines) io.out << l << '\n';
    return int{kValidationFailure};
  });
}

int cmd_run(const fs::path& scenario, const fs::path& out_dir, const std::vector<Override>& overrides,
            CommandIo io) {
  return guarded(io, scenario, [&] {
    const Document d = load(scenario, overrides);
    const LoadedScenario loaded = build_scenario(d.doc);
    ensure_writable(out_dir);
    RunManifest m;
    m.scenario_path = scenario.string();
    m.digest = scenario_digest(d.bytes, overrides);
    m.overrides = overrides;
    const RunResult r = execute(loaded, out_dir, m, io.err);
    if (r.report) {
      io.out << loaded.label << ": status " << r.status << ", final tracking error "
             << r.report->final_tracking_error << ", consensus error " << r.report->final_consensus_error
             << '\n';
    }
    return r.code;
  });
}

int cmd_compare(const fs::path& scenario, const fs::path& out_dir, const std::vector<Override>& overrides,
                CommandIo io) {
  return guarded(io, scenario, [&] {
    const Document d = load(scenario, overrides);
    const std::vector<LoadedScenario> variants = build_variants(d.doc);
    if (variants.size() < 2) {
      io.err << scenario.string() << ": compare needs a \"variants\" list with at least two entries\n";
      return int{kValidationFailure};
    }
    ensure_writable(out_dir);
    const std::string digest = scenario_digest(d.bytes, overrides);

    std::vector<RunResult> results;
    std::vector<std::string> names;
    int code = kOk;
    for (std::size_t i = 0; i < variants.size(); ++i) {
      const std::string name = std::to_string(i) + "_" + safe_component(variants[i].label);
      const fs::path dir = out_dir / name;
      ensure_writable(dir);
      RunManifest m;
      m.scenario_path = scenario.string();
      m.digest = digest;
      m.overrides = overrides;
      results.push_back(execute(variants[i], dir, m, io.err));
      names.push_back(name);
      code = std::max(code, results.back().code);
    }

    // Chattering is reported relative to the first robust variant, if any.
    std::optional<double> robust_tv;
    for (std::size_t i = 0; i < variants.size(); ++i) {
      if (variants[i].label == "robust" && results[i].report) {
        robust_tv = max_tv(*results[i].report);
        break;
      }
    }

    json rows = json::array();
    std::ostringstream csv;
    csv << "run,variant,status,final_tracking_error,final_consensus_error,tv_max,tv_ratio_to_robust\n";
    io.out << std::left << std::setw(16) << "run" << std::setw(22) << "status" << std::setw(16)
           << "track_err" << std::setw(16) << "consensus_err" << std::setw(14) << "tv_max"
           << "tv/robust\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const RunResult& r = results[i];
      json row{{"run", names[i]}, {"variant", variants[i].label}, {"status", r.status}};
      csv << names[i] << ',' << variants[i].label << ',' << r.status;
      io.out << std::setw(16) << names[i] << std::setw(22) << r.status;
      if (r.report) {
        const double tv = max_tv(*r.report);
        row["final_tracking_error"] = r.report->final_tracking_error;
        row["final_consensus_error"] = r.report->final_consensus_error;
        row["tv_max"] = tv;
        row["tv_ratio_to_robust"] = robust_tv && *robust_tv > 0.0 ? json(tv / *robust_tv) : json(nullptr);
        csv << ',' << format_double(r.report->final_tracking_error) << ','
            << format_double(r.report->final_consensus_error) << ',' << format_double(tv) << ','
            << (robust_tv && *robust_tv > 0.0 ? format_double(tv / *robust_tv) : "");
        io.out << std::setw(16) << r.report->final_tracking_error << std::setw(16)
               << r.report->final_consensus_error << std::setw(14) << tv
               << (robust_tv && *robust_tv > 0.0 ? format_double(tv / *robust_tv) : "-");
      } else {
        csv << ",,,,";
      }
      csv << '\n';
      io.out << '\n';
      rows.push_back(std::move(row));
    }
    write_file(out_dir / "compare.csv", [&](std::ostream& os) { os << csv.str(); });
    write_file(out_dir / "compare.json", [&](std::ostream& os) { os << json{{"runs", rows}}.dump(2) << '\n'; });
    return code;
  });
}

int cmd_sweep(const fs::path& scenario, const std::string& key, const std::vector<std::string>& values,
              const fs::path& out_dir, const std::vector<Override>& overrides, int threads,
              CommandIo io) {
  const auto& keys = override_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    io.err << "error: unknown parameter \"" << key << "\"; valid keys:";
    for (const std::string& k : keys) io.err << ' ' << k;
    io.err << '\n';
    return kUsageError;
  }
  if (values.empty()) {
    io.err << "error: --values needs at least one value\n";
    return kUsageError;
  }

  return guarded(io, scenario, [&] {
    const std::string bytes = read_file(scenario);
    // Load every point up front so bad values fail before any run starts.
    std::vector<std::vector<Override>> point_overrides;
    std::vector<LoadedScenario> points;
    for (const std::string& v : values) {
      std::vector<Override> ov = overrides;
      ov.push_back(Override{key, v});
      json doc = parse_document(bytes);
      apply_overrides(doc, ov);
      points.push_back(build_scenario(doc));
      point_overrides.push_back(std::move(ov));
    }
    ensure_writable(out_dir);
    std::vector<fs::path> dirs;
    for (const std::string& v : values) {
      dirs.push_back(out_dir / safe_component(key + "=" + v));
      ensure_writable(dirs.back());
    }

    std::vector<RunResult> results(values.size());
    std::vector<std::string> logs(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < values.size(); i = next++) {
        std::ostringstream log;
        RunManifest m;
        m.scenario_path = scenario.string();
        m.digest = scenario_digest(bytes, point_overrides[i]);
        m.overrides = point_overrides[i];
        try {
          results[i] = execute(points[i], dirs[i], std::move(m), log);
        } catch (const std::exception& e) {
          log << "error: " << e.what() << '\n';
          results[i].code = kRuntimeAbort;
          results[i].status = "error";
        }
        logs[i] = log.str();
      }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_workers =
        std::min<std::size_t>(values.size(), threads > 0 ? static_cast<std::size_t>(threads) : hw);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }

    int code = kOk;
    std::ostringstream csv;
    csv << "param,value,status,final_tracking_error,final_consensus_error,final_V1,tv_max\n";
    io.out << std::left << std::setw(14) << key << std::setw(22) << "status" << std::setw(16)
           << "track_err" << std::setw(16) << "consensus_err" << "final_V1\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      const RunResult& r = results[i];
      code = std::max(code, r.code);
      if (!logs[i].empty()) io.err << "[" << key << "=" << values[i] << "] " << logs[i];
      csv << key << ',' << values[i] << ',' << r.status;
      io.out << std::setw(14) << values[i] << std::setw(22) << r.status;
      if (r.report) {
        csv << ',' << format_double(r.report->final_tracking_error) << ','
            << format_double(r.report->final_consensus_error) << ',' << format_double(r.final_v1) << ','
            << format_double(max_tv(*r.report));
        io.out << std::setw(16) << r.report->final_tracking_error << std::setw(16)
               << r.report->final_consensus_error << r.final_v1;
      } else {
        csv << ",,,,";
      }
      csv << '\n';
      io.out << '\n';
    }
    write_file(out_dir / "sweep_summary.csv", [&](std::ostream& os) { os << csv.str(); });
    return code;
  });
}

int threads_from_env() {
  const char* raw = std::getenv("DAT_THREADS");
  if (!raw || !*raw) return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) {
    throw OverrideError("DAT_THREADS must be a positive integer, got \"" + std::string(raw) + "\"");
  }
  return static_cast<int>(v);
}

}  // namespace dat::cli
