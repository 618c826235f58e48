#include "dat/cli/commands.hpp"
#include "dat/cli/manifest.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::vector<dat::cli::Override> parse_sets(const std::vector<std::string>& raw) {
  std::vector<dat::cli::Override> out;
  for (const std::string& s : raw) out.push_back(dat::cli::parse_override(s));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace dat::cli;

  CLI::App app{"Distributed average tracking simulator"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  std::string file;
  std::string out_dir;
  std::vector<std::string> sets;
  std::string param;
  std::vector<std::string> values;

  auto* validate = app.add_subcommand("validate", "Check a scenario file against every standing assumption");
  validate->add_option("file", file, "Scenario file")->required();

  auto* run = app.add_subcommand("run", "Simulate one scenario and export trajectory, report and manifest");
  run->add_option("file", file, "Scenario file")->required();
  run->add_option("-o,--out", out_dir, "Output directory")->required();
  run->add_option("--set", sets, "Override, key=value (repeatable)");

  auto* compare = app.add_subcommand("compare", "Run every listed variant on identical initial conditions");
  compare->add_option("file", file, "Scenario file")->required();
  compare->add_option("-o,--out", out_dir, "Output directory")->required();
  compare->add_option("--set", sets, "Override, key=value (repeatable)");

  auto* sweep = app.add_subcommand("sweep", "Run one scenario per value of a parameter");
  sweep->add_option("file", file, "Scenario file")->required();
  sweep->add_option("--param", param, "Override key to sweep")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',')->allow_extra_args(false);
  sweep->add_option("-o,--out", out_dir, "Output directory")->required();
  sweep->add_option("--set", sets, "Fixed override, key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsageError;
  }

  CommandIo io{std::cout, std::cerr};
  try {
    const std::vector<Override> overrides = parse_sets(sets);
    if (validate->parsed()) return cmd_validate(file, io);
    if (run->parsed()) return cmd_run(file, out_dir, overrides, io);
    if (compare->parsed()) return cmd_compare(file, out_dir, overrides, io);
    if (sweep->parsed()) {
      std::erase(values, std::string{});
      return cmd_sweep(file, param, values, out_dir, overrides, threads_from_env(), io);
    }
  } catch (const OverrideError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
