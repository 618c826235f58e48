#include "dat/cli/commands.hpp"
#include "dat/cli/manifest.hpp"
#include "dat/cli/output.hpp"
#include "dat/cli/scenario_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace dat;
using namespace dat::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScenarios = DAT_SCENARIO_DIR;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("dat_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  json base_doc() const { return parse_document(read_file(kScenarios / "cycle4_robust.json")); }

  fs::path dir_;
  std::ostringstream out_, err_;
  CommandIo io() { return {out_, err_}; }
};

std::string slurp(const fs::path& p) { return read_file(p); }

}  // namespace

TEST_F(CliTest, ParseErrorReportsLineAndColumn) {
  try {
    parse_document("{\n  \"a\": 1,\n  \"b\": ]\n}");
    FAIL();
  } catch (const ScenarioFileError& e) {
    EXPECT_EQ(e.where(), "line 3, column 8");
  }
  const fs::path p = write("bad.json", "{\n  \"schema_version\": 1,\n  oops\n}");
  EXPECT_EQ(cmd_validate(p, io()), kValidationFailure);
  EXPECT_NE(err_.str().find("line 3"), std::string::npos);
}

TEST_F(CliTest, UnknownKeyRejectedWithPath) {
  json doc = base_doc();
  doc["gains"]["bta"] = 0.1;
  try {
    build_scenario(doc);
    FAIL();
  } catch (const ScenarioFileError& e) {
    EXPECT_EQ(e.where(), "gains.bta");
  }
}

TEST_F(CliTest, SchemaVersionMismatch) {
  json doc = base_doc();
  doc["schema_version"] = 2;
  EXPECT_THROW(build_scenario(doc), ScenarioFileError);
}

TEST_F(CliTest, BuildsShippedScenario) {
  const LoadedScenario ls = build_scenario(base_doc());
  EXPECT_EQ(ls.label, "robust");
  EXPECT_EQ(ls.scenario.n_nodes(), 4);
  EXPECT_EQ(ls.scenario.state_dim(), 2);
  EXPECT_EQ(ls.scenario.dt, 1e-3);
  ASSERT_TRUE(ls.scenario.reference_bound.has_value());
  EXPECT_TRUE(validate_scenario(ls.scenario).empty());
}

TEST_F(CliTest, InitialDrawsDependOnSeedOnly) {
  json doc = base_doc();
  const auto a = build_scenario(doc).scenario;
  const auto b = build_scenario(doc).scenario;
  EXPECT_EQ(a.x0[2], b.x0[2]);
  EXPECT_NE(a.x0[0], a.s0[0]);
  apply_overrides(doc, {{"seed", "210"}});
  EXPECT_NE(build_scenario(doc).scenario.x0[0], a.x0[0]);
}

TEST_F(CliTest, OverridesRouteToPointers) {
  json doc = parse_document(read_file(kScenarios / "cycle4_compare.json"));
  apply_overrides(doc, {{"dt", "0.002"}, {"gains.beta", "0.3"}, {"variant.epsilon", "0.25"}});
  EXPECT_EQ(doc["horizon"]["dt"], 0.002);
  EXPECT_EQ(doc["gains"]["beta"], 0.3);
  const auto vs = build_variants(doc);
  ASSERT_EQ(vs.size(), 2u);
  EXPECT_EQ(vs[1].scenario.variant.layer().epsilon(), 0.25);
}

TEST_F(CliTest, OverrideErrors) {
  json doc = base_doc();
  EXPECT_THROW(parse_override("dt"), OverrideError);
  EXPECT_EQ(parse_override("dt=0.01").value, "0.01");
  EXPECT_THROW(apply_overrides(doc, {{"bogus", "1"}}), OverrideError);
  EXPECT_THROW(apply_overrides(doc, {{"dt", "abc"}}), OverrideError);
  // The robust variant has no boundary layer.
  EXPECT_THROW(apply_overrides(doc, {{"variant.epsilon", "0.1"}}), OverrideError);
}

TEST_F(CliTest, DigestTracksBytesAndOverrides) {
  const std::string bytes = "{\"a\":1}";
  const std::string d0 = scenario_digest(bytes, {});
  EXPECT_EQ(d0.size(), 64u);
  EXPECT_EQ(d0, scenario_digest(bytes, {}));
  EXPECT_NE(d0, scenario_digest("{\"a\":2}", {}));
  EXPECT_NE(d0, scenario_digest(bytes, {{"dt", "0.01"}}));
  // Order of distinct keys does not matter; order of repeated keys does.
  EXPECT_EQ(scenario_digest(bytes, {{"dt", "1"}, {"seed", "2"}}), scenario_digest(bytes, {{"seed", "2"}, {"dt", "1"}}));
  EXPECT_NE(scenario_digest(bytes, {{"dt", "1"}, {"dt", "2"}}), scenario_digest(bytes, {{"dt", "2"}, {"dt", "1"}}));
  // Frozen from an independent SHA-256 implementation over bytes + "--set\n" + "k=v\n" lines.
  EXPECT_EQ(scenario_digest("", {}), "46283164d9e38f3f90bbe98a7befca3b18547222763ad5f6b655765945ac027b");
  EXPECT_EQ(scenario_digest(bytes, {{"dt", "0.01"}}),
            "02b135a8249a2683ef9c2b904bf2580d189cac70efa51fbe80b5f873f86eb2b0");
}

TEST_F(CliTest, ValidateReportsOk) {
  EXPECT_EQ(cmd_validate(kScenarios / "cycle4_robust.json", io()), kOk);
  EXPECT_EQ(out_.str(), "OK\n");
}

TEST_F(CliTest, ValidateReportsDisconnectedGraph) {
  EXPECT_EQ(cmd_validate(kScenarios / "disconnected.json", io()), kValidationFailure);
  EXPECT_EQ(out_.str(), "Assumption 1 violated: graph not connected\n");
}

TEST_F(CliTest, ValidateReportsMisdeclaredGamma) {
  EXPECT_EQ(cmd_validate(kScenarios / "misdeclared_gamma.json", io()), kValidationFailure);
  EXPECT_EQ(out_.str().rfind("Assumption 3 spot-check failed", 0), 0u);
}

TEST_F(CliTest, RunWritesArtifactsAndManifest) {
  const fs::path out = dir_ / "run";
  ASSERT_EQ(cmd_run(kScenarios / "cycle4_robust.json", out, {{"t_end", "1"}}, io()), kOk) << err_.str();
  for (const char* f : {"trajectory.csv", "trajectory.json", "report.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const json m = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["overrides"], json::array({"t_end=1"}));
  EXPECT_EQ(m["digest"].get<std::string>().rfind("sha256:", 0), 0u);
  const std::string csv = slurp(out / "trajectory.csv");
  EXPECT_EQ(csv.rfind("t,node,x_0,x_1,", 0), 0u);
  const json rep = json::parse(slurp(out / "report.json"));
  EXPECT_TRUE(rep.contains("eta1_pred"));
}

TEST_F(CliTest, UnwritableOutputIsUsageError) {
  const fs::path file = write("plain", "x");
  EXPECT_EQ(cmd_run(kScenarios / "cycle4_robust.json", file / "sub", {}, io()), kUsageError);
  EXPECT_FALSE(fs::exists(file / "sub"));
}

TEST_F(CliTest, SweepRejectsUnknownKeyAndEmptyValues) {
  EXPECT_EQ(cmd_sweep(kScenarios / "cycle4_robust.json", "bogus", {"1"}, dir_ / "s", {}, 1, io()), kUsageError);
  EXPECT_NE(err_.str().find("valid keys"), std::string::npos);
  EXPECT_EQ(cmd_sweep(kScenarios / "cycle4_robust.json", "dt", {}, dir_ / "s", {}, 1, io()), kUsageError);
}

TEST_F(CliTest, SweepWritesOneDirectoryPerValue) {
  ASSERT_EQ(cmd_sweep(kScenarios / "cycle4_robust.json", "gains.beta", {"0.1", "0.2"}, dir_ / "s",
                      {{"t_end", "0.5"}}, 2, io()),
            kOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "s" / "gains.beta=0.1" / "report.json"));
  EXPECT_TRUE(fs::exists(dir_ / "s" / "gains.beta=0.2" / "report.json"));
  EXPECT_TRUE(fs::exists(dir_ / "s" / "sweep_summary.csv"));
}

TEST_F(CliTest, CompareNeedsTwoVariants) {
  EXPECT_EQ(cmd_compare(kScenarios / "cycle4_robust.json", dir_ / "c", {}, io()), kValidationFailure);
}

TEST_F(CliTest, CompareIdenticalVariantsGiveIdenticalRows) {
  json doc = base_doc();
  doc.erase("variant");
  doc["variants"] = json::array({{{"kind", "robust"}}, {{"kind", "robust"}}});
  doc["horizon"]["t_end"] = 0.5;
  const fs::path p = write("twice.json", doc.dump());
  ASSERT_EQ(cmd_compare(p, dir_ / "c", {}, io()), kOk) << err_.str();
  EXPECT_EQ(slurp(dir_ / "c" / "0_robust" / "trajectory.csv"), slurp(dir_ / "c" / "1_robust" / "trajectory.csv"));
  const json c = json::parse(slurp(dir_ / "c" / "compare.json"));
  const json& rows = c.at("runs");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0]["final_tracking_error"], rows[1]["final_tracking_error"]);
  EXPECT_EQ(rows[1]["tv_ratio_to_robust"], 1.0);
}

TEST_F(CliTest, AbortExitsTwoAndMarksCsv) {
  const std::string doc = R"({
    "schema_version": 1,
    "graph": {"n": 1, "edges": []},
    "system": {"A": [[200]], "B": [[1]]},
    "field": {"kind": "zero", "gamma": 0},
    "gains": {"Q1": [[1]], "Q2": [[1]]},
    "initial": {"x0": [[1]], "s0": [[0]], "r0": [[1]]},
    "horizon": {"t_end": 100, "dt": 0.5, "monitor_stride": 1},
    "variant": {"kind": "robust"}
  })";
  const fs::path p = write("blowup.json", doc);
  EXPECT_EQ(cmd_run(p, dir_ / "r", {}, io()), kRuntimeAbort);
  const std::string csv = slurp(dir_ / "r" / "trajectory.csv");
  EXPECT_NE(csv.find("# aborted t="), std::string::npos);
  EXPECT_EQ(json::parse(slurp(dir_ / "r" / "manifest.json"))["status"], "aborted");
}

TEST(Output, FormatDoubleRoundTrips) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}
