#pragma once

#include "dat/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dat::cli {

inline constexpr int kSchemaVersion = 1;

// Malformed or schema-violating scenario document. `where` is either
// "line L, column C" for syntax errors or a JSON path like "gains.beta".
class ScenarioFileError : public std::runtime_error {
 public:
  ScenarioFileError(std::string where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// Unknown override key or a value of the wrong type.
class OverrideError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Override {
  std::string key;
  std::string value;
};

// "key=value" -> Override. Throws OverrideError without '='.
Override parse_override(std::string_view text);

// Keys accepted by --set and --param, in a fixed order.
const std::vector<std::string>& override_keys();

// Raw file bytes; throws ScenarioFileError if unreadable.
std::string read_file(const std::filesystem::path& path);

// Parses JSON text; syntax errors report line and column.
nlohmann::json parse_document(const std::string& text);

// Applies overrides in order. Values are JSON literals (numbers, booleans).
void apply_overrides(nlohmann::json& doc, const std::vector<Override>& overrides);

// One concrete experiment built from the document. Scenario has no default
// constructor, so a failed build never leaves a half-filled object behind.
struct LoadedScenario {
  std::string label;  // variant kind, e.g. "robust"
  Scenario scenario;
};

// Builds the main experiment: "variant" if present, else the first entry of
// "variants". Throws ScenarioFileError on schema problems.
LoadedScenario build_scenario(const nlohmann::json& doc);

// One experiment per entry of "variants", all sharing the same plant, gains
// and initial conditions.
std::vector<LoadedScenario> build_variants(const nlohmann::json& doc);

}  // namespace dat::cli
