#pragma once

#include "dat/cli/scenario_io.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace dat::cli {

std::string tool_version();

// Hex SHA-256 over the scenario bytes followed by the overrides, stably
// sorted by key, one "key=value\n" line each after a "--set\n" separator.
std::string scenario_digest(const std::string& file_bytes, const std::vector<Override>& overrides);

// Current UTC time as 2024-01-31T12:00:00Z.
std::string utc_timestamp();

struct RunManifest {
  std::string scenario_path;
  std::string digest;
  std::vector<Override> overrides;
  std::string variant;
  std::string started;
  std::string finished;
  std::string status;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
};

}  // namespace dat::cli
