#include "dat/cli/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <memory>
#include <stdexcept>

#ifndef DAT_VERSION
#define DAT_VERSION "unknown"
#endif

namespace dat::cli {

std::string tool_version() { return DAT_VERSION; }

std::string scenario_digest(const std::string& file_bytes, const std::vector<Override>& overrides) {
  std::vector<Override> sorted = overrides;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Override& a, const Override& b) { return a.key < b.key; });
  std::string tail = "--set\n";
  for (const Override& o : sorted) tail += o.key + "=" + o.value + "\n";

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), file_bytes.data(), file_bytes.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), tail.data(), tail.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json ov = nlohmann::json::array();
  for (const Override& o : overrides) ov.push_back(o.key + "=" + o.value);
  return nlohmann::json{{"tool", "dat"},
                        {"version", tool_version()},
                        {"scenario", scenario_path},
                        {"digest", "sha256:" + digest},
                        {"overrides", std::move(ov)},
                        {"variant", variant},
                        {"started", started},
                        {"finished", finished},
                        {"status", status},
                        {"outputs", outputs}};
}

}  // namespace dat::cli
