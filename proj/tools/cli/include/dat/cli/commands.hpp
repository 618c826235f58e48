#pragma once

#include "dat/cli/scenario_io.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace dat::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 1,
  kRuntimeAbort = 2,
  kUsageError = 3,
};

struct CommandIo {
  std::ostream& out;
  std::ostream& err;
};

int cmd_validate(const std::filesystem::path& scenario, CommandIo io);

int cmd_run(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
            const std::vector<Override>& overrides, CommandIo io);

int cmd_compare(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                const std::vector<Override>& overrides, CommandIo io);

// threads <= 0 means one worker per hardware thread.
int cmd_sweep(const std::filesystem::path& scenario, const std::string& key,
              const std::vector<std::string>& values, const std::filesystem::path& out_dir,
              const std::vector<Override>& overrides, int threads, CommandIo io);

// DAT_THREADS, or 0 when unset. Throws OverrideError on a malformed value.
int threads_from_env();

}  // namespace dat::cli
