#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"

namespace dualmpc::cli {

enum ExitCode : int { kOk = 0, kRunFailed = 1, kConfigInvalid = 2, kIoFailed = 3 };

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

/// "A..B" (inclusive) or a single integer.
SeedRange parse_seed_range(const std::string& text);

struct CommonOptions {
  std::optional<std::filesystem::path> config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<int> steps;
  std::optional<bool> oracle;
  std::optional<std::string> out;
  int jobs = 0;  // 0: hardware concurrency
};

struct RunOptions {
  CommonOptions common;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<SeedRange> sweep;
};

struct CompareOptions {
  CommonOptions common;
  SeedRange seeds{0, 19};
};

/// Config file, then --set overrides, then the dedicated flags.
RunConfig resolve_config(const CommonOptions& opts, const std::optional<std::string>& mode);

/// Runs one closed loop and writes <out>/<mode>_<seed>/{trace.csv, summary.json, config.echo.json}.
RunSummary run_and_write(const RunConfig& cfg);

std::filesystem::path run_directory(const RunConfig& cfg);

/// Both return an ExitCode and report problems on stderr.
int run_command(const RunOptions& opts);
int compare_command(const CompareOptions& opts);

}  // namespace dualmpc::cli
