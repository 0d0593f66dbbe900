#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace shearless::cli {

enum class LogLevel { Error, Warn, Info, Debug };

LogLevel log_level_from_string(const std::string& s);

/// Process exit codes.
enum ExitCode : int { kOk = 0, kValidationFailed = 1, kConfigError = 2, kStageError = 3 };

struct Invocation {
  std::string command;
  std::filesystem::path config_path;
  /// Overrides the config's output directory.
  std::optional<std::filesystem::path> out;
  /// Overrides the config's thread count.
  std::optional<unsigned> threads;
  LogLevel log_level = LogLevel::Info;
};

const std::vector<std::string>& command_names();

/// Load the config, run the command, write artifacts plus run_manifest.json
/// into the output directory, and return the exit code. Never throws.
int run(const Invocation& inv);

}  // namespace shearless::cli
