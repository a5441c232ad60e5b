#pragma once

// Command-line front end. A run is described by a flat JSON object: the
// command's defaults, overridden by an optional config file, overridden by
// flags. Every summary embeds the resolved object.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace vdwlab::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitComputation = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& commands();

/// Defaults for a command (UsageError for unknown commands).
json defaults(const std::string& command);

/// Resolved configuration: defaults, then `file_values`, then
/// `flag_values`. Unknown keys and out-of-range values raise UsageError.
struct RunConfig {
  json values;
  std::string command() const { return values.at("command").get<std::string>(); }
};

RunConfig resolve(const std::string& command, const json& file_values, const json& flag_values);
void validate(const RunConfig& cfg);

struct RunResult {
  int exit_code = kExitOk;
  json summary;
  std::string summary_text;            // exactly what was written
  std::filesystem::path summary_path;  // empty when nothing was written
  std::vector<std::filesystem::path> files;
  std::string error_category;
  std::string error_message;
};

/// Executes the configured experiment and writes <name>.summary.json (and
/// <name>.csv, dumps) under out_dir.
RunResult run(const RunConfig& cfg);

/// JSON text with 2-space indentation and every floating-point number
/// printed with 17 significant digits.
std::string dump17(const json& j);

/// Full command-line entry point; returns the exit status.
int main_entry(int argc, char** argv);

}  // namespace vdwlab::cli
