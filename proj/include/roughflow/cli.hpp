#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughflow/errors.hpp"

namespace roughflow::cli {

/// Command-line misuse; maps to exit code 2.
class UsageError : public ConfigError {
 public:
  UsageError(const std::string& what, std::string usage)
      : ConfigError(what), usage_(std::move(usage)) {}
  [[nodiscard]] const std::string& usage() const { return usage_; }
  [[nodiscard]] const char* kind() const noexcept override { return "usage"; }

 private:
  std::string usage_;
};

/// Help was requested; not an error.
struct HelpRequested {
  std::string text;
};

struct RunConfig {
  std::string command;
  /// Command parameters after merging defaults, config file and flags.
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  /// 0 means the default worker count.
  unsigned threads = 0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// argv excludes the program name. Flags override values from
/// `--config FILE`; unknown commands, flags and config keys are rejected
/// with UsageError. Throws HelpRequested for --help.
[[nodiscard]] RunConfig parse_args(const std::vector<std::string>& argv);

/// Runs one command, writing results under out_dir/<command>/ and a short
/// result on `out`. Returns the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with uniform error reporting (structured JSON on err).
int main_entry(const std::vector<std::string>& argv, std::ostream& out,
               std::ostream& err);

}  // namespace roughflow::cli
