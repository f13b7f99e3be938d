#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tmscat::cli {

enum ExitCode : int { kOk = 0, kConfigFailure = 2, kNumericalFailure = 3, kIdentityFailure = 4 };

/// Command-line request. Flags mirror config keys and are applied before `--set` overrides.
struct Invocation {
  std::optional<std::string> config_path;
  std::optional<std::string> task;
  std::optional<double> k;
  std::optional<int> d;
  std::optional<double> rtol;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool paired = false;
  std::vector<std::string> overrides;
  /// Value of TMSCAT_THREADS, if set.
  std::optional<std::string> threads_env;
};

/// Runs one invocation: writes outputs and manifest.json, reports errors as JSON on `err`.
int run(const Invocation& inv, std::ostream& err);

}  // namespace tmscat::cli
