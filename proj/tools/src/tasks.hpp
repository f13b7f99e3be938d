#pragma once

#include <string>
#include <utility>
#include <vector>

#include "output.hpp"
#include "run_config.hpp"

namespace tmscat::cli {

struct TaskResult {
  /// Output files in emission order: name and content.
  std::vector<std::pair<std::string, std::string>> files;
  json summary = json::object();
  /// Non-fatal conditions (skipped directions, flagged oracles, ...). Empty when none occurred.
  json advisory = json::object();
  json timings = json::object();
  bool identity_failure = false;
};

/// Executes the configured task. `threads` bounds parallelism over independent k points.
TaskResult run_task(const RunConfig& rc, int threads);

/// Resolves a configured direction in d + 1 dimensions.
Direction to_direction(const DirectionInput& in, int d);

/// Outgoing directions for angle sampling: uniform theta (d = 1), polar x azimuth grid (d = 2), +-x (d = 0).
std::vector<Direction> sampled_directions(int d, int angles, int azimuths);

/// Column names for a direction in d + 1 dimensions: prefix + "x", prefix + "_transverse..." per axis.
std::vector<std::string> direction_columns(const std::string& prefix, int d);

}  // namespace tmscat::cli
