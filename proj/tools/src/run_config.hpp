#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <tmscat/tmscat.hpp>

namespace tmscat::cli {

using json = nlohmann::json;

enum class Task { transfer, amplitudes, angle_scan, k_scan, singularity_scan, verify_identities, oracle_compare };

Task parse_task(const std::string& name);
std::string task_name(Task t);

/// Incidence or outgoing direction as given in the config, before snapping.
struct DirectionInput {
  std::optional<double> angle;  // d = 1
  std::optional<double> theta, phi;  // d = 2
  std::vector<double> vector;  // explicit unit vector (nx, n_perp...)
  int sign = 1;  // d = 0
};

struct DirectionSpec {
  std::vector<std::pair<DirectionInput, DirectionInput>> pairs;
  std::optional<DirectionInput> incidence;
  /// Outgoing sampling: uniform angles (d = 1), or polar x azimuthal counts (d = 2).
  int angles = 0;
  int azimuths = 1;
  /// Every on-grid outgoing direction (both signs).
  bool on_grid = false;
  /// Number of random on-grid pairs (0 disables); drawn with the run seed.
  int random_pairs = 0;
  bool paired = false;
};

struct KRange {
  double k_min = 0.5;
  double k_max = 3.0;
  int samples = 50;
};

enum class OracleKind { automatic, matching, ode, partial_wave, born };

struct OracleSpec {
  OracleKind kind = OracleKind::automatic;
  int m_max = 12;
};

struct SampledInput {
  std::filesystem::path path;
};

struct RunConfig {
  Task task = Task::transfer;
  unsigned long seed = 0;
  PotentialModel potential;
  std::vector<SampledInput> sampled_files;
  /// Segments when the potential is piecewise constant x-only (used by the matching oracle).
  std::optional<std::vector<Segment>> segments;
  /// Set when the potential is a single circular well centred on the x axis.
  std::optional<CircularWellTerm> circular_well;
  ScatteringConfig scattering;
  StepperOptions stepper;
  DirectionSpec directions;
  KRange k_range;
  ScanOptions scan;
  OracleSpec oracle;
  std::filesystem::path out_dir = "tmscat_out";
  std::string format = "csv";
  bool full_grid_residual = false;
  double max_condition = 1e12;
  json merged;  ///< config after overrides, as hashed into the manifest
};

/// Reads a JSON config file. Throws ConfigError on I/O or parse failure.
json load_config_file(const std::filesystem::path& path);

/// Applies `a.b.c=value`; value is parsed as JSON when possible, else taken as a string.
void apply_override(json& cfg, const std::string& assignment);
void set_path(json& cfg, const std::string& dotted, json value);

/// Validates and converts the merged config. Relative file paths resolve against `base_dir`.
RunConfig parse_run_config(const json& cfg, const std::filesystem::path& base_dir);

/// Complex scalar from a number, [re, im] or {"re": .., "im": ..}.
cplx parse_complex(const json& j, const std::string& where);

/// `d` is the default transverse dimension for generated mixtures.
PotentialModel parse_potential(const json& j, const std::filesystem::path& base_dir, unsigned long seed, int d,
                               std::vector<SampledInput>* files = nullptr);

}  // namespace tmscat::cli
