#include "driver.hpp"

#include <chrono>
#include <filesystem>

#include <Eigen/Core>

#include "output.hpp"
#include "run_config.hpp"
#include "tasks.hpp"

namespace tmscat::cli {
namespace {

namespace fs = std::filesystem;

int parse_threads(const std::optional<std::string>& env) {
  if (!env || env->empty()) return 1;
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(*env, &used);
  } catch (const std::exception&) {
    throw ConfigError("TMSCAT_THREADS must be a positive integer");
  }
  if (used != env->size() || n < 1) throw ConfigError("TMSCAT_THREADS must be a positive integer");
  return n;
}

json error_json(const std::string& type, const std::string& message, int code) {
  return {{"type", type}, {"message", message}, {"exit_code", code}};
}

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

}  // namespace

int run(const Invocation& inv, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  json manifest = {{"tool", "tmscat"},
                   {"version", version_string},
                   {"eigen_version", eigen_version()},
                   {"compiler", __VERSION__},
                   {"inputs", json::array()},
                   {"outputs", json::array()},
                   {"advisory", json::object()}};
  fs::path out_dir = inv.out ? fs::path(*inv.out) : fs::path("tmscat_out");
  int code = kOk;
  json error;
  try {
    json cfg = json::object();
    fs::path base_dir = fs::current_path();
    if (inv.config_path) {
      cfg = load_config_file(*inv.config_path);
      base_dir = fs::absolute(*inv.config_path).parent_path();
      manifest["inputs"].push_back({{"path", *inv.config_path}, {"sha256", sha256_file(*inv.config_path)}});
    }
    if (inv.task) set_path(cfg, "task", *inv.task);
    if (inv.k) set_path(cfg, "scattering.k", *inv.k);
    if (inv.d) set_path(cfg, "scattering.d", *inv.d);
    if (inv.rtol) set_path(cfg, "stepper.rtol", *inv.rtol);
    if (inv.out) set_path(cfg, "output.dir", *inv.out);
    if (inv.format) set_path(cfg, "output.format", *inv.format);
    if (inv.paired) set_path(cfg, "directions.paired", true);
    for (const auto& o : inv.overrides) apply_override(cfg, o);
    if (cfg.contains("output") && cfg["output"].is_object() && cfg["output"].contains("dir") &&
        cfg["output"]["dir"].is_string()) {
      out_dir = cfg["output"]["dir"].get<std::string>();
    }
    manifest["config"] = cfg;
    // The output location does not change results, so it is left out of the hash.
    json hashed = cfg;
    if (hashed.contains("output") && hashed["output"].is_object()) hashed["output"].erase("dir");
    manifest["input_hash"] = sha256_hex(hashed.dump());

    const int threads = parse_threads(inv.threads_env);
    manifest["threads"] = threads;
    const RunConfig rc = parse_run_config(cfg, base_dir);
    out_dir = rc.out_dir;
    manifest["task"] = task_name(rc.task);
    manifest["seed"] = rc.seed;
    for (const auto& f : rc.sampled_files) {
      manifest["inputs"].push_back({{"path", f.path.string()}, {"sha256", sha256_file(f.path)}});
    }
    const auto parse_done = std::chrono::steady_clock::now();

    TaskResult res = run_task(rc, threads);
    for (const auto& [name, content] : res.files) {
      const WrittenFile w = write_output(out_dir, name, content);
      manifest["outputs"].push_back({{"path", w.name}, {"sha256", w.sha256}, {"bytes", w.bytes}});
    }
    manifest["summary"] = res.summary;
    manifest["advisory"] = res.advisory;
    res.timings["parse_seconds"] = std::chrono::duration<double>(parse_done - t0).count();
    manifest["timings"] = res.timings;
    if (res.identity_failure) {
      code = kIdentityFailure;
      error = error_json("IdentityCheckFailure", "one or more identity residuals exceed the reference tolerance",
                         code);
    }
  } catch (const NearSingularError& e) {
    code = kNumericalFailure;
    error = error_json("NearSingularError", e.what(), code);
    error["sigma_min"] = e.sigma_min();
    error["condition"] = e.condition();
  } catch (const StepUnderflowError& e) {
    code = kNumericalFailure;
    error = error_json("StepUnderflowError", e.what(), code);
    error["x"] = e.x();
    error["shell"] = e.shell();
  } catch (const NumericalError& e) {
    code = kNumericalFailure;
    error = error_json("NumericalError", e.what(), code);
  } catch (const ConfigError& e) {
    code = kConfigFailure;
    error = error_json("ConfigError", e.what(), code);
  } catch (const json::exception& e) {
    code = kConfigFailure;
    error = error_json("ConfigError", e.what(), code);
  } catch (const std::exception& e) {
    code = kNumericalFailure;
    error = error_json("Error", e.what(), code);
  }

  manifest["exit_code"] = code;
  manifest["error"] = error;
  if (!manifest.contains("timings")) manifest["timings"] = json::object();
  manifest["timings"]["total_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_output(out_dir, "manifest.json", dump_json(manifest));
  } catch (const std::exception& e) {
    if (code == kOk) code = kConfigFailure;
    err << json{{"error", error_json("ConfigError", e.what(), code)}}.dump() << "\n";
    return code;
  }
  if (code != kOk) err << json{{"error", error}}.dump() << "\n";
  return code;
}

}  // namespace tmscat::cli
