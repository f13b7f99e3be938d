#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Transfer-matrix potential scattering in 1D, 2D and 3D"};
  tmscat::cli::Invocation inv;
  std::string config, task, out, format;
  double k = 0.0, rtol = 0.0;
  int d = 0;
  auto* o_config = app.add_option("-c,--config", config, "JSON run configuration")->check(CLI::ExistingFile);
  auto* o_task = app.add_option("--task", task, "transfer, amplitudes, angle_scan, k_scan, singularity_scan, "
                                                "verify_identities or oracle_compare");
  auto* o_k = app.add_option("--k", k, "wavenumber (scattering.k)");
  auto* o_d = app.add_option("--d", d, "transverse dimension 0, 1 or 2 (scattering.d)");
  auto* o_rtol = app.add_option("--rtol", rtol, "integrator relative tolerance (stepper.rtol)");
  auto* o_out = app.add_option("-o,--out", out, "output directory (output.dir)");
  auto* o_format = app.add_option("--format", format, "csv or json (output.format)");
  app.add_flag("--paired", inv.paired, "also emit the (-n, -n0) partner of every direction pair");
  app.add_option("--set", inv.overrides, "override a config key: dotted.key=value (repeatable)");
  app.footer("Thread count for k scans: TMSCAT_THREADS (default 1).\nExit codes: 0 ok, 2 config, 3 numerical, "
             "4 identity check failed.");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    const nlohmann::json j = {{"error", {{"type", "ConfigError"}, {"message", e.what()}, {"exit_code", 2}}}};
    std::cerr << j.dump() << "\n";
    return tmscat::cli::kConfigFailure;
  }
  if (*o_config) inv.config_path = config;
  if (*o_task) inv.task = task;
  if (*o_k) inv.k = k;
  if (*o_d) inv.d = d;
  if (*o_rtol) inv.rtol = rtol;
  if (*o_out) inv.out = out;
  if (*o_format) inv.format = format;
  if (const char* env = std::getenv("TMSCAT_THREADS")) inv.threads_env = env;
  return tmscat::cli::run(inv, std::cerr);
}
