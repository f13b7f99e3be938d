#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace tmscat::cli {
namespace {

namespace fs = std::filesystem;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

PVec get_pvec(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return {};
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() > 2) throw ConfigError(where + "." + key + ": expected [y] or [y, z]");
  PVec p;
  if (v.size() > 0) p.y = v[0].get<double>();
  if (v.size() > 1) p.z = v[1].get<double>();
  return p;
}

Profile parse_profile(const json& j, const std::string& where) {
  const std::string type = get_string(j, "type", "", where);
  if (type == "piecewise") {
    check_keys(j, {"type", "segments"}, where);
    PiecewiseProfile p;
    if (!j.contains("segments") || !j["segments"].is_array()) throw ConfigError(where + ".segments: expected an array");
    for (const auto& s : j["segments"]) {
      check_keys(s, {"x0", "x1", "value"}, where + ".segments[]");
      if (!s.contains("value")) throw ConfigError(where + ".segments[]: value is required");
      p.segments.push_back({get_number(s, "x0", 0.0, where), get_number(s, "x1", 0.0, where),
                            parse_complex(s["value"], where + ".segments[].value")});
    }
    return p;
  }
  if (type == "gaussian" || type == "sech2") {
    check_keys(j, {"type", "g", "center", "width"}, where);
    const cplx g = j.contains("g") ? parse_complex(j["g"], where + ".g") : cplx{1.0, 0.0};
    const double c = get_number(j, "center", 0.0, where), w = get_number(j, "width", 1.0, where);
    if (type == "gaussian") return GaussianProfile{g, c, w};
    return Sech2Profile{g, c, w};
  }
  throw ConfigError(where + ".type: expected piecewise, gaussian or sech2");
}

PotentialModel parse_term(const json& j, const fs::path& base_dir, unsigned long seed, int d,
                          std::vector<SampledInput>* files, const std::string& where) {
  const std::string kind = get_string(j, "kind", "", where);
  if (kind == "zero") {
    check_keys(j, {"kind"}, where);
    return PotentialModel::zero();
  }
  if (kind == "x_only") {
    check_keys(j, {"kind", "profile"}, where);
    if (!j.contains("profile")) throw ConfigError(where + ": profile is required");
    return PotentialModel(XOnlyTerm{parse_profile(j["profile"], where + ".profile")});
  }
  if (kind == "separable_product") {
    check_keys(j, {"kind", "profile", "b", "center"}, where);
    if (!j.contains("profile")) throw ConfigError(where + ": profile is required");
    return PotentialModel(SeparableTerm{parse_profile(j["profile"], where + ".profile"), get_number(j, "b", 1.0, where),
                                        get_pvec(j, "center", where)});
  }
  if (kind == "gaussian_2d_3d") {
    check_keys(j, {"kind", "g", "x0", "r0", "a", "b"}, where);
    const cplx g = j.contains("g") ? parse_complex(j["g"], where + ".g") : cplx{1.0, 0.0};
    return PotentialModel(GaussianTerm{g, get_number(j, "x0", 0.0, where), get_pvec(j, "r0", where),
                                       get_number(j, "a", 1.0, where), get_number(j, "b", 1.0, where)});
  }
  if (kind == "circular_well") {
    check_keys(j, {"kind", "value", "radius", "x0", "r0"}, where);
    const cplx v = j.contains("value") ? parse_complex(j["value"], where + ".value") : cplx{-1.0, 0.0};
    return PotentialModel(CircularWellTerm{v, get_number(j, "radius", 1.0, where), get_number(j, "x0", 0.0, where),
                                           get_pvec(j, "r0", where)});
  }
  if (kind == "sampled") {
    check_keys(j, {"kind", "file", "scale"}, where);
    const std::string file = get_string(j, "file", "", where);
    if (file.empty()) throw ConfigError(where + ".file is required");
    fs::path path(file);
    if (path.is_relative()) path = base_dir / path;
    if (!fs::exists(path)) throw ConfigError(where + ".file: no such file " + path.string());
    const cplx scale = j.contains("scale") ? parse_complex(j["scale"], where + ".scale") : cplx{1.0, 0.0};
    if (files) files->push_back({path});
    return PotentialModel(SampledTerm{std::make_shared<const SampledPotential>(SampledPotential::load(path.string())),
                                      scale});
  }
  if (kind == "rectangular_barrier") {
    check_keys(j, {"kind", "value", "x0", "x1"}, where);
    if (!j.contains("value")) throw ConfigError(where + ".value is required");
    return rectangular_barrier(parse_complex(j["value"], where + ".value"), get_number(j, "x0", 0.0, where),
                               get_number(j, "x1", 1.0, where));
  }
  if (kind == "gain_slab") {
    check_keys(j, {"kind", "gamma", "length"}, where);
    return gain_slab(get_number(j, "gamma", 1.0, where), get_number(j, "length", 1.0, where));
  }
  if (kind == "random_gaussian_mixture") {
    check_keys(j, {"kind", "seed", "terms", "coupling", "d"}, where);
    const double s = get_number(j, "seed", static_cast<double>(seed), where);
    if (s < 0) throw ConfigError(where + ".seed must be non-negative");
    return random_gaussian_mixture(static_cast<unsigned long>(s), get_int(j, "terms", 3, where),
                                   get_number(j, "coupling", 0.3, where), get_int(j, "d", d, where));
  }
  throw ConfigError(where + ".kind: unknown potential kind '" + kind + "'");
}

DirectionInput parse_direction(const json& j, const std::string& where) {
  DirectionInput d;
  if (j.is_array()) {
    for (const auto& x : j) d.vector.push_back(x.get<double>());
    return d;
  }
  check_keys(j, {"angle", "theta", "phi", "vector", "sign"}, where);
  if (j.contains("angle")) d.angle = get_number(j, "angle", 0.0, where);
  if (j.contains("theta")) d.theta = get_number(j, "theta", 0.0, where);
  if (j.contains("phi")) d.phi = get_number(j, "phi", 0.0, where);
  if (j.contains("vector")) {
    for (const auto& x : j["vector"]) d.vector.push_back(x.get<double>());
  }
  d.sign = get_int(j, "sign", 1, where);
  if (d.sign != 1 && d.sign != -1) throw ConfigError(where + ".sign must be +1 or -1");
  return d;
}

}  // namespace

Task parse_task(const std::string& name) {
  static const std::pair<const char*, Task> table[] = {
      {"transfer", Task::transfer},       {"amplitudes", Task::amplitudes},
      {"angle_scan", Task::angle_scan},   {"k_scan", Task::k_scan},
      {"singularity_scan", Task::singularity_scan}, {"verify_identities", Task::verify_identities},
      {"oracle_compare", Task::oracle_compare}};
  for (const auto& [n, t] : table) {
    if (name == n) return t;
  }
  throw ConfigError("unknown task '" + name + "'");
}

std::string task_name(Task t) {
  switch (t) {
    case Task::transfer: return "transfer";
    case Task::amplitudes: return "amplitudes";
    case Task::angle_scan: return "angle_scan";
    case Task::k_scan: return "k_scan";
    case Task::singularity_scan: return "singularity_scan";
    case Task::verify_identities: return "verify_identities";
    case Task::oracle_compare: return "oracle_compare";
  }
  return "unknown";
}

cplx parse_complex(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  if (j.is_object()) {
    check_keys(j, {"re", "im"}, where);
    return {get_number(j, "re", 0.0, where), get_number(j, "im", 0.0, where)};
  }
  throw ConfigError(where + ": expected a number, [re, im] or {\"re\", \"im\"}");
}

json load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
}

void set_path(json& cfg, const std::string& dotted, json value) {
  if (dotted.empty()) throw ConfigError("empty override key");
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("malformed override key '" + dotted + "'");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override '" + dotted + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

void apply_override(json& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  set_path(cfg, key, std::move(value));
}

PotentialModel parse_potential(const json& j, const fs::path& base_dir, unsigned long seed, int d,
                               std::vector<SampledInput>* files) {
  if (j.is_object() && !j.contains("kind") && j.contains("terms")) {
    check_keys(j, {"terms"}, "potential");
    if (!j["terms"].is_array()) throw ConfigError("potential.terms: expected an array");
    PotentialModel v;
    int i = 0;
    for (const auto& t : j["terms"]) {
      v = v + parse_term(t, base_dir, seed, d, files, "potential.terms[" + std::to_string(i++) + "]");
    }
    return v;
  }
  return parse_term(j, base_dir, seed, d, files, "potential");
}

RunConfig parse_run_config(const json& cfg, const fs::path& base_dir) {
  check_keys(cfg, {"task", "seed", "potential", "scattering", "stepper", "directions", "k_scan", "singularity_scan",
                   "oracle", "output", "report", "extraction"},
             "config");
  RunConfig rc;
  rc.merged = cfg;
  rc.task = parse_task(get_string(cfg, "task", "", "config"));
  const double seed = get_number(cfg, "seed", 0.0, "config");
  if (seed < 0 || seed != static_cast<double>(static_cast<unsigned long>(seed))) {
    throw ConfigError("config.seed must be a non-negative integer");
  }
  rc.seed = static_cast<unsigned long>(seed);

  const json sc = cfg.value("scattering", json::object());
  check_keys(sc, {"k", "d", "p_max", "n_per_axis", "grid_offset", "exclusion_band"}, "scattering");
  rc.scattering.k = get_number(sc, "k", 1.0, "scattering");
  rc.scattering.d = get_int(sc, "d", 1, "scattering");
  rc.scattering.p_max = get_number(sc, "p_max", 0.0, "scattering");
  rc.scattering.n_per_axis = get_int(sc, "n_per_axis", 32, "scattering");
  rc.scattering.grid_offset = get_bool(sc, "grid_offset", true, "scattering");
  rc.scattering.exclusion_band = get_number(sc, "exclusion_band", 1e-6, "scattering");
  if (rc.task != Task::singularity_scan) rc.scattering.validate();

  if (!cfg.contains("potential")) throw ConfigError("config.potential is required");
  rc.potential = parse_potential(cfg["potential"], base_dir, rc.seed, rc.scattering.d, &rc.sampled_files);
  if (auto req = rc.potential.required_dimension(); req && *req != rc.scattering.d) {
    throw ConfigError("sampled potential has d = " + std::to_string(*req) + " but scattering.d = " +
                      std::to_string(rc.scattering.d));
  }
  if (rc.potential.terms().size() == 1) {
    const auto& t = rc.potential.terms().front();
    if (const auto* x = std::get_if<XOnlyTerm>(&t)) {
      if (const auto* pw = std::get_if<PiecewiseProfile>(&x->profile)) rc.segments = pw->segments;
    }
    if (const auto* w = std::get_if<CircularWellTerm>(&t)) {
      if (w->r0.y == 0.0 && w->r0.z == 0.0) rc.circular_well = *w;
    }
  }

  const json st = cfg.value("stepper", json::object());
  check_keys(st, {"method", "rtol", "atol", "max_step", "growth_budget", "closure", "safety", "richardson_check",
                  "max_refinements"},
             "stepper");
  const std::string method = get_string(st, "method", "rk4", "stepper");
  if (method == "rk4") {
    rc.stepper.method = StepMethod::rk4_fixed;
  } else if (method == "dopri5") {
    rc.stepper.method = StepMethod::dopri5;
  } else {
    throw ConfigError("stepper.method: expected rk4 or dopri5");
  }
  rc.stepper.rtol = get_number(st, "rtol", rc.stepper.rtol, "stepper");
  rc.stepper.atol = get_number(st, "atol", rc.stepper.atol, "stepper");
  rc.stepper.max_step = get_number(st, "max_step", rc.stepper.max_step, "stepper");
  rc.stepper.growth_budget = get_number(st, "growth_budget", rc.stepper.growth_budget, "stepper");
  rc.stepper.safety = get_number(st, "safety", rc.stepper.safety, "stepper");
  rc.stepper.richardson_check = get_bool(st, "richardson_check", rc.stepper.richardson_check, "stepper");
  rc.stepper.max_refinements = get_int(st, "max_refinements", rc.stepper.max_refinements, "stepper");
  const std::string closure = get_string(st, "closure", "decaying", "stepper");
  if (closure == "decaying") {
    rc.stepper.closure = EvanescentClosure::decaying;
  } else if (closure == "none") {
    rc.stepper.closure = EvanescentClosure::none;
  } else {
    throw ConfigError("stepper.closure: expected decaying or none");
  }
  rc.stepper.validate();

  const json dj = cfg.value("directions", json::object());
  check_keys(dj, {"pairs", "incidence", "angles", "azimuths", "on_grid", "random_pairs", "paired"}, "directions");
  if (dj.contains("pairs")) {
    if (!dj["pairs"].is_array()) throw ConfigError("directions.pairs: expected an array");
    for (const auto& p : dj["pairs"]) {
      check_keys(p, {"n0", "n"}, "directions.pairs[]");
      if (!p.contains("n0") || !p.contains("n")) throw ConfigError("directions.pairs[]: n0 and n are required");
      rc.directions.pairs.emplace_back(parse_direction(p["n0"], "directions.pairs[].n0"),
                                       parse_direction(p["n"], "directions.pairs[].n"));
    }
  }
  if (dj.contains("incidence")) rc.directions.incidence = parse_direction(dj["incidence"], "directions.incidence");
  rc.directions.angles = get_int(dj, "angles", 0, "directions");
  rc.directions.azimuths = get_int(dj, "azimuths", 1, "directions");
  rc.directions.on_grid = get_bool(dj, "on_grid", false, "directions");
  rc.directions.random_pairs = get_int(dj, "random_pairs", 0, "directions");
  rc.directions.paired = get_bool(dj, "paired", false, "directions");
  if (rc.directions.angles < 0 || rc.directions.azimuths < 1 || rc.directions.random_pairs < 0) {
    throw ConfigError("directions: counts must be non-negative (azimuths >= 1)");
  }

  const json kj = cfg.value("k_scan", json::object());
  check_keys(kj, {"k_min", "k_max", "samples"}, "k_scan");
  rc.k_range.k_min = get_number(kj, "k_min", rc.k_range.k_min, "k_scan");
  rc.k_range.k_max = get_number(kj, "k_max", rc.k_range.k_max, "k_scan");
  rc.k_range.samples = get_int(kj, "samples", rc.k_range.samples, "k_scan");
  if (!(rc.k_range.k_min > 0.0) || !(rc.k_range.k_max >= rc.k_range.k_min) || rc.k_range.samples < 1) {
    throw ConfigError("k_scan: need 0 < k_min <= k_max and samples >= 1");
  }

  const json ss = cfg.value("singularity_scan", json::object());
  check_keys(ss, {"k_min", "k_max", "samples", "threshold_factor", "max_refine", "k_tolerance"}, "singularity_scan");
  rc.scan.k_min = get_number(ss, "k_min", rc.scan.k_min, "singularity_scan");
  rc.scan.k_max = get_number(ss, "k_max", rc.scan.k_max, "singularity_scan");
  rc.scan.samples = get_int(ss, "samples", rc.scan.samples, "singularity_scan");
  rc.scan.threshold_factor = get_number(ss, "threshold_factor", rc.scan.threshold_factor, "singularity_scan");
  rc.scan.max_refine = get_int(ss, "max_refine", rc.scan.max_refine, "singularity_scan");
  rc.scan.k_tolerance = get_number(ss, "k_tolerance", rc.scan.k_tolerance, "singularity_scan");

  const json oj = cfg.value("oracle", json::object());
  check_keys(oj, {"kind", "m_max"}, "oracle");
  const std::string ok = get_string(oj, "kind", "auto", "oracle");
  if (ok == "auto") {
    rc.oracle.kind = OracleKind::automatic;
  } else if (ok == "matching") {
    rc.oracle.kind = OracleKind::matching;
  } else if (ok == "ode") {
    rc.oracle.kind = OracleKind::ode;
  } else if (ok == "partial_wave") {
    rc.oracle.kind = OracleKind::partial_wave;
  } else if (ok == "born") {
    rc.oracle.kind = OracleKind::born;
  } else {
    throw ConfigError("oracle.kind: expected auto, matching, ode, partial_wave or born");
  }
  rc.oracle.m_max = get_int(oj, "m_max", rc.oracle.m_max, "oracle");

  const json out = cfg.value("output", json::object());
  check_keys(out, {"dir", "format"}, "output");
  rc.out_dir = get_string(out, "dir", rc.out_dir.string(), "output");
  rc.format = get_string(out, "format", "csv", "output");
  if (rc.format != "csv" && rc.format != "json") throw ConfigError("output.format: expected csv or json");

  const json rep = cfg.value("report", json::object());
  check_keys(rep, {"full_grid"}, "report");
  rc.full_grid_residual = get_bool(rep, "full_grid", false, "report");

  const json ex = cfg.value("extraction", json::object());
  check_keys(ex, {"max_condition"}, "extraction");
  rc.max_condition = get_number(ex, "max_condition", rc.max_condition, "extraction");
  if (!(rc.max_condition > 1.0)) throw ConfigError("extraction.max_condition must exceed 1");
  return rc;
}

}  // namespace tmscat::cli
