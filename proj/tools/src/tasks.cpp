#include "tasks.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <thread>
#include <tuple>

namespace tmscat::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  // Rethrow the first failure in index order so error reporting does not depend on scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::shared_ptr<const MomentumGrid> make_grid(const ScatteringConfig& cfg) {
  return std::make_shared<const MomentumGrid>(build_grid(cfg));
}

void push_direction(std::vector<Cell>& row, const Direction& n, int d) {
  row.emplace_back(n.nx);
  if (d >= 1) row.emplace_back(n.perp.y);
  if (d >= 2) row.emplace_back(n.perp.z);
}

void push_complex(std::vector<Cell>& row, cplx z) {
  row.emplace_back(z.real());
  row.emplace_back(z.imag());
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<std::string> pair_columns(int d) {
  return concat(concat({"k"}, direction_columns("n0", d)), direction_columns("n", d));
}

std::string table_file(const RunConfig& rc, const std::string& stem) { return stem + "." + rc.format; }

std::string table_content(const RunConfig& rc, const Table& t) {
  return rc.format == "csv" ? to_csv(t) : dump_json(to_json(t));
}

json report_json(const IntegratorReport& r) {
  return {{"x_min", r.x_min},
          {"x_max", r.x_max},
          {"slabs", r.slabs},
          {"steps", r.steps},
          {"rejected", r.rejected},
          {"h_min", r.h_min},
          {"h_max", r.h_max},
          {"generator_norm", r.generator_norm},
          {"growth_exponent", r.growth_exponent},
          {"error_estimate", r.error_estimate},
          {"rtol", r.rtol}};
}

struct Pipeline {
  std::shared_ptr<const MomentumGrid> grid;
  TransferResult result;
  double seconds = 0.0;
};

Pipeline run_pipeline(const RunConfig& rc, const ScatteringConfig& cfg) {
  const auto t0 = Clock::now();
  Pipeline p;
  p.grid = make_grid(cfg);
  p.result = integrate_transfer(rc.potential, p.grid, cfg.k, rc.stepper);
  p.seconds = seconds_since(t0);
  return p;
}

/// A direction resolved to a propagating grid point.
struct GridDirection {
  Direction n;  ///< the exact on-grid direction
  SnappedDirection snap;
};

GridDirection resolve(const MomentumGrid& grid, const Direction& requested) {
  GridDirection out;
  out.snap = snap_direction(grid, requested);
  out.n = Direction::on_grid(grid, out.snap.index, out.snap.sign);
  return out;
}

GridDirection at_position(const MomentumGrid& grid, int index, int sign) {
  GridDirection out;
  out.n = Direction::on_grid(grid, index, sign);
  out.snap = {index, grid.propagating_position(index), sign, 0.0};
  return out;
}

Direction incidence_of(const RunConfig& rc) {
  const int d = rc.scattering.d;
  return rc.directions.incidence ? to_direction(*rc.directions.incidence, d) : Direction{1.0, {}};
}

/// Outgoing directions: every on-grid direction, or the configured angular sampling.
std::vector<GridDirection> outgoing_set(const RunConfig& rc, const MomentumGrid& grid, long long& skipped) {
  std::vector<GridDirection> out;
  if (rc.directions.on_grid || grid.dim() == 0) {
    for (int s : {1, -1}) {
      for (int idx : grid.propagating()) out.push_back(at_position(grid, idx, s));
    }
    return out;
  }
  if (rc.directions.angles <= 0) throw ConfigError("directions: set angles > 0 or on_grid = true");
  for (const Direction& n : sampled_directions(grid.dim(), rc.directions.angles, rc.directions.azimuths)) {
    try {
      out.push_back(resolve(grid, n));
    } catch (const ConfigError&) {
      ++skipped;
    }
  }
  return out;
}

struct PairRequest {
  GridDirection n0, n;
};

/// Direction pairs for pairwise tasks: explicit pairs, random on-grid pairs, or incidence x outgoing set.
std::vector<PairRequest> pair_set(const RunConfig& rc, const MomentumGrid& grid, long long& skipped,
                                  int default_random = 0) {
  const int d = grid.dim();
  std::vector<PairRequest> out;
  for (const auto& [a, b] : rc.directions.pairs) {
    out.push_back({resolve(grid, to_direction(a, d)), resolve(grid, to_direction(b, d))});
  }
  const int random = rc.directions.random_pairs > 0 ? rc.directions.random_pairs
                     : (out.empty() && !rc.directions.incidence && rc.directions.angles == 0 &&
                        !rc.directions.on_grid)
                         ? default_random
                         : 0;
  if (random > 0) {
    for (const auto& [a, b] : on_grid_pairs(grid, static_cast<std::size_t>(random), rc.seed)) {
      out.push_back({resolve(grid, a), resolve(grid, b)});
    }
  }
  if (rc.directions.incidence || rc.directions.angles > 0 || rc.directions.on_grid) {
    const GridDirection n0 = resolve(grid, incidence_of(rc));
    for (const auto& n : outgoing_set(rc, grid, skipped)) out.push_back({n0, n});
  }
  if (out.empty()) throw ConfigError("no direction pairs: set directions.pairs, random_pairs, incidence or angles");
  return out;
}

/// Appends (-n, -n0) partners not already present.
void add_partners(const MomentumGrid& grid, std::vector<PairRequest>& pairs) {
  using Key = std::tuple<int, int, int, int>;
  std::set<Key> seen;
  for (const auto& p : pairs) seen.insert({p.n0.snap.index, p.n0.snap.sign, p.n.snap.index, p.n.snap.sign});
  const auto& par = grid.parity();
  const std::size_t base = pairs.size();
  for (std::size_t i = 0; i < base; ++i) {
    const PairRequest p = pairs[i];
    const int a = par[static_cast<std::size_t>(p.n.snap.index)];
    const int b = par[static_cast<std::size_t>(p.n0.snap.index)];
    const Key key{a, -p.n.snap.sign, b, -p.n0.snap.sign};
    if (!seen.insert(key).second) continue;
    pairs.push_back({at_position(grid, a, -p.n.snap.sign), at_position(grid, b, -p.n0.snap.sign)});
  }
}

double snap_of(const PairRequest& p) { return std::max(p.n0.snap.snap_distance, p.n.snap.snap_distance); }

// ---------------------------------------------------------------------------

TaskResult task_transfer(const RunConfig& rc) {
  TaskResult res;
  const Pipeline p = run_pipeline(rc, rc.scattering);
  const TransferMatrix& m = p.result.transfer;
  const MomentumGrid& g = *p.grid;
  Table t{{"block", "row", "col", "Re", "Im"}, {}};
  const std::pair<const char*, const CMatrix*> blocks[] = {{"M11", &m.m11}, {"M12", &m.m12}, {"M21", &m.m21},
                                                            {"M22", &m.m22}};
  for (const auto& [name, mat] : blocks) {
    for (Eigen::Index i = 0; i < mat->rows(); ++i) {
      for (Eigen::Index j = 0; j < mat->cols(); ++j) {
        std::vector<Cell> row{std::string(name), static_cast<long long>(i), static_cast<long long>(j)};
        push_complex(row, (*mat)(i, j));
        t.add(std::move(row));
      }
    }
  }
  Table gt{{"position", "index", "p_y", "p_z", "weight", "varpi"}, {}};
  for (int pos = 0; pos < g.propagating_size(); ++pos) {
    const int idx = g.propagating()[static_cast<std::size_t>(pos)];
    gt.add({static_cast<long long>(pos), static_cast<long long>(idx), g.point(idx).y, g.point(idx).z, g.weight(idx),
            varpi(g.point(idx), rc.scattering.k).real()});
  }
  res.files.emplace_back(table_file(rc, "transfer"), table_content(rc, t));
  res.files.emplace_back(table_file(rc, "grid"), table_content(rc, gt));
  const Eigen::JacobiSVD<CMatrix> svd(m.m22);
  const auto& sv = svd.singularValues();
  res.summary = {{"integrator", report_json(m.report)},
                 {"propagating_points", g.propagating_size()},
                 {"grid_points", g.size()},
                 {"sigma_min_M22", sv(sv.size() - 1)},
                 {"condition_M22", sv(0) / sv(sv.size() - 1)}};
  res.timings["transfer_seconds"] = p.seconds;
  return res;
}

TaskResult task_amplitudes(const RunConfig& rc) {
  TaskResult res;
  const Pipeline p = run_pipeline(rc, rc.scattering);
  const AmplitudeExtractor ex(p.result.transfer, rc.max_condition);
  const int d = rc.scattering.d;
  long long skipped = 0;
  auto pairs = pair_set(rc, *p.grid, skipped, 20);
  if (rc.directions.paired) add_partners(*p.grid, pairs);
  Table t{concat(pair_columns(d), {"Re_f", "Im_f", "abs2_f", "channel", "Re_RT", "Im_RT", "Re_T_singular",
                                   "Im_T_singular", "Re_T_alt", "Im_T_alt", "snap_distance"}),
          {}};
  for (const auto& pr : pairs) {
    const auto& a = pr.n0.snap;
    const auto& b = pr.n.snap;
    const cplx f = ex.amplitude_at(a.position, a.sign, b.position, b.sign);
    const RTAmplitudes rt = ex.rt_at(a.position, a.sign, b.position, b.sign);
    std::vector<Cell> row{rc.scattering.k};
    push_direction(row, pr.n0.n, d);
    push_direction(row, pr.n.n, d);
    push_complex(row, f);
    row.emplace_back(std::norm(f));
    const std::string blank;
    if (rt.r_left || rt.r_right) {
      row.emplace_back(std::string(rt.r_left ? "R_left" : "R_right"));
      push_complex(row, rt.r_left ? *rt.r_left : *rt.r_right);
      for (int i = 0; i < 4; ++i) row.emplace_back(blank);
    } else {
      const TransmissionValue& tv = rt.t_left ? *rt.t_left : *rt.t_right;
      row.emplace_back(std::string(rt.t_left ? "T_left" : "T_right"));
      push_complex(row, tv.smooth);
      push_complex(row, tv.singular);
      if (rt.t_left_alt) {
        push_complex(row, *rt.t_left_alt);
      } else {
        row.emplace_back(blank);
        row.emplace_back(blank);
      }
    }
    row.emplace_back(snap_of(pr));
    t.add(std::move(row));
  }
  res.files.emplace_back(table_file(rc, "amplitudes"), table_content(rc, t));
  res.summary = {{"integrator", report_json(p.result.transfer.report)},
                 {"pairs", pairs.size()},
                 {"condition_M22", ex.condition()},
                 {"sigma_min_M22", ex.sigma_min()}};
  if (skipped) res.advisory["skipped_directions"] = skipped;
  res.timings["transfer_seconds"] = p.seconds;
  return res;
}

TaskResult task_angle_scan(const RunConfig& rc) {
  TaskResult res;
  const Pipeline p = run_pipeline(rc, rc.scattering);
  const AmplitudeExtractor ex(p.result.transfer, rc.max_condition);
  const int d = rc.scattering.d;
  const MomentumGrid& g = *p.grid;
  long long skipped = 0;
  const GridDirection n0 = resolve(g, incidence_of(rc));
  std::vector<PairRequest> pairs;
  for (const auto& n : outgoing_set(rc, g, skipped)) pairs.push_back({n0, n});
  if (rc.directions.paired) add_partners(g, pairs);
  Table t{concat(pair_columns(d), {"Re_f", "Im_f", "abs2_f", "snap_distance"}), {}};
  for (const auto& pr : pairs) {
    const cplx f = ex.amplitude_at(pr.n0.snap.position, pr.n0.snap.sign, pr.n.snap.position, pr.n.snap.sign);
    std::vector<Cell> row{rc.scattering.k};
    push_direction(row, pr.n0.n, d);
    push_direction(row, pr.n.n, d);
    push_complex(row, f);
    row.emplace_back(std::norm(f));
    row.emplace_back(snap_of(pr));
    t.add(std::move(row));
  }
  res.files.emplace_back(table_file(rc, "angle_scan"), table_content(rc, t));
  res.summary = {{"integrator", report_json(p.result.transfer.report)},
                 {"rows", t.rows.size()},
                 {"condition_M22", ex.condition()}};
  if (skipped) res.advisory["skipped_directions"] = skipped;
  res.timings["transfer_seconds"] = p.seconds;
  return res;
}

TaskResult task_k_scan(const RunConfig& rc, int threads) {
  TaskResult res;
  const int d = rc.scattering.d;
  const KRange& kr = rc.k_range;
  const double ratio = rc.scattering.effective_p_max() / rc.scattering.k;
  struct Slot {
    std::vector<std::vector<Cell>> rows;
    long long skipped = 0;
    std::string note;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(kr.samples));
  const auto t0 = Clock::now();
  parallel_for(kr.samples, threads, [&](int i) {
    Slot& slot = slots[static_cast<std::size_t>(i)];
    const double k = kr.samples == 1 ? kr.k_min : kr.k_min + (kr.k_max - kr.k_min) * i / (kr.samples - 1);
    ScatteringConfig cfg = rc.scattering;
    cfg.k = k;
    cfg.p_max = ratio * k;
    Pipeline p;
    try {
      p = run_pipeline(rc, cfg);
    } catch (const GridResonanceError&) {
      slot.note = "grid_resonance";
      return;
    }
    std::optional<AmplitudeExtractor> ex;
    try {
      ex.emplace(p.result.transfer, rc.max_condition);
    } catch (const NearSingularError&) {
      slot.note = "near_singular";
      return;
    }
    auto pairs = pair_set(rc, *p.grid, slot.skipped);
    for (const auto& pr : pairs) {
      const cplx f = ex->amplitude_at(pr.n0.snap.position, pr.n0.snap.sign, pr.n.snap.position, pr.n.snap.sign);
      std::vector<Cell> row{k};
      push_direction(row, pr.n0.n, d);
      push_direction(row, pr.n.n, d);
      push_complex(row, f);
      row.emplace_back(std::norm(f));
      row.emplace_back(snap_of(pr));
      row.emplace_back(ex->sigma_min());
      row.emplace_back(ex->condition());
      slot.rows.push_back(std::move(row));
    }
  });
  Table t{concat(pair_columns(d), {"Re_f", "Im_f", "abs2_f", "snap_distance", "sigma_min_M22", "condition_M22"}),
          {}};
  long long skipped = 0;
  json skipped_k = json::array();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (auto& r : slots[i].rows) t.add(std::move(r));
    skipped += slots[i].skipped;
    if (!slots[i].note.empty()) {
      const double k = kr.samples == 1 ? kr.k_min
                                       : kr.k_min + (kr.k_max - kr.k_min) * static_cast<double>(i) / (kr.samples - 1);
      skipped_k.push_back({{"k", k}, {"reason", slots[i].note}});
    }
  }
  res.files.emplace_back(table_file(rc, "k_scan"), table_content(rc, t));
  res.summary = {{"k_samples", kr.samples}, {"rows", t.rows.size()}};
  if (skipped) res.advisory["skipped_directions"] = skipped;
  if (!skipped_k.empty()) res.advisory["skipped_k"] = skipped_k;
  res.timings["scan_seconds"] = seconds_since(t0);
  return res;
}

TaskResult task_singularity_scan(const RunConfig& rc) {
  TaskResult res;
  const auto t0 = Clock::now();
  const ScanResult scan = spectral_singularity_scan(rc.potential, rc.scattering, rc.scan, rc.stepper);
  Table samples{{"k", "sigma_min_M22", "condition_M22", "skipped"}, {}};
  for (const auto& s : scan.samples) {
    samples.add({s.k, s.sigma_min, s.condition, static_cast<long long>(s.skipped)});
  }
  Table minima{{"k", "sigma_min_M22", "condition_M22", "below_threshold"}, {}};
  for (const auto& m : scan.minima) {
    minima.add({m.k, m.sigma_min, m.condition, static_cast<long long>(m.below_threshold)});
  }
  res.files.emplace_back(table_file(rc, "singularity_scan"), table_content(rc, samples));
  res.files.emplace_back(table_file(rc, "singularity_candidates"), table_content(rc, minima));
  json report = {{"threshold", scan.threshold}, {"candidates", json::array()}};
  for (const auto& m : scan.minima) {
    report["candidates"].push_back({{"k", m.k},
                                    {"sigma_min_M22", m.sigma_min},
                                    {"condition_M22", m.condition},
                                    {"below_threshold", m.below_threshold}});
  }
  res.files.emplace_back("singularity_scan_report.json", dump_json(report));
  res.summary = report;
  res.timings["scan_seconds"] = seconds_since(t0);
  return res;
}

double relative_or_zero(double num, double den) { return num == 0.0 ? 0.0 : num / std::max(den, 1e-300); }

TaskResult task_verify_identities(const RunConfig& rc) {
  TaskResult res;
  const Pipeline p = run_pipeline(rc, rc.scattering);
  const TransferMatrix& m = p.result.transfer;
  const MomentumGrid& g = *p.grid;
  const auto t0 = Clock::now();
  std::vector<ResidualRecord> records = verify_all(m, rc.stepper.rtol);
  const double tol = records.front().reference_tol;

  const AmplitudeExtractor ex(m, rc.max_condition);
  long long skipped = 0;
  std::vector<std::pair<Direction, Direction>> dirs;
  for (const auto& pr : pair_set(rc, g, skipped, 20)) dirs.emplace_back(pr.n0.n, pr.n.n);
  const ScatteringData data = collect_scattering_data(ex, dirs);
  const AmplitudeReciprocity rec = check_amplitude_reciprocity(data);
  const auto add = [&](const std::string& name, double r) { records.push_back({name, r, tol, r < tol}); };
  add("amplitude_reciprocity_sampled", relative_or_zero(rec.sampled_max, rec.sampled_max_abs_f));
  add("amplitude_reciprocity_all_pairs", relative_or_zero(rec.full_max, rec.full_max_abs_f));
  add("R_left_reciprocity", relative_or_zero(rec.r_left, data.r_left.cwiseAbs().maxCoeff()));
  add("R_right_reciprocity", relative_or_zero(rec.r_right, data.r_right.cwiseAbs().maxCoeff()));
  add("T_left_right_reciprocity", relative_or_zero(rec.t_lr, data.t_left_smooth.cwiseAbs().maxCoeff()));

  double dual = 0.0, tmax = 0.0;
  for (int a = 0; a < g.propagating_size(); ++a) {
    for (int b = 0; b < g.propagating_size(); ++b) {
      const RTAmplitudes rt = ex.rt_at(a, 1, b, 1);
      dual = std::max(dual, std::abs(rt.t_left->total() - *rt.t_left_alt));
      tmax = std::max(tmax, std::abs(rt.t_left->total()));
    }
  }
  add("T_left_dual_formula", relative_or_zero(dual, tmax));

  const Interval sup = rc.potential.support_bounds();
  const double xmid = sup.empty() ? 0.0 : 0.5 * (sup.lo + sup.hi);
  const EffectiveHamiltonian h(rc.potential, p.grid, rc.scattering.k);
  add("H_anti_pseudo_hermiticity", hamiltonian_residual(h.at(xmid), g, rc.scattering.k));
  if (rc.full_grid_residual) {
    add("U_full_grid_anti_pseudo_unitarity", full_grid_unitarity_residual(p.result.full_u, g, rc.scattering.k));
  }

  Table t{{"identity_name", "residual", "reference_tol", "pass"}, {}};
  json jr = json::array();
  bool all = true;
  for (const auto& r : records) {
    t.add({r.identity_name, r.residual, r.reference_tol, static_cast<long long>(r.pass)});
    jr.push_back({{"identity_name", r.identity_name},
                  {"residual", r.residual},
                  {"reference_tol", r.reference_tol},
                  {"pass", r.pass}});
    all = all && r.pass;
  }
  res.files.emplace_back(table_file(rc, "identities"), table_content(rc, t));
  res.files.emplace_back("identities_report.json",
                         dump_json({{"all_pass", all}, {"condition_M22", ex.condition()}, {"records", jr}}));
  res.identity_failure = !all;
  res.summary = {{"integrator", report_json(m.report)}, {"all_pass", all}, {"condition_M22", ex.condition()}};
  if (skipped) res.advisory["skipped_directions"] = skipped;
  res.timings["transfer_seconds"] = p.seconds;
  res.timings["check_seconds"] = seconds_since(t0);
  return res;
}

TaskResult oracle_compare_1d(const RunConfig& rc) {
  TaskResult res;
  if (!rc.potential.is_x_only()) throw ConfigError("oracle_compare with d = 0 needs an x-only potential");
  OracleKind kind = rc.oracle.kind;
  if (kind == OracleKind::automatic) kind = rc.segments ? OracleKind::matching : OracleKind::ode;
  if (kind == OracleKind::matching && !rc.segments) {
    throw ConfigError("matching oracle needs a piecewise-constant x-only potential");
  }
  if (kind != OracleKind::matching && kind != OracleKind::ode) {
    throw ConfigError("oracle.kind for d = 0 must be auto, matching or ode");
  }
  const double k = rc.scattering.k;
  const auto t0 = Clock::now();
  const Eigen::Matrix2cd mp = transfer_1d(rc.potential, k, rc.stepper);
  const double t_pipe = seconds_since(t0);
  const auto t1 = Clock::now();
  const Oracle1DResult o =
      kind == OracleKind::matching ? match_piecewise_1d(*rc.segments, k) : integrate_schrodinger_1d(rc.potential, k);
  const double t_oracle = seconds_since(t1);
  const cplx det = mp.determinant();
  const std::pair<std::string, std::pair<cplx, cplx>> rows[] = {
      {"r_left", {-mp(1, 0) / mp(1, 1), o.r_left}}, {"r_right", {mp(0, 1) / mp(1, 1), o.r_right}},
      {"t_left", {det / mp(1, 1), o.t_left}},       {"t_right", {1.0 / mp(1, 1), o.t_right}},
      {"M11", {mp(0, 0), o.m(0, 0)}},               {"M12", {mp(0, 1), o.m(0, 1)}},
      {"M21", {mp(1, 0), o.m(1, 0)}},               {"M22", {mp(1, 1), o.m(1, 1)}}};
  double max_delta = 0.0, max_rel = 0.0;
  for (const auto& [name, v] : rows) {
    const double delta = std::abs(v.first - v.second);
    max_delta = std::max(max_delta, delta);
    max_rel = std::max(max_rel, relative_or_zero(delta, std::abs(v.second)));
  }
  Table t{{"k", "quantity", "Re_pipeline", "Im_pipeline", "Re_oracle", "Im_oracle", "abs_delta", "max_abs_delta"}, {}};
  for (const auto& [name, v] : rows) {
    std::vector<Cell> row{k, name};
    push_complex(row, v.first);
    push_complex(row, v.second);
    row.emplace_back(std::abs(v.first - v.second));
    row.emplace_back(max_delta);
    t.add(std::move(row));
  }
  res.files.emplace_back(table_file(rc, "oracle_compare"), table_content(rc, t));
  res.summary = {{"oracle", kind == OracleKind::matching ? "matching" : "ode"},
                 {"max_abs_delta", max_delta},
                 {"max_rel_delta", max_rel},
                 {"det_M_minus_1", std::abs(det - 1.0)},
                 {"wronskian_drift", o.wronskian_drift}};
  if (o.flagged) res.advisory["oracle_flagged"] = true;
  res.timings["pipeline_seconds"] = t_pipe;
  res.timings["oracle_seconds"] = t_oracle;
  return res;
}

double scattering_angle(const Direction& n0, const Direction& n, int d) {
  if (d == 1) return std::remainder(std::atan2(n.perp.y, n.nx) - std::atan2(n0.perp.y, n0.nx), 2.0 * kPi);
  const double dot = n0.nx * n.nx + n0.perp.y * n.perp.y + n0.perp.z * n.perp.z;
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

TaskResult oracle_compare_nd(const RunConfig& rc) {
  TaskResult res;
  const int d = rc.scattering.d;
  OracleKind kind = rc.oracle.kind;
  if (kind == OracleKind::automatic) kind = (d == 1 && rc.circular_well) ? OracleKind::partial_wave : OracleKind::born;
  if (kind == OracleKind::matching || kind == OracleKind::ode) {
    throw ConfigError("oracle.kind matching/ode applies to d = 0 only");
  }
  if (kind == OracleKind::partial_wave && !(d == 1 && rc.circular_well)) {
    throw ConfigError("partial-wave oracle needs d = 1 and a single circular well centred on the x axis");
  }
  const Pipeline p = run_pipeline(rc, rc.scattering);
  const AmplitudeExtractor ex(p.result.transfer, rc.max_condition);
  const double k = rc.scattering.k;
  const auto t1 = Clock::now();
  std::optional<PartialWaveResult> pw;
  if (kind == OracleKind::partial_wave) {
    pw = partial_wave_circular_well(rc.circular_well->value, rc.circular_well->radius, k, rc.oracle.m_max);
    if (pw->flagged) res.advisory["oracle_flagged"] = true;
  }
  long long skipped = 0;
  RunConfig local = rc;
  if (local.directions.pairs.empty() && local.directions.random_pairs == 0 && local.directions.angles == 0) {
    local.directions.on_grid = true;
  }
  const auto pairs = pair_set(local, *p.grid, skipped);
  struct Row {
    PairRequest pr;
    double theta;
    cplx f, fo;
  };
  std::vector<Row> rows;
  double num = 0.0, den = 0.0, max_delta = 0.0;
  for (const auto& pr : pairs) {
    const cplx f = ex.amplitude_at(pr.n0.snap.position, pr.n0.snap.sign, pr.n.snap.position, pr.n.snap.sign);
    const double theta = scattering_angle(pr.n0.n, pr.n.n, d);
    const cplx fo = pw ? pw->amplitude(theta)
                       : born_amplitude(rc.potential, d, k, pr.n0.n.nx, pr.n0.n.perp, pr.n.n.nx, pr.n.n.perp);
    num += std::norm(f - fo);
    den += std::norm(fo);
    max_delta = std::max(max_delta, std::abs(f - fo));
    rows.push_back({pr, theta, f, fo});
  }
  const double t_oracle = seconds_since(t1);
  Table t{concat(pair_columns(d), {"theta", "Re_pipeline", "Im_pipeline", "Re_oracle", "Im_oracle", "abs_delta",
                                   "max_abs_delta"}),
          {}};
  for (const auto& r : rows) {
    std::vector<Cell> row{k};
    push_direction(row, r.pr.n0.n, d);
    push_direction(row, r.pr.n.n, d);
    row.emplace_back(r.theta);
    push_complex(row, r.f);
    push_complex(row, r.fo);
    row.emplace_back(std::abs(r.f - r.fo));
    row.emplace_back(max_delta);
    t.add(std::move(row));
  }
  res.files.emplace_back(table_file(rc, "oracle_compare"), table_content(rc, t));
  res.summary = {{"oracle", pw ? "partial_wave" : "born"},
                 {"rows", rows.size()},
                 {"relative_l2_error", den > 0.0 ? std::sqrt(num / den) : std::sqrt(num)},
                 {"max_abs_delta", max_delta},
                 {"integrator", report_json(p.result.transfer.report)}};
  if (pw) res.summary["partial_wave_tail_bound"] = pw->tail_bound;
  if (skipped) res.advisory["skipped_directions"] = skipped;
  res.timings["pipeline_seconds"] = p.seconds;
  res.timings["oracle_seconds"] = t_oracle;
  return res;
}

}  // namespace

Direction to_direction(const DirectionInput& in, int d) {
  Direction n;
  if (!in.vector.empty()) {
    if (static_cast<int>(in.vector.size()) != d + 1) {
      throw ConfigError("direction vector needs " + std::to_string(d + 1) + " components");
    }
    n.nx = in.vector[0];
    if (d >= 1) n.perp.y = in.vector[1];
    if (d >= 2) n.perp.z = in.vector[2];
  } else if (in.angle) {
    if (d != 1) throw ConfigError("direction 'angle' applies to d = 1; use theta/phi for d = 2");
    n = Direction::from_angle(*in.angle);
  } else if (in.theta) {
    if (d != 2) throw ConfigError("direction theta/phi applies to d = 2");
    n = Direction::from_spherical(*in.theta, in.phi.value_or(0.0));
  } else {
    n.nx = in.sign;
  }
  n.validate(d);
  return n;
}

std::vector<Direction> sampled_directions(int d, int angles, int azimuths) {
  std::vector<Direction> out;
  if (d == 0) return {Direction{1.0, {}}, Direction{-1.0, {}}};
  if (d == 1) {
    for (int j = 0; j < angles; ++j) out.push_back(Direction::from_angle(2.0 * kPi * (j + 0.5) / angles));
    return out;
  }
  for (int j = 0; j < angles; ++j) {
    for (int l = 0; l < azimuths; ++l) {
      out.push_back(Direction::from_spherical(kPi * (j + 0.5) / angles, 2.0 * kPi * l / azimuths));
    }
  }
  return out;
}

std::vector<std::string> direction_columns(const std::string& prefix, int d) {
  std::vector<std::string> cols{prefix + "x"};
  for (int i = 1; i <= d; ++i) cols.push_back(prefix + "_transverse_" + std::to_string(i));
  return cols;
}

TaskResult run_task(const RunConfig& rc, int threads) {
  switch (rc.task) {
    case Task::transfer: return task_transfer(rc);
    case Task::amplitudes: return task_amplitudes(rc);
    case Task::angle_scan: return task_angle_scan(rc);
    case Task::k_scan: return task_k_scan(rc, threads);
    case Task::singularity_scan: return task_singularity_scan(rc);
    case Task::verify_identities: return task_verify_identities(rc);
    case Task::oracle_compare: return rc.scattering.d == 0 ? oracle_compare_1d(rc) : oracle_compare_nd(rc);
  }
  throw ConfigError("unhandled task");
}

}  // namespace tmscat::cli
