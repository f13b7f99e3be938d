// Acceptance report: one PASS/FAIL line per criterion.
//   tmscat_acceptance [AC1 AC2 ...] [--expect-fail AC5]
// Without criterion names every criterion runs. The exit status is 0 when every criterion
// passes, or when each failure is listed with --expect-fail and its secondary check holds.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <tmscat/tmscat.hpp>

using namespace tmscat;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  /// Secondary check reported alongside a failure (AC5: decrease under grid doubling).
  std::optional<bool> secondary;
};

struct Criterion {
  std::string id;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StepperOptions with_rtol(double rtol) {
  StepperOptions o;
  o.rtol = rtol;
  return o;
}

ScatteringConfig config(int d, int n, double k = 1.0) {
  ScatteringConfig c;
  c.d = d;
  c.k = k;
  c.n_per_axis = n;
  return c;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// 1D fixtures shared by AC1, AC2 and AC8.
struct Fixture1D {
  std::string name;
  PotentialModel v;
  double k;
};

std::vector<Fixture1D> fixtures_1d() {
  return {{"barrier", rectangular_barrier(1.0, 0.0, 2.0), 2.0},
          {"mixture", random_gaussian_mixture(11, 4, 0.4, 0), 1.3},
          {"sech2", sech2_1d(cplx{0.6, -0.3}, 0.2, 0.7), 1.1},
          {"absorbing_slab", gain_slab(0.5, 1.5), 1.7},
          {"complex_steps", piecewise_constant({Segment{-1.0, 0.0, cplx{0.5, 0.2}}, Segment{0.0, 0.7, cplx{-0.3, -0.4}}}),
           0.9}};
}

// Transfer matrices reused by several criteria.
struct Shared {
  std::optional<TransferMatrix> mixture_2d;  // d = 1, n = 64, rtol 1e-10
  double mixture_2d_seconds = 0.0;
  std::optional<TransferMatrix> well_64;
};
Shared shared;

const PotentialModel& mixture_2d_potential() {
  static const PotentialModel v = random_gaussian_mixture(7, 3, 0.3, 1);
  return v;
}

const TransferMatrix& mixture_2d() {
  if (!shared.mixture_2d) {
    const auto t0 = std::chrono::steady_clock::now();
    shared.mixture_2d = integrate_transfer(mixture_2d_potential(), config(1, 64), with_rtol(1e-10)).transfer;
    shared.mixture_2d_seconds = since(t0);
  }
  return *shared.mixture_2d;
}

Outcome ac1() {
  Outcome o;
  const double rtol = 1e-10;
  double worst_rel = 0.0, worst_det = 0.0;
  const auto barrier = rectangular_barrier(1.0, 0.0, 2.0);
  const auto mixture = random_gaussian_mixture(11, 4, 0.4, 0);
  const std::vector<std::pair<Oracle1DResult, std::pair<const PotentialModel*, double>>> cases = {
      {match_piecewise_1d({Segment{0.0, 2.0, 1.0}}, 2.0), {&barrier, 2.0}},
      {integrate_schrodinger_1d(mixture, 1.3), {&mixture, 1.3}}};
  for (const auto& [oracle, pk] : cases) {
    const Eigen::Matrix2cd m = transfer_1d(*pk.first, pk.second, with_rtol(rtol));
    const cplx rl = -m(1, 0) / m(1, 1), rr = m(0, 1) / m(1, 1), t = 1.0 / m(1, 1);
    worst_rel = std::max({worst_rel, rel(rl, oracle.r_left), rel(rr, oracle.r_right), rel(t, oracle.t_left)});
    worst_det = std::max(worst_det, std::abs(m.determinant() - 1.0));
  }
  o.pass = worst_rel < 1e-6 && worst_det < 1e-8;
  o.detail = "max rel R/T error " + fmt(worst_rel) + " (< 1e-6), max |det M - 1| " + fmt(worst_det) + " (< 1e-8)";
  return o;
}

Outcome ac2() {
  Outcome o;
  double pipe = 0.0, ode = 0.0;
  for (const auto& f : fixtures_1d()) {
    const auto r = integrate_transfer(f.v, config(0, 1, f.k), with_rtol(1e-10));
    const AmplitudeExtractor ex(r.transfer);
    const cplx tl = ex.rt_at(0, 1, 0, 1).t_left->total();
    const cplx tr = ex.rt_at(0, -1, 0, -1).t_right->total();
    pipe = std::max(pipe, std::abs(tl - tr));
    const auto s = integrate_schrodinger_1d(f.v, f.k);
    ode = std::max(ode, std::abs(s.t_left - s.t_right));
  }
  o.pass = pipe < 1e-9 && ode < 1e-9;
  o.detail = "max |T^l - T^r| pipeline " + fmt(pipe) + ", shooting " + fmt(ode) + " over " +
             std::to_string(fixtures_1d().size()) + " fixtures (< 1e-9)";
  return o;
}

double reciprocity_ratio(const TransferMatrix& m, std::size_t pairs) {
  const AmplitudeExtractor ex(m);
  const ScatteringData data = collect_scattering_data(ex, on_grid_pairs(ex.grid(), pairs, 2024));
  const auto rec = check_amplitude_reciprocity(data);
  return rec.sampled_max / rec.sampled_max_abs_f;
}

Outcome ac3() {
  Outcome o;
  const std::size_t pairs = 40;
  const double fine = reciprocity_ratio(mixture_2d(), pairs);
  // Tightening from 1e-8 to 1e-10 compares round-off with round-off, so the rate is taken one decade pair higher.
  const auto at = [&](double rtol) {
    return reciprocity_ratio(integrate_transfer(mixture_2d_potential(), config(1, 64), with_rtol(rtol)).transfer, pairs);
  };
  const double loose = at(1e-6), tight = at(1e-8);
  const double gain = loose / tight;
  o.pass = fine <= 1e-4 && gain >= 10.0;
  o.detail = std::to_string(pairs) + " pairs, n=64: max|f - f'|/max|f| = " + fmt(fine) + " at rtol 1e-10 (<= 1e-4); " +
             fmt(loose) + " at 1e-6, " + fmt(tight) + " at 1e-8, reduction " + fmt(gain) + "x (>= 10x)";
  return o;
}

Outcome ac4() {
  Outcome o;
  const auto recs = verify_all(mixture_2d(), 1e-10);
  double worst = 0.0;
  bool all = true;
  std::string failing;
  for (const auto& r : recs) {
    worst = std::max(worst, r.residual / r.reference_tol);
    if (!r.pass) {
      all = false;
      failing += " " + r.identity_name;
    }
  }
  bool zeros = true;
  for (int d : {0, 1, 2}) {
    const auto z = integrate_transfer(PotentialModel::zero(), config(d, 8), with_rtol(1e-10));
    for (const auto& r : verify_all(z.transfer, 1e-10)) zeros = zeros && r.residual == 0.0;
  }
  o.pass = all && zeros;
  o.detail = std::to_string(recs.size()) + " identities on the d=1 mixture (n=64), worst residual/tolerance " +
             fmt(worst) + ", v=0 residuals exactly 0: " + (zeros ? "yes" : "no") + (all ? "" : ", failing:" + failing);
  return o;
}

double well_error(int n, const PartialWaveResult& pw, int* angles) {
  const auto r = integrate_transfer(circular_well(-0.5, 1.0), config(1, n), with_rtol(1e-8));
  if (n == 64) shared.well_64 = r.transfer;
  const AmplitudeExtractor ex(r.transfer);
  const auto& g = ex.grid();
  const Direction inc = Direction::on_grid(g, g.nearest_propagating(PVec{}).first, 1);
  double num = 0.0, den = 0.0;
  *angles = 0;
  for (int i : g.propagating()) {
    for (int s : {1, -1}) {
      const Direction out = Direction::on_grid(g, i, s);
      const double theta = std::atan2(out.perp.y, out.nx) - std::atan2(inc.perp.y, inc.nx);
      const cplx f = ex.amplitude(inc, out), fo = pw.amplitude(theta);
      num += std::norm(f - fo);
      den += std::norm(fo);
      ++*angles;
    }
  }
  return std::sqrt(num / den);
}

Outcome ac5() {
  Outcome o;
  const auto pw = partial_wave_circular_well(-0.5, 1.0, 1.0, 12);
  int a64 = 0, a128 = 0;
  const double e64 = well_error(64, pw, &a64);
  const double e128 = well_error(128, pw, &a128);
  o.secondary = e128 < e64;
  o.pass = e64 <= 0.02 && *o.secondary;
  o.detail = "relative L2 error " + fmt(100.0 * e64) + "% over " + std::to_string(a64) + " angles at n=64 (<= 2%), " +
             fmt(100.0 * e128) + "% over " + std::to_string(a128) + " angles at n=128; decreasing under doubling: " +
             (*o.secondary ? "yes" : "no");
  return o;
}

Outcome ac6() {
  Outcome o;
  double worst = 0.0;
  std::string parts;
  for (int d : {1, 2}) {
    for (double g : {1e-3, 1e-4}) {
      const auto v = gaussian(cplx{g, 0.5 * g}, 0.8, 0.9, 0.1, PVec{0.2, d == 2 ? -0.1 : 0.0});
      const auto r = integrate_transfer(v, config(d, d == 1 ? 32 : 16), with_rtol(1e-8));
      const AmplitudeExtractor ex(r.transfer);
      double w = 0.0;
      for (const auto& [n0, n] : on_grid_pairs(ex.grid(), d == 1 ? 10 : 5, 3)) {
        const cplx b = born_amplitude(v, d, 1.0, n0.nx, n0.perp, n.nx, n.perp);
        w = std::max(w, std::abs(ex.amplitude(n0, n) / b - 1.0));
      }
      worst = std::max(worst, w);
      parts += " d=" + std::to_string(d) + ",g=" + fmt(g) + ":" + fmt(w);
    }
  }
  o.pass = worst < 0.01;
  o.detail = "max |f/f_Born - 1| " + fmt(worst) + " (< 1e-2);" + parts;
  return o;
}

Outcome ac7() {
  Outcome o;
  const auto root = find_gain_slab_singularity(2.0, 1.0, 3.0);
  ScanOptions scan;
  scan.k_min = 1.0;
  scan.k_max = 3.0;
  const auto res = spectral_singularity_scan(gain_slab(root.gamma, 2.0), config(0, 1), scan, StepperOptions{});
  if (res.minima.empty()) {
    o.detail = "no minimum found";
    return o;
  }
  const double dk = std::abs(res.minima.front().k - root.k);
  o.pass = dk < 1e-3 && res.minima.front().below_threshold;
  o.detail = "oracle root k*=" + fmt(root.k) + " (gamma=" + fmt(root.gamma) + "), scan minimum at " +
             std::to_string(res.minima.front().k) + ", |dk| " + fmt(dk) + " (< 1e-3), sigma_min " +
             fmt(res.minima.front().sigma_min);
  return o;
}

double dual_formula_gap(const TransferMatrix& m) {
  const AmplitudeExtractor ex(m);
  const int n = static_cast<int>(m.size());
  double gap = 0.0, scale = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const RTAmplitudes rt = ex.rt_at(a, 1, b, 1);
      gap = std::max(gap, std::abs(rt.t_left->total() - *rt.t_left_alt));
      scale = std::max(scale, std::abs(rt.t_left->total()));
    }
  }
  return gap / scale;
}

Outcome ac8() {
  Outcome o;
  double worst = 0.0;
  int count = 0;
  for (const auto& f : fixtures_1d()) {
    worst = std::max(worst, dual_formula_gap(integrate_transfer(f.v, config(0, 1, f.k), with_rtol(1e-10)).transfer));
    ++count;
  }
  worst = std::max(worst, dual_formula_gap(mixture_2d()));
  ++count;
  if (!shared.well_64) {
    shared.well_64 = integrate_transfer(circular_well(-0.5, 1.0), config(1, 64), with_rtol(1e-8)).transfer;
  }
  worst = std::max(worst, dual_formula_gap(*shared.well_64));
  ++count;
  const auto v3 = gaussian(cplx{0.3, 0.1}, 0.8, 0.9, 0.1, PVec{0.2, -0.1});
  worst = std::max(worst, dual_formula_gap(integrate_transfer(v3, config(2, 8), with_rtol(1e-8)).transfer));
  ++count;
  o.pass = worst < 1e-8;
  o.detail = "max relative gap between transmission formulas " + fmt(worst) + " over " + std::to_string(count) +
             " fixtures (< 1e-8)";
  return o;
}

Outcome ac9() {
  Outcome o;
  bool exact = true;
  for (int d : {0, 1, 2}) {
    const auto r = integrate_transfer(PotentialModel::zero(), config(d, 8), StepperOptions{});
    const TransferMatrix& m = r.transfer;
    const Eigen::Index n = m.size();
    const CMatrix id = CMatrix::Identity(2 * n, 2 * n);
    exact = exact && m.dense() == id;
    const AmplitudeExtractor ex(m);
    exact = exact && ex.s_matrix().dense() == id;
    for (const auto& [n0, nn] : on_grid_pairs(ex.grid(), 0, 1)) exact = exact && ex.amplitude(n0, nn) == cplx{};
    for (const auto& rec : verify_all(m, 1e-8)) exact = exact && rec.residual == 0.0;
  }
  const double rtol = 1e-10;
  const auto va = gaussian_1d(cplx{0.3, 0.1}, -2.0, 0.3);
  const auto vb = sech2_1d(cplx{-0.2, 0.05}, 2.0, 0.3);
  double worst = 0.0;
  for (int d : {0, 1}) {
    const ScatteringConfig c = config(d, 16);
    const auto ra = integrate_transfer(va, c, with_rtol(rtol));
    const auto rb = integrate_transfer(vb, c, with_rtol(rtol));
    const auto rab = integrate_transfer(va + vb, c, with_rtol(rtol));
    const CMatrix prod = rb.transfer.dense() * ra.transfer.dense();
    worst = std::max(worst, (prod - rab.transfer.dense()).norm() / rab.transfer.dense().norm());
  }
  o.pass = exact && worst < 10.0 * rtol;
  o.detail = std::string("v=0 gives M=I, f=0, S=I and zero residuals exactly (d=0,1,2): ") + (exact ? "yes" : "no") +
             "; composition ||M_ab - M_b M_a||/||M_ab|| " + fmt(worst) + " (< 1e-9)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> selected, expected_fail;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--expect-fail" && i + 1 < argc) {
      expected_fail.insert(argv[++i]);
    } else {
      selected.insert(a);
    }
  }
  const std::vector<Criterion> criteria = {
      {"AC1", 1.0, ac1},   {"AC2", 5.0, ac2},   {"AC3", 120.0, ac3}, {"AC4", 120.0, ac4}, {"AC5", 300.0, ac5},
      {"AC6", 600.0, ac6}, {"AC7", 60.0, ac7},  {"AC8", 300.0, ac8}, {"AC9", 60.0, ac9}};
  int hard_failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const bool prebuilt = shared.mixture_2d.has_value();
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double seconds = since(t0);
    // AC4 reuses the AC3 transfer matrix; its cost counts against both.
    if (c.id == "AC4" && prebuilt) seconds += shared.mixture_2d_seconds;
    const bool in_time = seconds <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    std::cout << c.id << (pass ? " PASS  " : " FAIL  ") << o.detail << " [" << fmt(seconds) << " s, limit "
              << fmt(c.limit_seconds) << " s" << (in_time ? "" : ", over time") << "]" << std::endl;
    if (!pass) {
      const bool tolerated = expected_fail.count(c.id) && o.secondary.value_or(false) && in_time;
      if (tolerated) {
        std::cout << "    expected failure: the primary threshold is not met; secondary check holds" << std::endl;
      } else {
        ++hard_failures;
      }
    }
  }
  return hard_failures == 0 ? 0 : 1;
}
