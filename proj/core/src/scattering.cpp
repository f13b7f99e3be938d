#include "tmscat/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "tmscat/errors.hpp"

namespace tmscat {

Direction Direction::from_angle(double theta) { return {std::cos(theta), PVec{std::sin(theta), 0.0}}; }

Direction Direction::from_spherical(double theta, double phi) {
  return {std::cos(theta), PVec{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi)}};
}

Direction Direction::on_grid(const MomentumGrid& grid, int index, int sign) {
  if (!grid.is_propagating(index)) throw ConfigError("on_grid direction needs a propagating grid point");
  const double k = grid.k();
  const PVec& p = grid.point(index);
  return {(sign > 0 ? 1.0 : -1.0) * varpi(p, k).real() / k, (1.0 / k) * p};
}

void Direction::validate(int d) const {
  if (d < 2 && perp.z != 0.0) throw ConfigError("direction has a z component in fewer than three dimensions");
  if (d == 0 && perp.y != 0.0) throw ConfigError("one-dimensional directions are +x or -x");
  const double norm = std::sqrt(nx * nx + perp.norm2());
  if (std::abs(norm - 1.0) > 1e-12) throw ConfigError("direction is not a unit vector");
  if (std::abs(nx) < 1e-6) throw ConfigError("grazing direction (|n_x| < 1e-6) has no amplitude");
}

SnappedDirection snap_direction(const MomentumGrid& grid, const Direction& n) {
  n.validate(grid.dim());
  const PVec target = grid.k() * n.perp;
  const auto [idx, dist] = grid.nearest_propagating(target);
  if (idx < 0) throw ConfigError("grid has no propagating points");
  const PVec off = grid.point(idx) - target;
  const double half = 0.5 * grid.spacing() * (1.0 + 1e-12);
  if (grid.dim() > 0 && (std::abs(off.y) > half || std::abs(off.z) > half)) {
    std::ostringstream os;
    os << "direction transverse momentum is " << dist << " from the nearest propagating grid point";
    throw ConfigError(os.str());
  }
  return {idx, grid.propagating_position(idx), n.sign(), dist};
}

cplx c_d(int d, double k) {
  if (d == 0) return {k, 0.0};
  if (d == 1) return std::sqrt(cplx{0.0, 2.0 * kPi}) * std::sqrt(k);
  return {0.0, 2.0 * kPi};
}

const CMatrix& QuadrantKernels::select(int incident_sign, int scattered_sign) const {
  if (incident_sign > 0) return scattered_sign > 0 ? pp : pm;
  return scattered_sign > 0 ? mp : mm;
}

AmplitudeExtractor::AmplitudeExtractor(const TransferMatrix& m, double max_condition)
    : m_(m), prop_(m.grid->propagating()) {
  const Eigen::Index n = m_.size();
  if (n == 0) throw ConfigError("transfer matrix has no propagating channels");
  const Eigen::JacobiSVD<CMatrix> svd(m_.m22);
  const auto& sv = svd.singularValues();
  sigma_min_ = sv(n - 1);
  condition_ = sigma_min_ > 0.0 ? sv(0) / sigma_min_ : std::numeric_limits<double>::infinity();
  // Singular values are measured against the free value 1 as well, so a 1x1 block can be singular.
  const double gate = sigma_min_ > 0.0 ? std::max(sv(0), 1.0) / sigma_min_ : condition_;
  if (!(gate <= max_condition)) {
    std::ostringstream os;
    os << "M22 is numerically singular (near spectral singularity): sigma_min=" << sigma_min_
       << ", cond=" << gate;
    throw NearSingularError(os.str(), sigma_min_, gate);
  }
  const Eigen::PartialPivLU<CMatrix> lu(m_.m22);
  const CMatrix id = CMatrix::Identity(n, n);
  m22inv_ = lu.inverse();
  const CMatrix y = lu.solve(m_.m21);                                      // M22^-1 M21
  const CMatrix zt = lu.transpose().solve(CMatrix(m_.m12.transpose()));
  const CMatrix z = zt.transpose();  // M12 M22^-1
  q_.pp = m_.m11 - m_.m12 * y - id;
  q_.pm = -y;
  q_.mp = z;
  q_.mm = m22inv_ - id;
  cd_ = c_d(m_.grid->dim(), m_.k);
}

double AmplitudeExtractor::prefactor(int a) const {
  const MomentumGrid& g = *m_.grid;
  const int idx = prop_[static_cast<std::size_t>(a)];
  return std::pow(2.0 * kPi, g.dim()) * varpi(g.point(idx), m_.k).real() / g.weight(idx);
}

cplx AmplitudeExtractor::amplitude_at(int a, int s0, int b, int s) const {
  return prefactor(a) / cd_ * q_.select(s0, s)(b, a);
}

cplx AmplitudeExtractor::amplitude(const Direction& n0, const Direction& n) const {
  const SnappedDirection a = snap_direction(grid(), n0);
  const SnappedDirection b = snap_direction(grid(), n);
  return amplitude_at(a.position, a.sign, b.position, b.sign);
}

RTAmplitudes AmplitudeExtractor::rt_at(int a, int s0, int b, int s) const {
  const MomentumGrid& g = *m_.grid;
  const double kd = std::pow(m_.k, g.dim() - 1);
  const double pre = kd * prefactor(a);
  const cplx kernel = pre * q_.select(s0, s)(b, a);
  RTAmplitudes out;
  const TransmissionValue t{a == b ? cplx{pre, 0.0} : cplx{}, kernel};
  if (s0 > 0 && s < 0) out.r_left = kernel;
  if (s0 < 0 && s > 0) out.r_right = kernel;
  if (s0 < 0 && s < 0) out.t_right = t;
  if (s0 > 0 && s > 0) {
    out.t_left = t;
    // Alternative form: varpi(k) <-k0| M22^-1 |-k> with the parity-mapped positions.
    const int ib = prop_[static_cast<std::size_t>(b)];
    const int pa = g.propagating_position(g.parity()[static_cast<std::size_t>(prop_[static_cast<std::size_t>(a)])]);
    const int pb_idx = g.parity()[static_cast<std::size_t>(ib)];
    const int pb = g.propagating_position(pb_idx);
    out.t_left_alt = std::pow(2.0 * kPi, g.dim()) * kd * varpi(g.point(ib), m_.k).real() * m22inv_(pa, pb) /
                     g.weight(pb_idx);
  }
  return out;
}

RTAmplitudes AmplitudeExtractor::rt(const Direction& n0, const Direction& n) const {
  const SnappedDirection a = snap_direction(grid(), n0);
  const SnappedDirection b = snap_direction(grid(), n);
  return rt_at(a.position, a.sign, b.position, b.sign);
}

BlockOperator AmplitudeExtractor::s_matrix() const {
  const Eigen::Index n = m_.size();
  const CMatrix id = CMatrix::Identity(n, n);
  return BlockOperator(CMatrix(q_.pp + id), q_.mp, q_.pm, m22inv_);
}

cplx scattering_amplitude(const TransferMatrix& m, const Direction& n0, const Direction& n) {
  return AmplitudeExtractor(m).amplitude(n0, n);
}

RTAmplitudes rt_amplitudes(const TransferMatrix& m, const Direction& n0, const Direction& n) {
  return AmplitudeExtractor(m).rt(n0, n);
}

BlockOperator assemble_S(const TransferMatrix& m) { return AmplitudeExtractor(m).s_matrix(); }

BlockOperator s_prime_from_s(const BlockOperator& s) {
  return BlockOperator(CMatrix(s.block(1, 0)), CMatrix(s.block(1, 1)), CMatrix(s.block(0, 0)),
                       CMatrix(s.block(0, 1)));
}

BlockOperator assemble_S_prime(const TransferMatrix& m) { return s_prime_from_s(assemble_S(m)); }

ScatteringData collect_scattering_data(const AmplitudeExtractor& ex,
                                       const std::vector<std::pair<Direction, Direction>>& pairs) {
  const MomentumGrid& g = ex.grid();
  const TransferMatrix& m = ex.transfer();
  const Eigen::Index n = m.size();
  ScatteringData out;
  out.k = m.k;
  out.d = g.dim();
  out.c_d = c_d(g.dim(), m.k);
  out.kernels = ex.kernels();
  out.amp_scale.resize(n);
  out.t_singular.resize(n);
  const double kd = std::pow(m.k, g.dim() - 1);
  RVector pre(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const int idx = g.propagating()[static_cast<std::size_t>(a)];
    pre(a) = std::pow(2.0 * kPi, g.dim()) * varpi(g.point(idx), m.k).real() / g.weight(idx);
    out.amp_scale(a) = pre(a) / out.c_d;
    out.t_singular(a) = kd * pre(a);
  }
  const auto scale_cols = [&](const CMatrix& q) { return CMatrix(kd * q * pre.asDiagonal()); };
  out.r_left = scale_cols(ex.kernels().pm);
  out.r_right = scale_cols(ex.kernels().mp);
  out.t_left_smooth = scale_cols(ex.kernels().pp);
  out.t_right_smooth = scale_cols(ex.kernels().mm);
  out.s = ex.s_matrix();
  out.s_prime = s_prime_from_s(out.s);
  for (int i : g.propagating()) {
    out.parity.push_back(g.propagating_position(g.parity()[static_cast<std::size_t>(i)]));
  }
  for (const auto& [n0, n1] : pairs) {
    AmplitudeSample smp{n0, n1, snap_direction(g, n0), snap_direction(g, n1), {}};
    smp.f = ex.amplitude_at(smp.snap0.position, smp.snap0.sign, smp.snap.position, smp.snap.sign);
    out.f_samples.push_back(smp);
  }
  return out;
}

std::vector<std::pair<Direction, Direction>> on_grid_pairs(const MomentumGrid& grid, std::size_t count,
                                                           unsigned long seed) {
  const auto& prop = grid.propagating();
  std::vector<std::pair<Direction, Direction>> out;
  if (count == 0) {
    for (int s0 : {1, -1}) {
      for (int a : prop) {
        for (int s : {1, -1}) {
          for (int b : prop) out.emplace_back(Direction::on_grid(grid, a, s0), Direction::on_grid(grid, b, s));
        }
      }
    }
    return out;
  }
  std::mt19937_64 gen(seed);
  const auto pick = [&](std::size_t n) { return static_cast<std::size_t>(gen() % n); };
  for (std::size_t c = 0; c < count; ++c) {
    const int a = prop[pick(prop.size())];
    const int b = prop[pick(prop.size())];
    const int s0 = pick(2) ? 1 : -1;
    const int s = pick(2) ? 1 : -1;
    out.emplace_back(Direction::on_grid(grid, a, s0), Direction::on_grid(grid, b, s));
  }
  return out;
}

ScanSample m22_spectrum(const PotentialModel& v, ScatteringConfig cfg, double k, const StepperOptions& opts) {
  const double ratio = cfg.effective_p_max() / cfg.k;
  cfg.k = k;
  cfg.p_max = ratio * k;
  ScanSample s;
  s.k = k;
  std::shared_ptr<const MomentumGrid> grid;
  try {
    grid = std::make_shared<const MomentumGrid>(build_grid(cfg));
  } catch (const GridResonanceError&) {
    s.skipped = true;
    return s;
  }
  const TransferResult r = integrate_transfer(v, grid, k, opts);
  const Eigen::JacobiSVD<CMatrix> svd(r.transfer.m22);
  const auto& sv = svd.singularValues();
  s.sigma_min = sv(sv.size() - 1);
  s.condition = s.sigma_min > 0.0 ? sv(0) / s.sigma_min : std::numeric_limits<double>::infinity();
  return s;
}

ScanResult spectral_singularity_scan(const PotentialModel& v, const ScatteringConfig& cfg,
                                     const ScanOptions& scan, const StepperOptions& opts) {
  if (!(scan.k_min > 0.0) || !(scan.k_max > scan.k_min) || scan.samples < 3) {
    throw ConfigError("scan needs 0 < k_min < k_max and at least 3 samples");
  }
  ScanResult res;
  for (int i = 0; i < scan.samples; ++i) {
    const double k = scan.k_min + (scan.k_max - scan.k_min) * i / (scan.samples - 1);
    res.samples.push_back(m22_spectrum(v, cfg, k, opts));
  }
  std::vector<double> sig;
  for (const auto& s : res.samples) {
    if (!s.skipped) sig.push_back(s.sigma_min);
  }
  if (sig.empty()) return res;
  std::nth_element(sig.begin(), sig.begin() + static_cast<std::ptrdiff_t>(sig.size() / 2), sig.end());
  res.threshold = scan.threshold_factor * sig[sig.size() / 2];

  // Local minima over non-skipped neighbours, smallest first.
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < res.samples.size(); ++i) {
    if (!res.samples[i].skipped) live.push_back(i);
  }
  std::vector<std::size_t> minima;
  for (std::size_t j = 0; j < live.size(); ++j) {
    const double c = res.samples[live[j]].sigma_min;
    const bool left = j == 0 || res.samples[live[j - 1]].sigma_min > c;
    const bool right = j + 1 == live.size() || res.samples[live[j + 1]].sigma_min >= c;
    if (left && right) minima.push_back(j);
  }
  std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) {
    return res.samples[live[a]].sigma_min < res.samples[live[b]].sigma_min;
  });
  if (minima.size() > static_cast<std::size_t>(scan.max_refine)) minima.resize(static_cast<std::size_t>(scan.max_refine));

  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (std::size_t j : minima) {
    double lo = res.samples[live[j == 0 ? 0 : j - 1]].k;
    double hi = res.samples[live[j + 1 == live.size() ? j : j + 1]].k;
    ScanSample best = res.samples[live[j]];
    auto eval = [&](double k) {
      ScanSample s = m22_spectrum(v, cfg, k, opts);
      if (s.skipped) s.sigma_min = std::numeric_limits<double>::infinity();
      if (s.sigma_min < best.sigma_min) best = s;
      return s.sigma_min;
    };
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = eval(c), fd = eval(d);
    while (hi - lo > scan.k_tolerance) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - gr * (hi - lo);
        fc = eval(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + gr * (hi - lo);
        fd = eval(d);
      }
    }
    res.minima.push_back({best.k, best.sigma_min, best.condition, best.sigma_min < res.threshold});
  }
  std::sort(res.minima.begin(), res.minima.end(),
            [](const SingularityCandidate& a, const SingularityCandidate& b) { return a.sigma_min < b.sigma_min; });
  return res;
}

DirectionalCheck transparency_reflectionless_check(const TransferMatrix& m, const Direction& n0, double tol) {
  const MomentumGrid& g = *m.grid;
  const SnappedDirection a = snap_direction(g, n0);
  const int pa = g.propagating_position(g.parity()[static_cast<std::size_t>(a.index)]);
  const Eigen::Index n = m.size();
  DirectionalCheck out;
  if (a.sign > 0) {
    CMatrix t = m.m22.adjoint() - CMatrix::Identity(n, n);
    out.transparency_residual = t.col(pa).norm();
    out.reflection_residual = m.m21.col(a.position).norm();
  } else {
    CMatrix t = m.m22 - CMatrix::Identity(n, n);
    out.transparency_residual = t.col(a.position).norm();
    out.reflection_residual = m.m12.adjoint().col(pa).norm();
  }
  out.transparent = out.transparency_residual < tol;
  out.reflectionless = out.reflection_residual < tol;
  return out;
}

}  // namespace tmscat
