#include "tmscat/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "tmscat/errors.hpp"

namespace tmscat {
namespace {

namespace odeint = boost::numeric::odeint;

constexpr cplx kI{0.0, 1.0};

cplx branch_kappa(double k, cplx v) {
  cplx kappa = std::sqrt(cplx{k * k, 0.0} - v);
  if (kappa.imag() < 0.0 || (kappa.imag() == 0.0 && kappa.real() < 0.0)) kappa = -kappa;
  return kappa;
}

Eigen::Matrix2cd plane_wave_basis(cplx kappa, double x) {
  const cplx ep = std::exp(kI * kappa * x);
  const cplx em = std::exp(-kI * kappa * x);
  Eigen::Matrix2cd n;
  n << ep, em, kI * kappa * ep, -kI * kappa * em;
  return n;
}

void fill_rt(Oracle1DResult& r) {
  const Eigen::Matrix2cd& m = r.m;
  r.r_left = -m(1, 0) / m(1, 1);
  r.r_right = m(0, 1) / m(1, 1);
  r.t_left = m.determinant() / m(1, 1);
  r.t_right = 1.0 / m(1, 1);
}

// Two solutions of psi'' = (v - k^2) psi packed as real/imag pairs.
using State = std::array<double, 8>;

cplx at(const State& s, int i) { return {s[static_cast<std::size_t>(2 * i)], s[static_cast<std::size_t>(2 * i + 1)]}; }
void put(State& s, int i, cplx z) {
  s[static_cast<std::size_t>(2 * i)] = z.real();
  s[static_cast<std::size_t>(2 * i + 1)] = z.imag();
}

cplx profile_transform(const Profile& u, double q) {
  if (const auto* pp = std::get_if<PiecewiseProfile>(&u)) {
    cplx acc{};
    for (const auto& s : pp->segments) {
      if (q == 0.0) {
        acc += s.value * (s.x1 - s.x0);
      } else {
        acc += s.value * (std::exp(-kI * q * s.x0) - std::exp(-kI * q * s.x1)) / (kI * q);
      }
    }
    return acc;
  }
  if (const auto* g = std::get_if<GaussianProfile>(&u)) {
    return g->g * g->width * std::sqrt(kPi) * std::exp(-0.25 * g->width * g->width * q * q) *
           std::exp(-kI * q * g->center);
  }
  const auto& s = std::get<Sech2Profile>(u);
  const double t = kPi * q * s.width / 2.0;
  const double base = std::abs(t) < 1e-8 ? 2.0 * s.width : kPi * q * s.width * s.width / std::sinh(t);
  return s.g * base * std::exp(-kI * q * s.center);
}

double gaussian_perp(double b, const PVec& q, int d) {
  return std::pow(b * std::sqrt(kPi), d) * std::exp(-0.25 * b * b * q.norm2());
}

}  // namespace

Oracle1DResult match_piecewise_1d(const std::vector<Segment>& segments, double k) {
  std::vector<Segment> segs = segments;
  std::sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) { return a.x0 < b.x0; });
  Oracle1DResult r;
  Eigen::Matrix2cd t = Eigen::Matrix2cd::Identity();
  cplx kappa{k, 0.0};
  double prev_end = -std::numeric_limits<double>::infinity();
  auto cross = [&](double x, cplx next) {
    if (std::abs(next) == 0.0) throw ConfigError("zero local wavenumber inside a segment; perturb k");
    t = plane_wave_basis(next, x).inverse() * plane_wave_basis(kappa, x) * t;
    kappa = next;
  };
  for (const auto& s : segs) {
    if (!(s.x1 > s.x0)) throw ConfigError("segment with non-positive length");
    if (s.x0 < prev_end) throw ConfigError("overlapping segments");
    if (s.x0 > prev_end && std::isfinite(prev_end)) cross(prev_end, cplx{k, 0.0});
    cross(s.x0, branch_kappa(k, s.value));
    prev_end = s.x1;
  }
  if (std::isfinite(prev_end)) cross(prev_end, cplx{k, 0.0});
  r.m = t;
  fill_rt(r);
  return r;
}

Oracle1DResult integrate_schrodinger_1d(const PotentialModel& v, double k, const ShootingOptions& opts) {
  const Interval sup = v.support_bounds();
  if (sup.empty()) return integrate_schrodinger_1d(v, k, 0.0, 0.0, opts);
  return integrate_schrodinger_1d(v, k, sup.lo, sup.hi, opts);
}

Oracle1DResult integrate_schrodinger_1d(const PotentialModel& v, double k, double x0, double x1,
                                        const ShootingOptions& opts) {
  if (!v.is_x_only()) throw ConfigError("one-dimensional oracle needs an x-only potential");
  Oracle1DResult r;
  r.m = Eigen::Matrix2cd::Identity();
  if (!(x1 > x0)) {
    fill_rt(r);
    return r;
  }
  State y{};
  put(y, 0, std::exp(kI * k * x0));
  put(y, 1, kI * k * std::exp(kI * k * x0));
  put(y, 2, std::exp(-kI * k * x0));
  put(y, 3, -kI * k * std::exp(-kI * k * x0));
  const double k2 = k * k;
  auto rhs = [&](const State& s, State& ds, double x) {
    const cplx c = v.value_1d(x) - k2;
    put(ds, 0, at(s, 1));
    put(ds, 1, c * at(s, 0));
    put(ds, 2, at(s, 3));
    put(ds, 3, c * at(s, 2));
  };
  const cplx w0 = at(y, 0) * at(y, 3) - at(y, 2) * at(y, 1);
  double drift = 0.0;
  auto observer = [&](const State& s, double) {
    const cplx w = at(s, 0) * at(s, 3) - at(s, 2) * at(s, 1);
    drift = std::max(drift, std::abs(w - w0) / std::abs(w0));
  };
  std::vector<double> cuts{x0};
  for (double b : v.breakpoints()) {
    if (b > x0 && b < x1) cuts.push_back(b);
  }
  cuts.push_back(x1);
  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double h0 = std::min(1e-3, cuts[i] - cuts[i - 1]);
    odeint::integrate_adaptive(stepper, rhs, y, cuts[i - 1], cuts[i], h0, observer);
  }
  // psi = A e^{ikx} + B e^{-ikx} at x1.
  const cplx ep = std::exp(-kI * k * x1), em = std::exp(kI * k * x1);
  for (int c = 0; c < 2; ++c) {
    const cplx psi = at(y, 2 * c), dpsi = at(y, 2 * c + 1);
    r.m(0, c) = (dpsi + kI * k * psi) / (2.0 * kI * k) * ep;
    r.m(1, c) = (kI * k * psi - dpsi) / (2.0 * kI * k) * em;
  }
  r.wronskian_drift = drift;
  r.flagged = drift > opts.drift_tol;
  fill_rt(r);
  return r;
}

cplx PartialWaveResult::amplitude(double theta) const {
  cplx sum = a.empty() ? cplx{} : a[0];
  for (int m = 1; m <= m_max && m < static_cast<int>(a.size()); ++m) {
    sum += 2.0 * a[static_cast<std::size_t>(m)] * std::cos(m * theta);
  }
  return std::sqrt(2.0 / (kPi * k)) * std::exp(-kI * (kPi / 4.0)) * sum;
}

PartialWaveResult partial_wave_2d(const std::function<cplx(double)>& v_radial, double radius, double k, int m_max,
                                  double tail_threshold) {
  if (!(radius > 0.0) || !(k > 0.0) || m_max < 0) throw ConfigError("partial_wave_2d needs radius, k > 0");
  PartialWaveResult res;
  res.k = k;
  res.m_max = m_max;
  using RState = std::array<double, 4>;  // R, R'
  const double r0 = 1e-3 * radius;
  const double kr = k * radius;
  double amax = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    const cplx c = -(k * k - v_radial(0.0)) / (4.0 * (m + 1));
    const cplx beta0 = static_cast<double>(m) / r0 + 2.0 * c * r0 / (1.0 + c * r0 * r0);
    RState y{1.0, 0.0, beta0.real(), beta0.imag()};
    auto rhs = [&](const RState& s, RState& ds, double r) {
      const cplx u{s[0], s[1]}, du{s[2], s[3]};
      const cplx d2 = -du / r - (k * k - v_radial(r) - static_cast<double>(m * m) / (r * r)) * u;
      ds = {du.real(), du.imag(), d2.real(), d2.imag()};
    };
    auto stepper = odeint::make_controlled(1e-14, 1e-13, odeint::runge_kutta_dopri5<RState>());
    odeint::integrate_adaptive(stepper, rhs, y, r0, radius, 1e-4 * radius);
    const cplx beta = cplx{y[2], y[3]} / cplx{y[0], y[1]};
    const double jm = std::cyl_bessel_j(m, kr), ym = std::cyl_neumann(m, kr);
    // Derivatives via the recurrence Z_m' = Z_{m-1} - (m / x) Z_m, with Z_{-1} = -Z_1.
    const double jm1 = m == 0 ? -std::cyl_bessel_j(1, kr) : std::cyl_bessel_j(m - 1, kr);
    const double ym1 = m == 0 ? -std::cyl_neumann(1, kr) : std::cyl_neumann(m - 1, kr);
    const double djm = jm1 - m / kr * jm, dym = ym1 - m / kr * ym;
    const cplx hm{jm, ym}, dhm{djm, dym};
    const cplx am = (beta * jm - k * djm) / (k * dhm - beta * hm);
    res.a.push_back(am);
    amax = std::max(amax, std::abs(am));
  }
  res.tail_bound = res.a.empty() ? 0.0 : std::abs(res.a.back());
  res.flagged = amax > 0.0 && res.tail_bound > tail_threshold * amax;
  return res;
}

PartialWaveResult partial_wave_circular_well(cplx value, double radius, double k, int m_max) {
  return partial_wave_2d([value, radius](double r) { return r < radius ? value : cplx{}; }, radius, k, m_max);
}

cplx potential_fourier_total(const PotentialModel& v, int d, double qx, const PVec& q) {
  cplx total{};
  for (const auto& term : v.terms()) {
    if (const auto* xo = std::get_if<XOnlyTerm>(&term)) {
      if (d == 0) {
        total += profile_transform(xo->profile, qx);
      } else if (q.norm2() == 0.0) {
        throw ConfigError("x-only potential has a transverse delta at zero transfer");
      }
    } else if (const auto* s = std::get_if<SeparableTerm>(&term)) {
      cplx t = profile_transform(s->profile, qx);
      if (d > 0) t *= gaussian_perp(s->b, q, d) * std::exp(-kI * q.dot(s->center));
      total += t;
    } else if (const auto* g = std::get_if<GaussianTerm>(&term)) {
      cplx t = g->g * g->a * std::sqrt(kPi) * std::exp(-0.25 * g->a * g->a * qx * qx) * std::exp(-kI * qx * g->x0);
      if (d > 0) t *= gaussian_perp(g->b, q, d) * std::exp(-kI * q.dot(g->r0));
      total += t;
    } else if (const auto* c = std::get_if<CircularWellTerm>(&term)) {
      const double qq = std::sqrt(qx * qx + (d > 0 ? q.norm2() : 0.0));
      const double rr = c->radius;
      double base = 0.0;
      if (d == 0) {
        base = qq * rr < 1e-8 ? 2.0 * rr : 2.0 * std::sin(qq * rr) / qq;
      } else if (d == 1) {
        base = qq * rr < 1e-8 ? kPi * rr * rr : 2.0 * kPi * rr * std::cyl_bessel_j(1.0, qq * rr) / qq;
      } else {
        const double t = qq * rr;
        base = t < 1e-4 ? 4.0 * kPi * rr * rr * rr / 3.0
                        : 4.0 * kPi * (std::sin(t) - t * std::cos(t)) / (qq * qq * qq);
      }
      const double phase = qx * c->x0 + (d > 0 ? q.dot(c->r0) : 0.0);
      total += c->value * base * std::exp(-kI * phase);
    } else {
      throw ConfigError("no closed-form transform for sampled potentials");
    }
  }
  return total;
}

cplx born_amplitude(const PotentialModel& v, int d, double k, double n0x, const PVec& n0_perp, double nx,
                    const PVec& n_perp) {
  cplx cd;
  if (d == 0) {
    cd = k;
  } else if (d == 1) {
    cd = std::sqrt(cplx{0.0, 2.0 * kPi * k});
  } else {
    cd = cplx{0.0, 2.0 * kPi};
  }
  const double qx = k * (nx - n0x);
  const PVec q = k * (n_perp - n0_perp);
  return -kI / (2.0 * cd) * potential_fourier_total(v, d, qx, q);
}

cplx gain_slab_m22(double gamma, double length, double k) {
  return match_piecewise_1d({Segment{0.0, length, cplx{0.0, -gamma}}}, k).m(1, 1);
}

GainSlabRoot find_gain_slab_singularity(double length, double k_lo, double k_hi) {
  // Zeros need Im v > 0, i.e. gamma < 0 here; both signs are scanned.
  // Coarse search over (k, sign * log|gamma|), then Newton on the complex equation M22 = 0.
  double best = std::numeric_limits<double>::infinity();
  double kb = k_lo, gb = 1.0;
  constexpr int nk = 200, ng = 150;
  for (int i = 0; i < nk; ++i) {
    const double k = k_lo + (k_hi - k_lo) * (i + 0.5) / nk;
    for (int j = 0; j < ng; ++j) {
      for (double sign : {-1.0, 1.0}) {
        const double g = sign * std::pow(10.0, -3.0 + 6.0 * j / (ng - 1));
        const double val = std::abs(gain_slab_m22(g, length, k));
        if (val < best) {
          best = val;
          kb = k;
          gb = g;
        }
      }
    }
  }
  double k = kb, g = gb;
  for (int it = 0; it < 60; ++it) {
    const cplx f = gain_slab_m22(g, length, k);
    if (std::abs(f) < 1e-14) break;
    const double hk = 1e-7 * std::max(1.0, k), hg = 1e-7 * std::max(1.0, std::abs(g));
    const cplx fk = (gain_slab_m22(g, length, k + hk) - gain_slab_m22(g, length, k - hk)) / (2.0 * hk);
    const cplx fg = (gain_slab_m22(g + hg, length, k) - gain_slab_m22(g - hg, length, k)) / (2.0 * hg);
    Eigen::Matrix2d j;
    j << fk.real(), fg.real(), fk.imag(), fg.imag();
    const Eigen::Vector2d step = j.fullPivLu().solve(Eigen::Vector2d(-f.real(), -f.imag()));
    k += step(0);
    g += step(1);
    if (step.norm() < 1e-15 * std::max(1.0, std::abs(k))) break;
  }
  const double res = std::abs(gain_slab_m22(g, length, k));
  if (!(k >= k_lo && k <= k_hi) || !(res < 1e-8)) {
    throw NumericalError("gain slab singularity not found in the requested k range");
  }
  return {k, g, res};
}

double gain_slab_min_k(double gamma, double length, double k_lo, double k_hi) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = k_lo, hi = k_hi;
  auto f = [&](double k) { return std::abs(gain_slab_m22(gamma, length, k)); };
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > 1e-12) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace tmscat
