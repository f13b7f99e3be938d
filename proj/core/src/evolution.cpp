#include "tmscat/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "tmscat/errors.hpp"

namespace tmscat {
namespace {

constexpr cplx kMinusI{0.0, -1.0};

// Generator of the slab-local interaction picture: the diagonal -i varpi_i sigma_3
// part is integrated exactly from the slab start s0. The potential is sampled at
// one-sided limits at the slab ends, where it may jump.
class SlabGenerator {
 public:
  SlabGenerator(const EffectiveHamiltonian& h, double s0, double s1)
      : h_(h), s0_(s0), lo_(s0 + 1e-13 * std::max(1.0, std::abs(s0))), hi_(s1 - 1e-13 * std::max(1.0, std::abs(s1))) {}

  RVector scale(double x) const {
    const Eigen::Index n = h_.size();
    const RVector& wi = h_.varpi().imag;
    const double t = x - s0_;
    RVector e(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      e(i) = std::exp(-wi(i) * t);
      e(n + i) = std::exp(wi(i) * t);
    }
    return e;
  }

  CMatrix operator()(double x) const {
    const RVector e = scale(x);
    CMatrix g = h_.interaction(std::clamp(x, lo_, hi_)).dense();
    g = e.cwiseInverse().asDiagonal() * g * e.asDiagonal();
    return kMinusI * g;
  }

 private:
  const EffectiveHamiltonian& h_;
  double s0_, lo_, hi_;
};

struct SlabOutcome {
  CMatrix u;
  long steps = 0;
  long rejected = 0;
  double h_min = 0.0;
  double h_max = 0.0;
  double error_estimate = 0.0;
};

// Interaction-picture propagator; the caller applies gen.scale(s1).
SlabOutcome rk4_slab(const SlabGenerator& gen, Eigen::Index m, double s0, double s1, int n_steps) {
  CMatrix u = CMatrix::Identity(m, m);
  const double step = (s1 - s0) / n_steps;
  CMatrix g0 = gen(s0);
  for (int s = 0; s < n_steps; ++s) {
    const double x = s0 + s * step;
    const double xe = s + 1 == n_steps ? s1 : x + step;
    const CMatrix gm = gen(0.5 * (x + xe));
    const CMatrix g1 = gen(xe);
    const CMatrix k1 = g0 * u;
    const CMatrix k2 = gm * (u + (0.5 * step) * k1);
    const CMatrix k3 = gm * (u + (0.5 * step) * k2);
    const CMatrix k4 = g1 * (u + step * k3);
    u += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    g0 = g1;
  }
  return {std::move(u), n_steps, 0, step, step};
}

// Richardson comparison of n/2 and n steps; on failure the slab is bisected and each half
// gets a share of the absolute budget proportional to its width.
SlabOutcome rk4_refined(const EffectiveHamiltonian& h, double s0, double s1, int n_steps, double budget,
                        double budget_width, const StepperOptions& opts, int depth) {
  const SlabGenerator gen(h, s0, s1);
  const Eigen::Index m = 2 * h.size();
  const int n = std::max(1, (n_steps + 1) / 2);
  const SlabOutcome coarse = rk4_slab(gen, m, s0, s1, n);
  SlabOutcome fine = rk4_slab(gen, m, s0, s1, 2 * n);
  const CMatrix id = CMatrix::Identity(m, m);
  const double est = (fine.u - coarse.u).norm() / 15.0;
  if (budget < 0.0) {
    budget = opts.rtol * (fine.u - id).norm() + opts.atol;
    budget_width = s1 - s0;
  }
  const double allowed = budget * (s1 - s0) / budget_width;
  if (est <= allowed || depth >= opts.max_refinements) {
    fine.rejected = n;
    fine.error_estimate = est;
    fine.u = gen.scale(s1).asDiagonal() * fine.u;
    return fine;
  }
  const double mid = 0.5 * (s0 + s1);
  const int half = std::max(1, n);
  SlabOutcome a = rk4_refined(h, s0, mid, half, budget, budget_width, opts, depth + 1);
  SlabOutcome b = rk4_refined(h, mid, s1, half, budget, budget_width, opts, depth + 1);
  SlabOutcome out;
  out.u = b.u * a.u;
  out.steps = a.steps + b.steps;
  out.rejected = a.rejected + b.rejected + 3 * n;
  out.h_min = std::min(a.h_min, b.h_min);
  out.h_max = std::max(a.h_max, b.h_max);
  out.error_estimate = a.error_estimate + b.error_estimate;
  return out;
}

SlabOutcome rk4_checked(const EffectiveHamiltonian& h, double s0, double s1, int n_steps,
                        const StepperOptions& opts) {
  if (opts.richardson_check) {
    SlabOutcome out = rk4_refined(h, s0, s1, n_steps, -1.0, 1.0, opts, 0);
    out.error_estimate /= std::max(out.u.norm(), 1e-300);
    return out;
  }
  const SlabGenerator gen(h, s0, s1);
  SlabOutcome out = rk4_slab(gen, 2 * h.size(), s0, s1, n_steps);
  out.u = gen.scale(s1).asDiagonal() * out.u;
  return out;
}

SlabOutcome dopri5_slab(const EffectiveHamiltonian& h, double s0, double s1, double h_start,
                        const StepperOptions& opts) {
  static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static constexpr double e[7] = {35.0 / 384 - 5179.0 / 57600,     0.0,
                                  500.0 / 1113 - 7571.0 / 16695,   125.0 / 192 - 393.0 / 640,
                                  -2187.0 / 6784 + 92097.0 / 339200, 11.0 / 84 - 187.0 / 2100,
                                  -1.0 / 40};

  const SlabGenerator gen(h, s0, s1);
  const Eigen::Index m = 2 * h.size();
  const Eigen::Index n = h.size();
  CMatrix u = CMatrix::Identity(m, m);
  SlabOutcome out;
  out.h_min = std::numeric_limits<double>::infinity();
  double x = s0;
  double step = std::min(h_start, s1 - s0);
  const double floor_step = 1e-13 * std::max(1.0, std::abs(s1 - s0));
  std::vector<CMatrix> kk(7);
  kk[0] = gen(x) * u;
  while (x < s1) {
    step = std::min(step, s1 - x);
    CMatrix trial;
    for (int s = 1; s < 7; ++s) {
      CMatrix y = u;
      for (int j = 0; j < s; ++j) {
        if (a[s][j] != 0.0) y += (step * a[s][j]) * kk[static_cast<std::size_t>(j)];
      }
      kk[static_cast<std::size_t>(s)] = gen(x + c[s] * step) * y;
      if (s == 6) trial = std::move(y);
    }
    CMatrix err = CMatrix::Zero(m, m);
    for (int j = 0; j < 7; ++j) {
      if (e[j] != 0.0) err += (step * e[j]) * kk[static_cast<std::size_t>(j)];
    }
    const double scale = opts.atol + opts.rtol * std::max(1.0, trial.cwiseAbs().maxCoeff());
    const double ratio = err.cwiseAbs().maxCoeff() / scale;
    if (!std::isfinite(ratio)) throw NonFiniteError("non-finite state in adaptive step", x);
    if (ratio <= 1.0) {
      x += step;
      u = std::move(trial);
      kk[0] = kk[6];
      ++out.steps;
      out.h_min = std::min(out.h_min, step);
      out.h_max = std::max(out.h_max, step);
    } else {
      ++out.rejected;
      if (step < floor_step) {
        Eigen::Index row = 0;
        err.cwiseAbs().rowwise().maxCoeff().maxCoeff(&row);
        const double shell = h.grid().point(static_cast<int>(row % n)).norm();
        std::ostringstream os;
        os << "step size underflow at x=" << x << " near |p|=" << shell;
        throw StepUnderflowError(os.str(), x, shell);
      }
    }
    const double fac = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
    step = std::min(step * std::clamp(fac, 0.2, 5.0), opts.max_step);
  }
  out.u = gen.scale(s1).asDiagonal() * u;
  return out;
}

TransferMatrix restrict_u(const BlockOperator& u, const EffectiveHamiltonian& h) {
  const auto& prop = h.grid().propagating();
  TransferMatrix t;
  t.m11 = u.block(0, 0)(prop, prop);
  t.m12 = u.block(0, 1)(prop, prop);
  t.m21 = u.block(1, 0)(prop, prop);
  t.m22 = u.block(1, 1)(prop, prop);
  return t;
}

TransferMatrix restrict_s(const BlockOperator& s, const EffectiveHamiltonian& h) {
  const auto& prop = h.grid().propagating();
  const CMatrix s11 = s.block(0, 0)(prop, prop);
  const CMatrix s12 = s.block(0, 1)(prop, prop);
  const CMatrix s21 = s.block(1, 0)(prop, prop);
  const CMatrix s22 = s.block(1, 1)(prop, prop);
  const Eigen::PartialPivLU<CMatrix> lu(s22);
  TransferMatrix t;
  t.m22 = lu.inverse();
  t.m21 = -t.m22 * s21;
  t.m12 = s12 * t.m22;
  t.m11 = s11 - s12 * lu.solve(s21);
  return t;
}

}  // namespace

void StepperOptions::validate() const {
  std::ostringstream err;
  if (!(rtol > 0.0)) err << "rtol must be positive; ";
  if (!(atol > 0.0)) err << "atol must be positive; ";
  if (!(max_step > 0.0)) err << "max_step must be positive; ";
  if (!(growth_budget > 0.0)) err << "growth_budget must be positive; ";
  if (!(safety > 0.0)) err << "safety must be positive; ";
  if (max_refinements < 0) err << "max_refinements must be non-negative; ";
  const std::string msg = err.str();
  if (!msg.empty()) throw ConfigError("invalid stepper options: " + msg.substr(0, msg.size() - 2));
}

CMatrix TransferMatrix::dense() const {
  const Eigen::Index n = size();
  CMatrix m(2 * n, 2 * n);
  m << m11, m12, m21, m22;
  return m;
}

TransferMatrix TransferMatrix::identity(std::shared_ptr<const MomentumGrid> grid, double k) {
  TransferMatrix t;
  const Eigen::Index n = grid->propagating_size();
  t.m11 = CMatrix::Identity(n, n);
  t.m22 = CMatrix::Identity(n, n);
  t.m12 = CMatrix::Zero(n, n);
  t.m21 = CMatrix::Zero(n, n);
  t.grid = std::move(grid);
  t.k = k;
  return t;
}

BlockOperator transfer_to_s(const BlockOperator& u) {
  const Eigen::PartialPivLU<CMatrix> lu(u.block(1, 1));
  const CMatrix inv22 = lu.inverse();
  const CMatrix x21 = inv22 * u.block(1, 0);
  const CMatrix u12 = u.block(0, 1);
  return BlockOperator(CMatrix(u.block(0, 0) - u12 * x21), CMatrix(u12 * inv22), CMatrix(-x21), inv22);
}

BlockOperator star_product(const BlockOperator& left, const BlockOperator& right) {
  const Eigen::Index n = left.n();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix l12 = left.block(0, 1), l22 = left.block(1, 1), l11 = left.block(0, 0);
  const CMatrix r21 = right.block(1, 0), r11 = right.block(0, 0), r22 = right.block(1, 1);
  const Eigen::PartialPivLU<CMatrix> f(id - l12 * r21);
  const Eigen::PartialPivLU<CMatrix> g(id - r21 * l12);
  const CMatrix fl11 = f.solve(l11);
  const CMatrix r11f = r11 * f.inverse();
  return BlockOperator(CMatrix(r11 * fl11), CMatrix(right.block(0, 1) + r11f * l12 * r22),
                       CMatrix(left.block(1, 0) + l22 * r21 * fl11), CMatrix(l22 * g.solve(r22)));
}

TransferResult evolve(const EffectiveHamiltonian& h, double x_from, double x_to, const StepperOptions& opts) {
  opts.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = h.size();
  const MomentumGrid& grid = h.grid();
  TransferResult res{BlockOperator::identity(n), TransferMatrix::identity(h.grid_ptr(), h.k())};
  IntegratorReport& rep = res.transfer.report;
  rep.x_min = x_from;
  rep.x_max = x_to;
  rep.rtol = opts.rtol;
  if (!(x_to > x_from) || h.potential().is_zero()) return res;

  const double window = x_to - x_from;
  const double wi_max = h.varpi().imag.size() > 0 ? h.varpi().imag.maxCoeff() : 0.0;
  rep.growth_exponent = wi_max * window;
  if (rep.growth_exponent > opts.growth_budget) {
    std::ostringstream os;
    os << "evanescent growth exponent " << rep.growth_exponent << " exceeds budget " << opts.growth_budget
       << "; lower p_max or shrink the support window";
    throw ConfigError(os.str());
  }

  // Slab boundaries: window ends, potential breakpoints, and width <= 1 / max Im varpi.
  std::vector<double> cuts{x_from};
  for (double b : h.potential().breakpoints()) {
    if (b > x_from && b < x_to) cuts.push_back(b);
  }
  cuts.push_back(x_to);
  std::vector<double> bounds{x_from};
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double w = cuts[i] - cuts[i - 1];
    if (w <= 0.0) continue;
    const int pieces = wi_max > 0.0 ? std::max(1, static_cast<int>(std::ceil(w * wi_max - 1e-12))) : 1;
    for (int p = 1; p < pieces; ++p) bounds.push_back(cuts[i - 1] + w * p / pieces);
    bounds.push_back(cuts[i]);
  }

  const bool use_s = opts.closure == EvanescentClosure::decaying && grid.propagating_size() < grid.size();
  BlockOperator s_total = BlockOperator::identity(n);
  CMatrix u_total = CMatrix::Identity(2 * n, 2 * n);
  rep.h_min = std::numeric_limits<double>::infinity();

  for (std::size_t sI = 1; sI < bounds.size(); ++sI) {
    const double s0 = bounds[sI - 1], s1 = bounds[sI];
    const double w = s1 - s0;
    double gnorm = 0.0;
    constexpr int kSamples = 9;
    for (int q = 0; q < kSamples; ++q) {
      const double x = s0 + w * (q + 0.5) / kSamples;
      gnorm = std::max(gnorm, h.interaction_norm_inf(x));
    }
    gnorm *= std::exp(2.0 * wi_max * w);
    rep.generator_norm = std::max(rep.generator_norm, gnorm);
    double step = opts.max_step;
    if (gnorm > 0.0) {
      step = std::min(step, opts.safety * std::pow(120.0 * opts.rtol / (gnorm * window), 0.25) / gnorm);
    }
    SlabOutcome slab;
    if (opts.method == StepMethod::rk4_fixed) {
      slab = rk4_checked(h, s0, s1, std::max(1, static_cast<int>(std::ceil(w / step - 1e-9))), opts);
    } else {
      slab = dopri5_slab(h, s0, s1, std::min(w, 4.0 * step), opts);
    }
    if (!slab.u.allFinite()) throw NonFiniteError("non-finite evolution operator", s1);
    rep.steps += slab.steps;
    rep.rejected += slab.rejected;
    rep.h_min = std::min(rep.h_min, slab.h_min);
    rep.h_max = std::max(rep.h_max, slab.h_max);
    rep.error_estimate = std::max(rep.error_estimate, slab.error_estimate);
    ++rep.slabs;
    BlockOperator us(std::move(slab.u));
    if (use_s) s_total = star_product(s_total, transfer_to_s(us));
    u_total = us.dense() * u_total;
  }
  if (!u_total.allFinite()) throw NonFiniteError("non-finite evolution operator", x_to);

  res.full_u = BlockOperator(std::move(u_total));
  TransferMatrix t = use_s ? restrict_s(s_total, h) : restrict_u(res.full_u, h);
  t.grid = h.grid_ptr();
  t.k = h.k();
  t.report = rep;
  t.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.transfer = std::move(t);
  return res;
}

TransferResult integrate_transfer(const PotentialModel& v, std::shared_ptr<const MomentumGrid> grid, double k,
                                  const StepperOptions& opts) {
  const Interval sup = v.support_bounds();
  const EffectiveHamiltonian h(v, std::move(grid), k);
  if (sup.empty()) return evolve(h, 0.0, 0.0, opts);
  return evolve(h, sup.lo, sup.hi, opts);
}

TransferResult integrate_transfer(const PotentialModel& v, const ScatteringConfig& cfg, const StepperOptions& opts) {
  return integrate_transfer(v, std::make_shared<const MomentumGrid>(build_grid(cfg)), cfg.k, opts);
}

Eigen::Matrix2cd transfer_1d(const PotentialModel& v, double k, const StepperOptions& opts) {
  if (!v.is_x_only()) throw ConfigError("transfer_1d requires an x-only potential");
  ScatteringConfig cfg;
  cfg.k = k;
  cfg.d = 0;
  const TransferResult r = integrate_transfer(v, cfg, opts);
  Eigen::Matrix2cd m;
  m << r.transfer.m11(0, 0), r.transfer.m12(0, 0), r.transfer.m21(0, 0), r.transfer.m22(0, 0);
  return m;
}

}  // namespace tmscat
