#include "tmscat/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>

#include "tmscat/errors.hpp"

namespace tmscat {
namespace {

// Distance (in widths) beyond which exp(-t^2) < 1e-12.
const double kGaussianReach = std::sqrt(12.0 * std::log(10.0));
// Distance (in widths) beyond which sech^2(t) < 1e-12.
const double kSech2Reach = std::acosh(1e6);

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double gauss_transverse(double b, double p2, int d) {
  return std::pow(b * std::sqrt(kPi), d) * std::exp(-0.25 * b * b * p2);
}

cplx shift_phase(const PVec& p, const PVec& center) {
  const double phase = -p.dot(center);
  return {std::cos(phase), std::sin(phase)};
}

// Transverse transform of the indicator of a d-ball of radius s.
double ball_transform(double s, double p, int d) {
  if (s <= 0.0) return 0.0;
  if (d == 1) {
    if (std::abs(p * s) < 1e-8) return 2.0 * s * (1.0 - (p * s) * (p * s) / 6.0);
    return 2.0 * std::sin(p * s) / p;
  }
  const double ps = p * s;
  if (std::abs(ps) < 1e-8) return kPi * s * s * (1.0 - ps * ps / 8.0);
  return 2.0 * kPi * s * std::cyl_bessel_j(1.0, ps) / p;
}

cplx scale_profile(const Profile& u, cplx f, Profile& out) {
  out = u;
  std::visit(Overloaded{[&](PiecewiseProfile& pp) {
                          for (auto& s : pp.segments) s.value *= f;
                        },
                        [&](GaussianProfile& g) { g.g *= f; }, [&](Sech2Profile& s) { s.g *= f; }},
             out);
  return f;
}

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace

// ---------------------------------------------------------------------------

cplx profile_value(const Profile& u, double x) {
  return std::visit(Overloaded{[x](const PiecewiseProfile& pp) {
                                 for (const auto& s : pp.segments) {
                                   if (x >= s.x0 && x < s.x1) return s.value;
                                 }
                                 return cplx{};
                               },
                               [x](const GaussianProfile& g) {
                                 const double t = (x - g.center) / g.width;
                                 return g.g * std::exp(-t * t);
                               },
                               [x](const Sech2Profile& s) {
                                 const double c = std::cosh((x - s.center) / s.width);
                                 return s.g / (c * c);
                               }},
                    u);
}

Interval profile_support(const Profile& u) {
  return std::visit(Overloaded{[](const PiecewiseProfile& pp) {
                                 if (pp.segments.empty()) return Interval{};
                                 Interval iv{std::numeric_limits<double>::infinity(),
                                             -std::numeric_limits<double>::infinity()};
                                 for (const auto& s : pp.segments) {
                                   iv.lo = std::min(iv.lo, s.x0);
                                   iv.hi = std::max(iv.hi, s.x1);
                                 }
                                 return iv;
                               },
                               [](const GaussianProfile& g) {
                                 return Interval{g.center - kGaussianReach * g.width,
                                                 g.center + kGaussianReach * g.width};
                               },
                               [](const Sech2Profile& s) {
                                 return Interval{s.center - kSech2Reach * s.width,
                                                 s.center + kSech2Reach * s.width};
                               }},
                    u);
}

PotentialKind kind_of(const PotentialTerm& term) {
  return std::visit(Overloaded{[](const XOnlyTerm&) { return PotentialKind::x_only; },
                               [](const SeparableTerm&) { return PotentialKind::separable_product; },
                               [](const GaussianTerm&) { return PotentialKind::gaussian_2d_3d; },
                               [](const CircularWellTerm&) { return PotentialKind::circular_well; },
                               [](const SampledTerm&) { return PotentialKind::sampled; }},
                    term);
}

// ---------------------------------------------------------------------------

PotentialModel& PotentialModel::add(PotentialTerm term) {
  terms_.push_back(std::move(term));
  return *this;
}

PotentialModel operator+(PotentialModel a, const PotentialModel& b) {
  for (const auto& t : b.terms_) a.terms_.push_back(t);
  return a;
}

PotentialModel PotentialModel::scaled(cplx f) const {
  PotentialModel out;
  for (const auto& t : terms_) {
    out.terms_.push_back(std::visit(
        Overloaded{[f](const XOnlyTerm& x) -> PotentialTerm {
                     XOnlyTerm r;
                     scale_profile(x.profile, f, r.profile);
                     return r;
                   },
                   [f](const SeparableTerm& s) -> PotentialTerm {
                     SeparableTerm r = s;
                     scale_profile(s.profile, f, r.profile);
                     return r;
                   },
                   [f](const GaussianTerm& g) -> PotentialTerm {
                     GaussianTerm r = g;
                     r.g *= f;
                     return r;
                   },
                   [f](const CircularWellTerm& c) -> PotentialTerm {
                     CircularWellTerm r = c;
                     r.value *= f;
                     return r;
                   },
                   [f](const SampledTerm& s) -> PotentialTerm {
                     SampledTerm r = s;
                     r.scale *= f;
                     return r;
                   }},
        t));
  }
  return out;
}

bool PotentialModel::is_x_only() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const PotentialTerm& t) { return std::holds_alternative<XOnlyTerm>(t); });
}

std::optional<int> PotentialModel::required_dimension() const {
  for (const auto& t : terms_) {
    if (const auto* s = std::get_if<SampledTerm>(&t)) return s->data->dim();
  }
  return std::nullopt;
}

cplx PotentialModel::value(double x, const PVec& r, int d) const {
  cplx total{};
  for (const auto& t : terms_) {
    total += std::visit(
        Overloaded{[&](const XOnlyTerm& xo) { return profile_value(xo.profile, x); },
                   [&](const SeparableTerm& s) {
                     const double rr = d == 0 ? 0.0 : (r - s.center).norm2();
                     return profile_value(s.profile, x) * std::exp(-rr / (s.b * s.b));
                   },
                   [&](const GaussianTerm& g) {
                     const double tx = (x - g.x0) / g.a;
                     const double rr = d == 0 ? 0.0 : (r - g.r0).norm2();
                     return g.g * std::exp(-tx * tx - rr / (g.b * g.b));
                   },
                   [&](const CircularWellTerm& c) {
                     const double rr = d == 0 ? 0.0 : (r - c.r0).norm2();
                     const double dx = x - c.x0;
                     return dx * dx + rr < c.radius * c.radius ? c.value : cplx{};
                   },
                   [&](const SampledTerm& s) { return s.scale * s.data->value(x, r); }},
        t);
  }
  return total;
}

cplx PotentialModel::transverse_fourier(double x, const PVec& p, int d, double cell_weight) const {
  cplx total{};
  const double p2 = p.norm2();
  for (const auto& t : terms_) {
    total += std::visit(
        Overloaded{[&](const XOnlyTerm& xo) -> cplx {
                     const cplx u = profile_value(xo.profile, x);
                     if (d == 0) return u;
                     if (p2 != 0.0 || u == cplx{}) return {};
                     if (!(cell_weight > 0.0)) {
                       throw ConfigError("x-only term in d>0 needs a lattice cell weight for its delta");
                     }
                     return u * std::pow(2.0 * kPi, d) / cell_weight;
                   },
                   [&](const SeparableTerm& s) -> cplx {
                     const cplx u = profile_value(s.profile, x);
                     if (d == 0) return u;
                     return u * gauss_transverse(s.b, p2, d) * shift_phase(p, s.center);
                   },
                   [&](const GaussianTerm& g) -> cplx {
                     const double tx = (x - g.x0) / g.a;
                     const cplx u = g.g * std::exp(-tx * tx);
                     if (d == 0) return u;
                     return u * gauss_transverse(g.b, p2, d) * shift_phase(p, g.r0);
                   },
                   [&](const CircularWellTerm& c) -> cplx {
                     const double dx = x - c.x0;
                     const double s2 = c.radius * c.radius - dx * dx;
                     if (s2 <= 0.0) return {};
                     if (d == 0) return c.value;
                     return c.value * ball_transform(std::sqrt(s2), std::sqrt(p2), d) *
                            shift_phase(p, c.r0);
                   },
                   [&](const SampledTerm& s) -> cplx {
                     if (s.data->dim() != d) throw ConfigError("sampled potential dimension mismatch");
                     return s.scale * s.data->transverse_fourier(x, p);
                   }},
        t);
  }
  return total;
}

Interval PotentialModel::support_bounds() const {
  Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (const auto& t : terms_) {
    const Interval iv = std::visit(
        Overloaded{[](const XOnlyTerm& xo) { return profile_support(xo.profile); },
                   [](const SeparableTerm& s) { return profile_support(s.profile); },
                   [](const GaussianTerm& g) {
                     return Interval{g.x0 - kGaussianReach * g.a, g.x0 + kGaussianReach * g.a};
                   },
                   [](const CircularWellTerm& c) { return Interval{c.x0 - c.radius, c.x0 + c.radius}; },
                   [](const SampledTerm& s) { return s.data->x_window(); }},
        t);
    if (iv.empty()) continue;
    any = true;
    out.lo = std::min(out.lo, iv.lo);
    out.hi = std::max(out.hi, iv.hi);
  }
  return any ? out : Interval{};
}

std::vector<double> PotentialModel::breakpoints() const {
  std::vector<double> bp;
  auto profile_bp = [&bp](const Profile& u) {
    if (const auto* pp = std::get_if<PiecewiseProfile>(&u)) {
      for (const auto& s : pp->segments) {
        bp.push_back(s.x0);
        bp.push_back(s.x1);
      }
    }
  };
  for (const auto& t : terms_) {
    std::visit(Overloaded{[&](const XOnlyTerm& xo) { profile_bp(xo.profile); },
                          [&](const SeparableTerm& s) { profile_bp(s.profile); },
                          [](const GaussianTerm&) {},
                          [&](const CircularWellTerm& c) {
                            bp.push_back(c.x0 - c.radius);
                            bp.push_back(c.x0 + c.radius);
                          },
                          [&](const SampledTerm& s) {
                            for (double x : s.data->xs()) bp.push_back(x);
                          }},
               t);
  }
  const Interval sup = support_bounds();
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  bp.erase(std::remove_if(bp.begin(), bp.end(), [&](double x) { return !(x > sup.lo && x < sup.hi); }),
           bp.end());
  return bp;
}

ShortRangeReport PotentialModel::short_range_check() const {
  ShortRangeReport rep;
  for (const auto& t : terms_) {
    if (const auto* s = std::get_if<SampledTerm>(&t)) {
      rep.edge_ratio = std::max(rep.edge_ratio, s->data->edge_ratio());
      if (s->data->aliasing_risk()) {
        rep.admissible = false;
        rep.note = "sampled potential does not decay to the edge of its transverse window";
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

PotentialModel rectangular_barrier(cplx value, double x0, double x1) {
  return piecewise_constant({Segment{x0, x1, value}});
}

PotentialModel piecewise_constant(std::vector<Segment> segments) {
  std::sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) { return a.x0 < b.x0; });
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!(segments[i].x1 > segments[i].x0)) throw ConfigError("segment with non-positive length");
    if (i > 0 && segments[i].x0 < segments[i - 1].x1) throw ConfigError("overlapping segments");
  }
  return PotentialModel(XOnlyTerm{PiecewiseProfile{std::move(segments)}});
}

PotentialModel gain_slab(double gamma, double length) {
  return rectangular_barrier(cplx{0.0, -gamma}, 0.0, length);
}

PotentialModel gaussian_1d(cplx g, double center, double width) {
  return PotentialModel(XOnlyTerm{GaussianProfile{g, center, width}});
}

PotentialModel sech2_1d(cplx g, double center, double width) {
  return PotentialModel(XOnlyTerm{Sech2Profile{g, center, width}});
}

PotentialModel gaussian(cplx g, double a, double b, double x0, PVec r0) {
  return PotentialModel(GaussianTerm{g, x0, r0, a, b});
}

PotentialModel circular_well(cplx value, double radius, double x0, PVec r0) {
  return PotentialModel(CircularWellTerm{value, radius, x0, r0});
}

PotentialModel random_gaussian_mixture(unsigned long seed, int terms, double coupling, int d) {
  std::mt19937_64 gen(seed);
  PotentialModel v;
  for (int i = 0; i < terms; ++i) {
    const double mag = coupling * (0.5 + 0.5 * uniform01(gen));
    const double arg = 2.0 * kPi * uniform01(gen);
    const cplx g = std::polar(mag, arg);
    const double x0 = 2.0 * uniform01(gen) - 1.0;
    const double a = 0.7 + 0.5 * uniform01(gen);
    PVec r0{2.0 * uniform01(gen) - 1.0, 2.0 * uniform01(gen) - 1.0};
    const double b = 0.7 + 0.5 * uniform01(gen);
    if (d == 0) {
      v.add(XOnlyTerm{GaussianProfile{g, x0, a}});
    } else {
      if (d == 1) r0.z = 0.0;
      v.add(GaussianTerm{g, x0, r0, a, b});
    }
  }
  return v;
}

}  // namespace tmscat
