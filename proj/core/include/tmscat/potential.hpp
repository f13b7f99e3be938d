#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tmscat/grid.hpp"

namespace tmscat {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(hi > lo); }
  double length() const { return empty() ? 0.0 : hi - lo; }
};

// ---------------------------------------------------------------------------
// Longitudinal profiles u(x)

struct Segment {
  double x0 = 0.0;
  double x1 = 0.0;
  cplx value{0.0, 0.0};
};

/// Piecewise-constant profile; segments must not overlap.
struct PiecewiseProfile {
  std::vector<Segment> segments;
};

/// g exp(-(x - center)^2 / width^2)
struct GaussianProfile {
  cplx g{1.0, 0.0};
  double center = 0.0;
  double width = 1.0;
};

/// g sech^2((x - center) / width)
struct Sech2Profile {
  cplx g{1.0, 0.0};
  double center = 0.0;
  double width = 1.0;
};

using Profile = std::variant<PiecewiseProfile, GaussianProfile, Sech2Profile>;

cplx profile_value(const Profile& u, double x);
Interval profile_support(const Profile& u);

// ---------------------------------------------------------------------------
// Potential terms. A model is a sum of terms.

/// v(x, r) = u(x): no transverse dependence.
struct XOnlyTerm {
  Profile profile;
};

/// v(x, r) = u(x) exp(-|r - center|^2 / b^2)
struct SeparableTerm {
  Profile profile;
  double b = 1.0;
  PVec center{};
};

/// v(x, r) = g exp(-(x - x0)^2 / a^2) exp(-|r - r0|^2 / b^2)
struct GaussianTerm {
  cplx g{1.0, 0.0};
  double x0 = 0.0;
  PVec r0{};
  double a = 1.0;
  double b = 1.0;
};

/// v = value inside the disk/ball (x - x0)^2 + |r - r0|^2 < radius^2, else 0.
struct CircularWellTerm {
  cplx value{-1.0, 0.0};
  double radius = 1.0;
  double x0 = 0.0;
  PVec r0{};
};

/// Potential sampled on a rectangular (x, r) lattice.
class SampledPotential {
 public:
  /// `values` is indexed [ix][iy][iz] with iz fastest; unused axes have length 1.
  SampledPotential(int d, std::vector<double> xs, std::vector<double> ys, std::vector<double> zs,
                   std::vector<cplx> values);

  /// Loads a `.csv` or `.json` sample file (see docs/file_formats.md).
  static SampledPotential load(const std::string& path);

  int dim() const { return d_; }
  Interval x_window() const { return {xs_.front(), xs_.back()}; }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  const std::vector<double>& zs() const { return zs_; }

  /// Multilinear interpolation; zero outside the sample window.
  cplx value(double x, const PVec& r) const;
  /// Trapezoid transverse transform of the x-interpolated slice.
  cplx transverse_fourier(double x, const PVec& p) const;
  /// Trapezoid transverse transform of sample row `ix`.
  cplx row_fourier(std::size_t ix, const PVec& p) const;
  /// Trapezoid quadrature of |v(x_ix, .)|^2 over the transverse window.
  double row_norm2(std::size_t ix) const;

  /// Largest |v| on the transverse window boundary relative to max |v|.
  double edge_ratio() const { return edge_ratio_; }
  bool aliasing_risk() const { return edge_ratio_ > 1e-6; }
  /// Nyquist momentum pi / spacing of the coarsest transverse axis.
  double nyquist() const;
  std::vector<std::string> diagnostics() const;

 private:
  cplx at(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return values_[(ix * ys_.size() + iy) * zs_.size() + iz];
  }

  int d_;
  std::vector<double> xs_, ys_, zs_;
  std::vector<cplx> values_;
  std::vector<double> wy_, wz_;
  double edge_ratio_ = 0.0;
};

struct SampledTerm {
  std::shared_ptr<const SampledPotential> data;
  cplx scale{1.0, 0.0};
};

using PotentialTerm = std::variant<XOnlyTerm, SeparableTerm, GaussianTerm, CircularWellTerm, SampledTerm>;

enum class PotentialKind { x_only, separable_product, gaussian_2d_3d, circular_well, sampled };

PotentialKind kind_of(const PotentialTerm& term);

struct ShortRangeReport {
  bool admissible = true;
  /// Boundary magnitude relative to the maximum (sampled terms only).
  double edge_ratio = 0.0;
  std::string note;
};

/// Complex short-range potential v(x, r) = sum of terms.
class PotentialModel {
 public:
  PotentialModel() = default;
  explicit PotentialModel(PotentialTerm term) { terms_.push_back(std::move(term)); }

  static PotentialModel zero() { return {}; }

  PotentialModel& add(PotentialTerm term);
  friend PotentialModel operator+(PotentialModel a, const PotentialModel& b);
  /// Multiplies every coupling by `factor`.
  PotentialModel scaled(cplx factor) const;

  const std::vector<PotentialTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_x_only() const;
  /// Transverse dimension forced by sampled terms, if any.
  std::optional<int> required_dimension() const;

  /// Real-space value. For d = 0 every term reduces to its x-profile.
  cplx value(double x, const PVec& r, int d) const;
  cplx value_1d(double x) const { return value(x, PVec{}, 0); }

  /// Partial Fourier transform over r. For d = 0 this is v(x). Terms without
  /// transverse dependence contribute (2pi)^d delta(p), realized on a lattice as
  /// (2pi)^d / cell_weight at p == 0; `cell_weight` must then be positive.
  cplx transverse_fourier(double x, const PVec& p, int d, double cell_weight = 0.0) const;

  /// [x_min, x_max] outside which |v| < 1e-12 max (analytic terms) or the
  /// sample window (sampled terms). Empty for v == 0.
  Interval support_bounds() const;
  /// Sorted x positions where v or its x-derivative jumps, inside the support.
  std::vector<double> breakpoints() const;

  ShortRangeReport short_range_check() const;

 private:
  std::vector<PotentialTerm> terms_;
};

inline cplx transverse_fourier(const PotentialModel& v, double x, const PVec& p, int d,
                               double cell_weight = 0.0) {
  return v.transverse_fourier(x, p, d, cell_weight);
}
inline Interval support_bounds(const PotentialModel& v) { return v.support_bounds(); }

// Convenience constructors for common fixtures.
PotentialModel rectangular_barrier(cplx value, double x0, double x1);
PotentialModel piecewise_constant(std::vector<Segment> segments);
/// -i gamma on [0, length].
PotentialModel gain_slab(double gamma, double length);
PotentialModel gaussian_1d(cplx g, double center, double width);
PotentialModel sech2_1d(cplx g, double center, double width);
PotentialModel gaussian(cplx g, double a, double b, double x0 = 0.0, PVec r0 = {});
PotentialModel circular_well(cplx value, double radius, double x0 = 0.0, PVec r0 = {});

/// Deterministic sum of `terms` Gaussians with complex couplings of magnitude
/// up to `coupling`, centres in [-1, 1]^(d+1) and widths in [0.7, 1.2].
PotentialModel random_gaussian_mixture(unsigned long seed, int terms, double coupling, int d);

}  // namespace tmscat
