#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

namespace tmscat {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Transverse momentum or position vector. Only the first `d` components are
/// meaningful; unused components stay zero so that arithmetic stays exact.
struct PVec {
  double y = 0.0;
  double z = 0.0;

  friend PVec operator-(const PVec& a, const PVec& b) { return {a.y - b.y, a.z - b.z}; }
  friend PVec operator+(const PVec& a, const PVec& b) { return {a.y + b.y, a.z + b.z}; }
  friend PVec operator*(double s, const PVec& a) { return {s * a.y, s * a.z}; }
  PVec operator-() const { return {-y, -z}; }
  friend bool operator==(const PVec&, const PVec&) = default;

  double norm2() const { return y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  double dot(const PVec& o) const { return y * o.y + z * o.z; }
};

struct ScatteringConfig {
  double k = 1.0;
  /// Transverse dimension: 0 (true 1D), 1 (2D scattering) or 2 (3D).
  int d = 1;
  /// Momentum cutoff; a non-positive value selects the default 2k.
  double p_max = 0.0;
  int n_per_axis = 32;
  /// Half-cell staggered lattice (no point at p = 0).
  bool grid_offset = true;
  /// Points with | |p| - k | < exclusion_band * k are rejected.
  double exclusion_band = 1e-6;

  double effective_p_max() const { return p_max > 0.0 ? p_max : 2.0 * k; }
  /// Throws ConfigError on violated invariants.
  void validate() const;
};

/// Uniform transverse momentum lattice with its propagating disk and parity map.
class MomentumGrid {
 public:
  int dim() const { return d_; }
  double k() const { return k_; }
  double p_max() const { return p_max_; }
  double spacing() const { return spacing_; }
  int points_per_axis() const { return axis_count_; }
  bool staggered() const { return staggered_; }

  int size() const { return static_cast<int>(points_.size()); }
  int propagating_size() const { return static_cast<int>(propagating_.size()); }

  const std::vector<PVec>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<int>& propagating() const { return propagating_; }
  const std::vector<int>& parity() const { return parity_; }

  const PVec& point(int i) const { return points_[static_cast<std::size_t>(i)]; }
  double weight(int i) const { return weights_[static_cast<std::size_t>(i)]; }
  bool is_propagating(int i) const { return prop_position_[static_cast<std::size_t>(i)] >= 0; }
  /// Position of grid index `i` inside propagating(), or -1 if evanescent.
  int propagating_position(int i) const { return prop_position_[static_cast<std::size_t>(i)]; }

  /// Per-axis lattice coordinates of point `i` (unused axes are 0).
  std::array<int, 2> axis_index(int i) const { return axis_index_[static_cast<std::size_t>(i)]; }
  /// Momentum of a lattice difference vector, in units of the spacing.
  PVec difference_momentum(int dy, int dz) const {
    return {spacing_ * static_cast<double>(dy), spacing_ * static_cast<double>(dz)};
  }

  /// Nearest propagating grid index to `p` and its distance.
  std::pair<int, double> nearest_propagating(const PVec& p) const;

  friend MomentumGrid build_grid(const ScatteringConfig& cfg);

 private:
  int d_ = 0;
  double k_ = 1.0;
  double p_max_ = 0.0;
  double spacing_ = 0.0;
  int axis_count_ = 1;
  bool staggered_ = true;
  std::vector<PVec> points_;
  std::vector<double> weights_;
  std::vector<int> propagating_;
  std::vector<int> parity_;
  std::vector<int> prop_position_;
  std::vector<std::array<int, 2>> axis_index_;
};

MomentumGrid build_grid(const ScatteringConfig& cfg);

/// Longitudinal wavenumber: sqrt(k^2 - p^2) inside the disk, i sqrt(p^2 - k^2)
/// outside. Never the negative root.
cplx varpi(double p_squared, double k);
inline cplx varpi(const PVec& p, double k) { return varpi(p.norm2(), k); }

/// Diagonals of the varpi operator family on a grid.
struct VarpiFamily {
  CVector full;  ///< varpi(p_i)
  RVector real;  ///< Re varpi, zero on evanescent points
  RVector imag;  ///< Im varpi = i (varpi_r - varpi), zero on propagating points
};

VarpiFamily diag_varpi_family(const MomentumGrid& grid, double k);

}  // namespace tmscat
