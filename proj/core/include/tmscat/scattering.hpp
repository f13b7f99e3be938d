#pragma once

#include <array>
#include <optional>
#include <vector>

#include "tmscat/block_operator.hpp"
#include "tmscat/evolution.hpp"
#include "tmscat/grid.hpp"
#include "tmscat/potential.hpp"

namespace tmscat {

/// Unit vector in d + 1 dimensions: longitudinal component nx and transverse part.
struct Direction {
  double nx = 1.0;
  PVec perp{};

  /// d = 1: (cos theta, sin theta).
  static Direction from_angle(double theta);
  /// d = 2: (cos theta, sin theta cos phi, sin theta sin phi).
  static Direction from_spherical(double theta, double phi);
  /// Direction whose transverse momentum is exactly grid point `index`; sign picks nx.
  static Direction on_grid(const MomentumGrid& grid, int index, int sign);

  Direction operator-() const { return {-nx, -perp}; }
  int sign() const { return nx > 0.0 ? 1 : -1; }
  /// Throws ConfigError unless |n| = 1 to 1e-12 and |nx| >= 1e-6.
  void validate(int d) const;
};

/// A direction snapped to the propagating grid.
struct SnappedDirection {
  int index = -1;     ///< grid index of k * n_perp
  int position = -1;  ///< position inside the propagating list
  int sign = 1;
  double snap_distance = 0.0;
};

/// Snaps k * n.perp to the nearest propagating point; rejects offsets beyond half a cell per axis.
SnappedDirection snap_direction(const MomentumGrid& grid, const Direction& n);

/// (2 pi i)^(d/2) k^(1 - d/2).
cplx c_d(int d, double k);

/// Transmission kernel value split into the grid delta part and the amplitude part.
struct TransmissionValue {
  cplx singular{};
  cplx smooth{};
  cplx total() const { return singular + smooth; }
};

struct RTAmplitudes {
  std::optional<cplx> r_left, r_right;
  std::optional<TransmissionValue> t_left, t_right;
  /// Left transmission from the M22-only formula (on-grid total).
  std::optional<cplx> t_left_alt;
};

/// Kernel matrices of the four quadrants, indexed [scattered, incident] over propagating positions.
struct QuadrantKernels {
  CMatrix pp;  ///< M11 - M12 M22^-1 M21 - I
  CMatrix pm;  ///< -M22^-1 M21
  CMatrix mp;  ///< M12 M22^-1
  CMatrix mm;  ///< M22^-1 - I
  const CMatrix& select(int incident_sign, int scattered_sign) const;
};

/// Extracts amplitudes from a transfer matrix; factorizes M22 once.
class AmplitudeExtractor {
 public:
  /// Throws NearSingularError when max(sigma_max, 1) / sigma_min of M22 exceeds `max_condition`.
  explicit AmplitudeExtractor(const TransferMatrix& m, double max_condition = 1e12);

  const TransferMatrix& transfer() const { return m_; }
  const MomentumGrid& grid() const { return *m_.grid; }
  double sigma_min() const { return sigma_min_; }
  double condition() const { return condition_; }
  const QuadrantKernels& kernels() const { return q_; }
  const CMatrix& m22_inverse() const { return m22inv_; }

  /// f for incident grid position a (sign s0) and scattered position b (sign s).
  cplx amplitude_at(int a, int s0, int b, int s) const;
  cplx amplitude(const Direction& n0, const Direction& n) const;
  RTAmplitudes rt_at(int a, int s0, int b, int s) const;
  RTAmplitudes rt(const Direction& n0, const Direction& n) const;

  /// [[S11, M12 M22^-1], [-M22^-1 M21, M22^-1]].
  BlockOperator s_matrix() const;

 private:
  double prefactor(int a) const;  // (2 pi)^d varpi(k0) / w_a

  TransferMatrix m_;
  std::vector<int> prop_;
  CMatrix m22inv_;
  QuadrantKernels q_;
  double sigma_min_ = 0.0;
  double condition_ = 0.0;
  cplx cd_;
};

cplx scattering_amplitude(const TransferMatrix& m, const Direction& n0, const Direction& n);
RTAmplitudes rt_amplitudes(const TransferMatrix& m, const Direction& n0, const Direction& n);
BlockOperator assemble_S(const TransferMatrix& m);
/// sigma_1 S (block rows swapped).
BlockOperator assemble_S_prime(const TransferMatrix& m);
BlockOperator s_prime_from_s(const BlockOperator& s);

struct AmplitudeSample {
  Direction n0, n;
  SnappedDirection snap0, snap;
  cplx f{};
};

/// Sampled amplitudes and derived kernels for one transfer matrix.
struct ScatteringData {
  double k = 0.0;
  int d = 0;
  cplx c_d{};
  std::vector<AmplitudeSample> f_samples;
  /// Reflection and transmission kernels over propagating positions [scattered, incident].
  CMatrix r_left, r_right, t_left_smooth, t_right_smooth;
  RVector t_singular;  ///< diagonal delta part shared by T^l and T^r
  BlockOperator s, s_prime;
  /// f(n0, n) = amp_scale(a) * kernel(b, a); kept for partner lookup.
  QuadrantKernels kernels;
  CVector amp_scale;
  std::vector<int> parity;  ///< parity map on propagating positions
};

/// Builds ScatteringData for the given direction pairs (may be empty).
ScatteringData collect_scattering_data(const AmplitudeExtractor& ex,
                                       const std::vector<std::pair<Direction, Direction>>& pairs);

/// All on-grid direction pairs (both signs) or a deterministic subset of `count` pairs.
std::vector<std::pair<Direction, Direction>> on_grid_pairs(const MomentumGrid& grid, std::size_t count,
                                                           unsigned long seed);

struct ScanSample {
  double k = 0.0;
  double sigma_min = 0.0;
  double condition = 0.0;
  bool skipped = false;  ///< grid resonant at this k
};

struct SingularityCandidate {
  double k = 0.0;
  double sigma_min = 0.0;
  double condition = 0.0;
  bool below_threshold = false;
};

struct ScanResult {
  std::vector<ScanSample> samples;
  std::vector<SingularityCandidate> minima;  ///< refined local minima, sorted by sigma_min
  double threshold = 0.0;
};

struct ScanOptions {
  double k_min = 0.5;
  double k_max = 3.0;
  int samples = 200;
  /// Candidates are minima with sigma_min below this factor times the median.
  double threshold_factor = 1e-3;
  int max_refine = 5;
  double k_tolerance = 1e-8;
};

/// sigma_min and cond of M22 at one k. `cfg.p_max`, if set, is scaled with k.
ScanSample m22_spectrum(const PotentialModel& v, ScatteringConfig cfg, double k, const StepperOptions& opts);
ScanResult spectral_singularity_scan(const PotentialModel& v, const ScatteringConfig& cfg,
                                     const ScanOptions& scan, const StepperOptions& opts);

struct DirectionalCheck {
  bool transparent = false;
  double transparency_residual = 0.0;
  bool reflectionless = false;
  double reflection_residual = 0.0;
};

DirectionalCheck transparency_reflectionless_check(const TransferMatrix& m, const Direction& n0,
                                                   double tol = 1e-8);

}  // namespace tmscat
