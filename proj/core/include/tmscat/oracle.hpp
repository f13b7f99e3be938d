#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "tmscat/grid.hpp"
#include "tmscat/potential.hpp"

namespace tmscat {

struct Oracle1DResult {
  Eigen::Matrix2cd m;
  cplx r_left{}, r_right{}, t_left{}, t_right{};
  /// Max deviation of the Wronskian from its initial value (ODE oracle only).
  double wronskian_drift = 0.0;
  bool flagged = false;
};

/// Exact transfer matrix of a piecewise-constant potential by plane-wave matching.
Oracle1DResult match_piecewise_1d(const std::vector<Segment>& segments, double k);

struct ShootingOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  /// Drift above this flags the result.
  double drift_tol = 1e-9;
};

/// Integrates -psi'' + v psi = k^2 psi for two independent solutions across [x0, x1]
/// (default: the support window) and reads off the transfer matrix.
Oracle1DResult integrate_schrodinger_1d(const PotentialModel& v, double k, const ShootingOptions& opts = {});
Oracle1DResult integrate_schrodinger_1d(const PotentialModel& v, double k, double x0, double x1,
                                        const ShootingOptions& opts = {});

struct PartialWaveResult {
  double k = 0.0;
  int m_max = 0;
  /// Channel coefficients a_m, m = 0..m_max (a_{-m} = a_m).
  std::vector<cplx> a;
  double tail_bound = 0.0;
  bool flagged = false;

  /// f(theta) for scattering angle theta between incident and outgoing directions,
  /// normalized to psi ~ e^{i k0.r} + f e^{ikr} / sqrt(r).
  cplx amplitude(double theta) const;
};

/// Radially symmetric 2D potential v(r), zero for r >= radius.
PartialWaveResult partial_wave_2d(const std::function<cplx(double)>& v_radial, double radius, double k, int m_max,
                                  double tail_threshold = 1e-8);
PartialWaveResult partial_wave_circular_well(cplx value, double radius, double k, int m_max);

/// Full (d+1)-dimensional Fourier transform of v at momentum q = (qx, q_perp), closed form per term.
cplx potential_fourier_total(const PotentialModel& v, int d, double qx, const PVec& q_perp);

/// First Born amplitude: -i / (2 c_d) * v^(k (n - n0)).
cplx born_amplitude(const PotentialModel& v, int d, double k, double n0x, const PVec& n0_perp, double nx,
                    const PVec& n_perp);

struct GainSlabRoot {
  double k = 0.0;
  double gamma = 0.0;
  double residual = 0.0;  ///< |M22| at the root
};

/// M22 of v = -i gamma on [0, length] from matching.
cplx gain_slab_m22(double gamma, double length, double k);
/// Locates (k, gamma) with M22 = 0 for a slab of given length, with k in [k_lo, k_hi].
/// Roots have gamma < 0 (Im v > 0 amplifies under the e^{-iEt} convention).
GainSlabRoot find_gain_slab_singularity(double length, double k_lo, double k_hi);
/// For fixed gamma, the k in [k_lo, k_hi] minimizing |M22| (refined by golden section).
double gain_slab_min_k(double gamma, double length, double k_lo, double k_hi);

}  // namespace tmscat
