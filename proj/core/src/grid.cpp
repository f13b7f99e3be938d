#include "tmscat/grid.hpp"

#include <limits>
#include <sstream>

#include "tmscat/errors.hpp"

namespace tmscat {

void ScatteringConfig::validate() const {
  std::ostringstream err;
  if (!(k > 0.0) || !std::isfinite(k)) err << "k must be positive and finite; ";
  if (d < 0 || d > 2) err << "d must be 0, 1 or 2; ";
  if (d > 0) {
    if (!(effective_p_max() >= k)) err << "p_max must be >= k; ";
    if (n_per_axis <= 0 || n_per_axis % 2 != 0) err << "n_per_axis must be a positive even integer; ";
  }
  if (!(exclusion_band > 0.0)) err << "exclusion_band must be positive; ";
  const std::string msg = err.str();
  if (!msg.empty()) throw ConfigError("invalid scattering config: " + msg.substr(0, msg.size() - 2));
}

cplx varpi(double p_squared, double k) {
  const double k2 = k * k;
  if (p_squared < k2) return {std::sqrt(k2 - p_squared), 0.0};
  return {0.0, std::sqrt(p_squared - k2)};
}

VarpiFamily diag_varpi_family(const MomentumGrid& grid, double k) {
  const int n = grid.size();
  VarpiFamily fam{CVector(n), RVector(n), RVector(n)};
  for (int i = 0; i < n; ++i) {
    const cplx w = varpi(grid.point(i), k);
    fam.full(i) = w;
    fam.real(i) = w.real();
    fam.imag(i) = w.imag();
  }
  return fam;
}

std::pair<int, double> MomentumGrid::nearest_propagating(const PVec& p) const {
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int i : propagating_) {
    const double dist = (points_[static_cast<std::size_t>(i)] - p).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return {best, best_dist};
}

MomentumGrid build_grid(const ScatteringConfig& cfg) {
  cfg.validate();
  MomentumGrid g;
  g.d_ = cfg.d;
  g.k_ = cfg.k;
  g.p_max_ = cfg.effective_p_max();
  g.staggered_ = cfg.grid_offset;

  if (cfg.d == 0) {
    g.axis_count_ = 1;
    g.spacing_ = 0.0;
    g.points_ = {PVec{}};
    g.weights_ = {1.0};
    g.axis_index_ = {{0, 0}};
  } else {
    const int n = cfg.n_per_axis;
    g.spacing_ = 2.0 * g.p_max_ / static_cast<double>(n);
    g.axis_count_ = cfg.grid_offset ? n : n + 1;
    // Coordinates are (half-)integers times the spacing, so c[na-1-j] == -c[j]
    // holds bitwise.
    std::vector<double> coord(static_cast<std::size_t>(g.axis_count_));
    for (int j = 0; j < g.axis_count_; ++j) {
      const double units = cfg.grid_offset ? (static_cast<double>(j) + 0.5 - 0.5 * n)
                                           : (static_cast<double>(j) - 0.5 * n);
      coord[static_cast<std::size_t>(j)] = units * g.spacing_;
    }
    const int na = g.axis_count_;
    const int nz = cfg.d == 2 ? na : 1;
    const double w = std::pow(g.spacing_, cfg.d);
    for (int iy = 0; iy < na; ++iy) {
      for (int iz = 0; iz < nz; ++iz) {
        PVec p{coord[static_cast<std::size_t>(iy)], cfg.d == 2 ? coord[static_cast<std::size_t>(iz)] : 0.0};
        g.points_.push_back(p);
        g.weights_.push_back(w);
        g.axis_index_.push_back({iy, iz});
      }
    }
  }

  const double band = cfg.exclusion_band * cfg.k;
  const int n_pts = g.size();
  g.prop_position_.assign(static_cast<std::size_t>(n_pts), -1);
  g.parity_.resize(static_cast<std::size_t>(n_pts));
  for (int i = 0; i < n_pts; ++i) {
    const PVec& p = g.points_[static_cast<std::size_t>(i)];
    if (cfg.d > 0 && std::abs(p.norm() - cfg.k) < band) {
      std::ostringstream os;
      os << "grid resonant with dispersion circle: point |p|=" << p.norm() << " within "
         << band << " of k=" << cfg.k << "; change n_per_axis or p_max";
      throw GridResonanceError(os.str());
    }
    if (p.norm2() < cfg.k * cfg.k) {
      g.prop_position_[static_cast<std::size_t>(i)] = static_cast<int>(g.propagating_.size());
      g.propagating_.push_back(i);
    }
    const auto [iy, iz] = g.axis_index_[static_cast<std::size_t>(i)];
    const int na = g.axis_count_;
    if (cfg.d == 0) {
      g.parity_[static_cast<std::size_t>(i)] = 0;
    } else if (cfg.d == 1) {
      g.parity_[static_cast<std::size_t>(i)] = na - 1 - iy;
    } else {
      g.parity_[static_cast<std::size_t>(i)] = (na - 1 - iy) * na + (na - 1 - iz);
    }
  }
  return g;
}

}  // namespace tmscat
