#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "tmscat/errors.hpp"
#include "tmscat/potential.hpp"

namespace tmscat {
namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& c) {
  std::vector<double> w(c.size(), 0.0);
  if (c.size() < 2) {
    // A single transverse sample stands for a delta-less unused axis.
    w.assign(c.size(), 1.0);
    return w;
  }
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    const double h = 0.5 * (c[i + 1] - c[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

void check_axis(const std::vector<double>& c, const char* name) {
  if (c.empty()) throw ConfigError(std::string("sampled potential: empty ") + name + " axis");
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (!(c[i] > c[i - 1])) {
      throw ConfigError(std::string("sampled potential: ") + name + " axis must be strictly increasing");
    }
  }
}

// Locates x in the sorted axis; returns (lower index, fraction) or index -1 outside.
std::pair<std::ptrdiff_t, double> locate(const std::vector<double>& c, double x) {
  if (c.size() == 1) return {0, 0.0};
  if (x < c.front() || x > c.back()) return {-1, 0.0};
  auto it = std::upper_bound(c.begin(), c.end(), x);
  std::ptrdiff_t i = std::distance(c.begin(), it) - 1;
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(c.size()) - 2);
  const auto u = static_cast<std::size_t>(i);
  return {i, (x - c[u]) / (c[u + 1] - c[u])};
}

std::vector<double> unique_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t index_of(const std::vector<double>& axis, double x) {
  auto it = std::lower_bound(axis.begin(), axis.end(), x);
  return static_cast<std::size_t>(std::distance(axis.begin(), it));
}

SampledPotential from_rows(int d, const std::vector<std::vector<double>>& rows) {
  if (d < 1 || d > 2) throw ConfigError("sampled potential: d must be 1 or 2");
  const std::size_t cols = static_cast<std::size_t>(d) + 3;
  std::vector<double> xs, ys, zs;
  for (const auto& r : rows) {
    if (r.size() != cols) throw ConfigError("sampled potential: wrong number of columns in a row");
    xs.push_back(r[0]);
    ys.push_back(r[1]);
    zs.push_back(d == 2 ? r[2] : 0.0);
  }
  xs = unique_sorted(xs);
  ys = unique_sorted(ys);
  zs = unique_sorted(zs);
  const std::size_t total = xs.size() * ys.size() * zs.size();
  if (rows.size() != total) {
    throw ConfigError("sampled potential: samples do not form a complete rectangular lattice");
  }
  std::vector<cplx> values(total);
  std::vector<char> seen(total, 0);
  for (const auto& r : rows) {
    const std::size_t ix = index_of(xs, r[0]);
    const std::size_t iy = index_of(ys, r[1]);
    const std::size_t iz = d == 2 ? index_of(zs, r[2]) : 0;
    const std::size_t flat = (ix * ys.size() + iy) * zs.size() + iz;
    if (seen[flat]) throw ConfigError("sampled potential: duplicate lattice point");
    seen[flat] = 1;
    values[flat] = cplx{r[cols - 2], r[cols - 1]};
  }
  return SampledPotential(d, std::move(xs), std::move(ys), std::move(zs), std::move(values));
}

}  // namespace

SampledPotential::SampledPotential(int d, std::vector<double> xs, std::vector<double> ys,
                                   std::vector<double> zs, std::vector<cplx> values)
    : d_(d), xs_(std::move(xs)), ys_(std::move(ys)), zs_(std::move(zs)), values_(std::move(values)) {
  if (d_ < 1 || d_ > 2) throw ConfigError("sampled potential: d must be 1 or 2");
  if (zs_.empty()) zs_ = {0.0};
  check_axis(xs_, "x");
  check_axis(ys_, "y");
  check_axis(zs_, "z");
  if (xs_.size() < 2) throw ConfigError("sampled potential: need at least two x samples");
  if (ys_.size() < 2) throw ConfigError("sampled potential: need at least two y samples");
  if (d_ == 2 && zs_.size() < 2) throw ConfigError("sampled potential: need at least two z samples");
  if (d_ == 1 && zs_.size() != 1) throw ConfigError("sampled potential: d = 1 takes no z axis");
  if (values_.size() != xs_.size() * ys_.size() * zs_.size()) {
    throw ConfigError("sampled potential: value count does not match the lattice");
  }
  for (const auto& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ConfigError("sampled potential: non-finite value");
    }
  }
  wy_ = trapezoid_weights(ys_);
  wz_ = d_ == 2 ? trapezoid_weights(zs_) : std::vector<double>{1.0};

  double vmax = 0.0, edge = 0.0;
  for (std::size_t ix = 0; ix < xs_.size(); ++ix) {
    for (std::size_t iy = 0; iy < ys_.size(); ++iy) {
      for (std::size_t iz = 0; iz < zs_.size(); ++iz) {
        const double a = std::abs(at(ix, iy, iz));
        vmax = std::max(vmax, a);
        const bool boundary = iy == 0 || iy + 1 == ys_.size() ||
                              (d_ == 2 && (iz == 0 || iz + 1 == zs_.size()));
        if (boundary) edge = std::max(edge, a);
      }
    }
  }
  edge_ratio_ = vmax > 0.0 ? edge / vmax : 0.0;
}

SampledPotential SampledPotential::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sampled potential file: " + path);
  const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  if (is_json) {
    nlohmann::json j;
    try {
      in >> j;
      return from_rows(j.at("d").get<int>(), j.at("rows").get<std::vector<std::vector<double>>>());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed sampled potential JSON " + path + ": " + e.what());
    }
  }
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty sampled potential file: " + path);
  int cols = 0;
  {
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) ++cols;
  }
  if (cols != 4 && cols != 5) throw ConfigError("sampled potential CSV header must have 4 or 5 columns");
  const int d = cols - 3;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ls(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ls, tok, ',')) {
      try {
        row.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("sampled potential CSV: bad number on line " + std::to_string(lineno));
      }
    }
    rows.push_back(std::move(row));
  }
  return from_rows(d, rows);
}

cplx SampledPotential::value(double x, const PVec& r) const {
  const auto [ix, fx] = locate(xs_, x);
  const auto [iy, fy] = locate(ys_, r.y);
  const auto [iz, fz] = d_ == 2 ? locate(zs_, r.z) : std::pair<std::ptrdiff_t, double>{0, 0.0};
  if (ix < 0 || iy < 0 || iz < 0) return {};
  cplx acc{};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int c = 0; c < (d_ == 2 ? 2 : 1); ++c) {
        const double w = (a ? fx : 1.0 - fx) * (b ? fy : 1.0 - fy) * (d_ == 2 ? (c ? fz : 1.0 - fz) : 1.0);
        if (w == 0.0) continue;
        acc += w * at(static_cast<std::size_t>(ix + a), static_cast<std::size_t>(iy + b),
                      static_cast<std::size_t>(iz + c));
      }
    }
  }
  return acc;
}

cplx SampledPotential::row_fourier(std::size_t ix, const PVec& p) const {
  cplx acc{};
  for (std::size_t iy = 0; iy < ys_.size(); ++iy) {
    for (std::size_t iz = 0; iz < zs_.size(); ++iz) {
      const double phase = -(p.y * ys_[iy] + (d_ == 2 ? p.z * zs_[iz] : 0.0));
      acc += wy_[iy] * wz_[iz] * at(ix, iy, iz) * cplx{std::cos(phase), std::sin(phase)};
    }
  }
  return acc;
}

cplx SampledPotential::transverse_fourier(double x, const PVec& p) const {
  const auto [ix, fx] = locate(xs_, x);
  if (ix < 0) return {};
  const auto i = static_cast<std::size_t>(ix);
  cplx out = (1.0 - fx) * row_fourier(i, p);
  if (fx > 0.0) out += fx * row_fourier(i + 1, p);
  return out;
}

double SampledPotential::row_norm2(std::size_t ix) const {
  double acc = 0.0;
  for (std::size_t iy = 0; iy < ys_.size(); ++iy) {
    for (std::size_t iz = 0; iz < zs_.size(); ++iz) acc += wy_[iy] * wz_[iz] * std::norm(at(ix, iy, iz));
  }
  return acc;
}

double SampledPotential::nyquist() const {
  auto spacing = [](const std::vector<double>& c) {
    double h = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) h = std::max(h, c[i] - c[i - 1]);
    return h;
  };
  double h = spacing(ys_);
  if (d_ == 2) h = std::max(h, spacing(zs_));
  return kPi / h;
}

std::vector<std::string> SampledPotential::diagnostics() const {
  std::vector<std::string> out;
  std::ostringstream os;
  os << "lattice " << xs_.size() << " x " << ys_.size();
  if (d_ == 2) os << " x " << zs_.size();
  os << ", edge ratio " << edge_ratio_ << ", transverse Nyquist " << nyquist();
  out.push_back(os.str());
  if (aliasing_risk()) {
    out.push_back("potential does not vanish on the transverse window edge; transform will alias");
  }
  return out;
}

}  // namespace tmscat
