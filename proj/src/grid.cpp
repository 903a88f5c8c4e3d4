#include "distdyn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

#include "distdyn/errors.hpp"

namespace distdyn {

Grid1D Grid1D::linspace(double lo, double hi, int m) {
  if (m < 2) throw ConfigError("grid needs at least 2 points, got " + std::to_string(m));
  if (!(hi > lo)) throw ConfigError("grid upper bound must exceed lower bound");
  return Grid1D{lo, hi, m};
}

std::vector<double> Grid1D::points() const {
  std::vector<double> p(m);
  for (int i = 0; i < m; ++i) p[i] = point(i);
  return p;
}

int Grid1D::nearest_index(double v) const {
  double t = (v - lo) / step();
  int i = static_cast<int>(std::lround(t));
  return std::clamp(i, 0, m - 1);
}

double trapezoid(std::span<const double> values, double step) {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * step;
}

double interpolate(const Grid1D& grid, std::span<const double> values, double v) {
  if (v <= grid.lo) return values.front();
  if (v >= grid.hi) return values.back();
  double t = (v - grid.lo) / grid.step();
  int k = static_cast<int>(t);
  if (k >= grid.m - 1) return values.back();
  double frac = t - k;
  return values[k] + frac * (values[k + 1] - values[k]);
}

void DensityGrid1D::normalize() {
  double total = integral();
  if (total <= 0.0) throw NumericError("cannot normalize density with nonpositive mass");
  for (double& v : values) v /= total;
}

DensityGrid1D uniform_density(const Grid1D& grid) {
  DensityGrid1D d{grid, std::vector<double>(grid.m, 1.0 / (grid.hi - grid.lo))};
  return d;
}

int KernelGrid2D::flagged_count() const {
  int c = 0;
  for (int i = 0; i < grid_x.m; ++i)
    if (flagged(i)) ++c;
  return c;
}

Grid1D parse_grid_spec(const std::string& spec) {
  double lo = 0, hi = 0;
  int m = 0;
  auto first = spec.find(':');
  auto second = spec.find(':', first == std::string::npos ? first : first + 1);
  if (first == std::string::npos || second == std::string::npos)
    throw ConfigError("grid spec must be lo:hi:m, got '" + spec + "'");
  try {
    lo = std::stod(spec.substr(0, first));
    hi = std::stod(spec.substr(first + 1, second - first - 1));
    m = std::stoi(spec.substr(second + 1));
  } catch (const std::exception&) {
    throw ConfigError("could not parse grid spec '" + spec + "'");
  }
  return Grid1D::linspace(lo, hi, m);
}

}  // namespace distdyn
