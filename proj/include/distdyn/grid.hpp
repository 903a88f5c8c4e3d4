#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace distdyn {

//! Equally spaced evaluation grid on [lo, hi] with m points.
struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  int m = 2;

  static Grid1D linspace(double lo, double hi, int m);

  double step() const { return (hi - lo) / (m - 1); }
  double point(int i) const { return lo + step() * i; }
  std::vector<double> points() const;

  // Index of the grid point closest to v, clamped to [0, m-1].
  int nearest_index(double v) const;

  bool operator==(const Grid1D&) const = default;
};

// Trapezoid rule on an equally spaced grid.
double trapezoid(std::span<const double> values, double step);

// Linear interpolation of grid values at v (clamped to the grid range).
double interpolate(const Grid1D& grid, std::span<const double> values, double v);

//! Density values on a Grid1D.
struct DensityGrid1D {
  Grid1D grid;
  std::vector<double> values;

  double integral() const { return trapezoid(values, grid.step()); }
  // Rescale so the trapezoid integral is exactly 1.
  void normalize();
};

DensityGrid1D uniform_density(const Grid1D& grid);

//! Bivariate grid function: joint density or conditional kernel.
//!
//! values is row-major over (x, y): entry (i, j) lives at
//! values[i * grid_y.m + j]. For kind == conditional, row i is the
//! density of y given x = grid_x.point(i); flagged rows had a
//! conditioning marginal below the floor and hold zeros.
struct KernelGrid2D {
  enum class Kind { joint, conditional };

  Grid1D grid_x;
  Grid1D grid_y;
  Kind kind = Kind::joint;
  std::vector<double> values;
  std::vector<std::uint8_t> row_flag;  // 1 = excluded row (conditional only)

  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * grid_y.m,
            static_cast<std::size_t>(grid_y.m)};
  }
  std::span<double> row(int i) {
    return {values.data() + static_cast<std::size_t>(i) * grid_y.m,
            static_cast<std::size_t>(grid_y.m)};
  }
  bool flagged(int i) const { return !row_flag.empty() && row_flag[i] != 0; }
  int flagged_count() const;
};

// Parses "lo:hi:m".
Grid1D parse_grid_spec(const std::string& spec);

}  // namespace distdyn
