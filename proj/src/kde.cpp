#include "distdyn/kde.hpp"

#include <algorithm>
#include <cmath>

#include "distdyn/errors.hpp"

namespace distdyn {

namespace {

constexpr double inv_sqrt_2pi = 0.39894228040143267794;

double sample_sd(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

// Kernel weight matrix W[g*n + i] = phi((p_g - x_i)/s_i) / s_i with
// s_i = scale * lambda_i. Grid-major layout so 2D evaluation reduces to dot
// products over the observation index.
std::vector<double> weight_matrix(std::span<const double> x, const Grid1D& grid, double scale,
                                  const std::vector<double>& lambdas) {
  const int n = static_cast<int>(x.size());
  std::vector<double> inv_s(n);
  for (int i = 0; i < n; ++i) inv_s[i] = 1.0 / (scale * lambdas[i]);
  std::vector<double> w(static_cast<std::size_t>(grid.m) * n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int g = 0; g < grid.m; ++g) {
    const double p = grid.point(g);
    double* row = w.data() + static_cast<std::size_t>(g) * n;
    for (int i = 0; i < n; ++i) {
      double u = (p - x[i]) * inv_s[i];
      row[i] = inv_sqrt_2pi * inv_s[i] * std::exp(-0.5 * u * u);
    }
  }
  return w;
}

void check_sample(std::span<const double> x) {
  if (x.size() < 2) throw DataError("density estimation needs at least 2 observations");
}

}  // namespace

BandwidthSpec optimal_bandwidth(std::span<const double> x) {
  check_sample(x);
  BandwidthSpec bw;
  bw.h = std::pow(4.0 / (3.0 * static_cast<double>(x.size())), 0.2);
  bw.sigma_x = sample_sd(x);
  if (!(bw.sigma_x > 0.0)) throw NumericError("degenerate sample: zero variance");
  return bw;
}

BandwidthSpec optimal_bandwidth(std::span<const double> x, std::span<const double> y) {
  check_sample(x);
  if (x.size() != y.size()) throw DataError("coordinate vectors differ in length");
  BandwidthSpec bw;
  bw.h = std::pow(1.0 / static_cast<double>(x.size()), 1.0 / 6.0);
  bw.sigma_x = sample_sd(x);
  bw.sigma_y = sample_sd(y);
  if (!(bw.sigma_x > 0.0) || !(bw.sigma_y > 0.0))
    throw NumericError("degenerate sample: zero variance in a coordinate");
  return bw;
}

namespace {

DensityGrid1D density_on_grid(std::span<const double> x, const Grid1D& grid,
                              const BandwidthSpec& bw, const std::vector<double>& lambdas) {
  const int n = static_cast<int>(x.size());
  auto w = weight_matrix(x, grid, bw.h * bw.sigma_x, lambdas);
  DensityGrid1D out{grid, std::vector<double>(grid.m, 0.0)};
  const double inv_n = 1.0 / static_cast<double>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int g = 0; g < grid.m; ++g) {
    const double* row = w.data() + static_cast<std::size_t>(g) * n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += row[i];
    out.values[g] = s * inv_n;
  }
  return out;
}

KernelGrid2D joint_on_grid(std::span<const double> x, std::span<const double> y,
                           const Grid1D& grid_x, const Grid1D& grid_y, const BandwidthSpec& bw,
                           const std::vector<double>& lambdas) {
  const int n = static_cast<int>(x.size());
  auto wx = weight_matrix(x, grid_x, bw.h * bw.sigma_x, lambdas);
  auto wy = weight_matrix(y, grid_y, bw.h * bw.sigma_y, lambdas);
  KernelGrid2D joint;
  joint.grid_x = grid_x;
  joint.grid_y = grid_y;
  joint.kind = KernelGrid2D::Kind::joint;
  joint.values.assign(static_cast<std::size_t>(grid_x.m) * grid_y.m, 0.0);
  joint.row_flag.assign(grid_x.m, 0);
  const double inv_n = 1.0 / static_cast<double>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int a = 0; a < grid_x.m; ++a) {
    const double* rx = wx.data() + static_cast<std::size_t>(a) * n;
    double* out = joint.values.data() + static_cast<std::size_t>(a) * grid_y.m;
    for (int b = 0; b < grid_y.m; ++b) {
      const double* ry = wy.data() + static_cast<std::size_t>(b) * n;
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rx[i] * ry[i];
      out[b] = s * inv_n;
    }
  }
  return joint;
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

DensityGrid1D pilot_density(std::span<const double> x, const Grid1D& grid,
                            const BandwidthSpec& bw) {
  check_sample(x);
  return density_on_grid(x, grid, bw, ones(x.size()));
}

KernelGrid2D pilot_density(std::span<const double> x, std::span<const double> y,
                           const Grid1D& grid_x, const Grid1D& grid_y, const BandwidthSpec& bw) {
  check_sample(x);
  if (x.size() != y.size()) throw DataError("coordinate vectors differ in length");
  return joint_on_grid(x, y, grid_x, grid_y, bw, ones(x.size()));
}

std::vector<double> pilot_at_points(std::span<const double> x, const BandwidthSpec& bw) {
  const int n = static_cast<int>(x.size());
  const double inv_s = 1.0 / (bw.h * bw.sigma_x);
  std::vector<double> p(n, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      double u = (x[i] - x[j]) * inv_s;
      s += std::exp(-0.5 * u * u);
    }
    p[i] = s * inv_sqrt_2pi * inv_s / static_cast<double>(n);
  }
  return p;
}

std::vector<double> pilot_at_points(std::span<const double> x, std::span<const double> y,
                                    const BandwidthSpec& bw) {
  const int n = static_cast<int>(x.size());
  const double inv_sx = 1.0 / (bw.h * bw.sigma_x);
  const double inv_sy = 1.0 / (bw.h * bw.sigma_y);
  std::vector<double> p(n, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      double ux = (x[i] - x[j]) * inv_sx;
      double uy = (y[i] - y[j]) * inv_sy;
      s += std::exp(-0.5 * (ux * ux + uy * uy));
    }
    p[i] = s * inv_sqrt_2pi * inv_sqrt_2pi * inv_sx * inv_sy / static_cast<double>(n);
  }
  return p;
}

std::vector<double> adaptive_lambdas(std::span<const double> pilot_values, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("adaptive sensitivity alpha must lie in [0,1]");
  std::vector<double> lambdas(pilot_values.size(), 1.0);
  if (alpha == 0.0) return lambdas;
  double log_sum = 0.0;
  std::size_t positive = 0;
  for (double p : pilot_values)
    if (p > 0.0) {
      log_sum += std::log(p);
      ++positive;
    }
  if (positive == 0) throw NumericError("all pilot density values are zero at the sample points");
  const double g = std::exp(log_sum / static_cast<double>(positive));
  for (std::size_t i = 0; i < pilot_values.size(); ++i)
    if (pilot_values[i] > 0.0) lambdas[i] = std::pow(pilot_values[i] / g, -alpha);
  return lambdas;
}

DensityEstimate1D adaptive_density(std::span<const double> x, const Grid1D& grid, double alpha,
                                   const BandwidthSpec* frozen) {
  check_sample(x);
  BandwidthSpec bw;
  if (frozen) {
    bw.h = frozen->h;
    bw.sigma_x = frozen->sigma_x;
  } else {
    bw = optimal_bandwidth(x);
  }
  bw.alpha = alpha;
  if (alpha == 0.0)
    bw.lambdas = std::vector<double>(x.size(), 1.0);
  else
    bw.lambdas = adaptive_lambdas(pilot_at_points(x, bw), alpha);
  DensityGrid1D density = density_on_grid(x, grid, bw, bw.lambdas);
  return {std::move(density), std::move(bw)};
}

JointEstimate adaptive_density(std::span<const double> x, std::span<const double> y,
                               const Grid1D& grid_x, const Grid1D& grid_y, double alpha,
                               const BandwidthSpec* frozen) {
  check_sample(x);
  if (x.size() != y.size()) throw DataError("coordinate vectors differ in length");
  BandwidthSpec bw;
  if (frozen) {
    bw.h = frozen->h;
    bw.sigma_x = frozen->sigma_x;
    bw.sigma_y = frozen->sigma_y;
  } else {
    bw = optimal_bandwidth(x, y);
  }
  bw.alpha = alpha;
  if (alpha == 0.0)
    bw.lambdas = std::vector<double>(x.size(), 1.0);
  else
    bw.lambdas = adaptive_lambdas(pilot_at_points(x, y, bw), alpha);
  KernelGrid2D joint = joint_on_grid(x, y, grid_x, grid_y, bw, bw.lambdas);
  return {std::move(joint), std::move(bw)};
}

DensityGrid1D marginal_of_joint(const KernelGrid2D& joint) {
  if (joint.kind != KernelGrid2D::Kind::joint)
    throw ConfigError("marginal requested from a non-joint kernel");
  DensityGrid1D marginal{joint.grid_x, std::vector<double>(joint.grid_x.m, 0.0)};
  const double dy = joint.grid_y.step();
  for (int i = 0; i < joint.grid_x.m; ++i) marginal.values[i] = trapezoid(joint.row(i), dy);
  return marginal;
}

ConditionalDecomposition conditional_of_joint(const KernelGrid2D& joint, double floor) {
  if (joint.kind != KernelGrid2D::Kind::joint)
    throw ConfigError("conditional decomposition requires a joint kernel");
  if (!(floor > 0.0)) throw ConfigError("conditioning density floor must be positive");
  ConditionalDecomposition out;
  out.marginal = marginal_of_joint(joint);
  out.conditional = joint;
  out.conditional.kind = KernelGrid2D::Kind::conditional;
  const double dy = joint.grid_y.step();
  for (int i = 0; i < joint.grid_x.m; ++i) {
    auto row = out.conditional.row(i);
    if (out.marginal.values[i] < floor) {
      std::fill(row.begin(), row.end(), 0.0);
      out.conditional.row_flag[i] = 1;
      continue;
    }
    for (double& v : row) v /= out.marginal.values[i];
    // exact renormalization on the grid (the division already lands within
    // rounding error of 1)
    double total = trapezoid(row, dy);
    for (double& v : row) v /= total;
  }
  return out;
}

ConditionalEstimate estimate_conditional(std::span<const double> x, std::span<const double> y,
                                         const EstimationConfig& config,
                                         const BandwidthSpec* frozen) {
  JointEstimate je = adaptive_density(x, y, config.grid_x, config.grid_y, config.alpha, frozen);
  ConditionalDecomposition cd = conditional_of_joint(je.joint, config.cond_floor);
  return {std::move(cd.conditional), std::move(cd.marginal), std::move(je.bandwidth)};
}

namespace reference {

DensityGrid1D pilot_density(std::span<const double> x, const Grid1D& grid,
                            const BandwidthSpec& bw) {
  const double s = bw.h * bw.sigma_x;
  DensityGrid1D out{grid, std::vector<double>(grid.m, 0.0)};
  for (int g = 0; g < grid.m; ++g) {
    double acc = 0.0;
    for (double xi : x) {
      double u = (grid.point(g) - xi) / s;
      acc += inv_sqrt_2pi / s * std::exp(-0.5 * u * u);
    }
    out.values[g] = acc / static_cast<double>(x.size());
  }
  return out;
}

KernelGrid2D pilot_density(std::span<const double> x, std::span<const double> y,
                           const Grid1D& grid_x, const Grid1D& grid_y, const BandwidthSpec& bw) {
  JointEstimate je = reference::adaptive_density(x, y, grid_x, grid_y, 0.0, &bw);
  return std::move(je.joint);
}

JointEstimate adaptive_density(std::span<const double> x, std::span<const double> y,
                               const Grid1D& grid_x, const Grid1D& grid_y, double alpha,
                               const BandwidthSpec* frozen) {
  check_sample(x);
  if (x.size() != y.size()) throw DataError("coordinate vectors differ in length");
  const std::size_t n = x.size();
  BandwidthSpec bw;
  if (frozen) {
    bw.h = frozen->h;
    bw.sigma_x = frozen->sigma_x;
    bw.sigma_y = frozen->sigma_y;
  } else {
    bw = optimal_bandwidth(x, y);
  }
  bw.alpha = alpha;
  bw.lambdas.assign(n, 1.0);
  if (alpha != 0.0) {
    // pilot at the sample points, direct double loop
    std::vector<double> pilot(n, 0.0);
    const double sx = bw.h * bw.sigma_x;
    const double sy = bw.h * bw.sigma_y;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double ux = (x[i] - x[j]) / sx;
        double uy = (y[i] - y[j]) / sy;
        acc += inv_sqrt_2pi / sx * std::exp(-0.5 * ux * ux) * inv_sqrt_2pi / sy *
               std::exp(-0.5 * uy * uy);
      }
      pilot[i] = acc / static_cast<double>(n);
    }
    bw.lambdas = adaptive_lambdas(pilot, alpha);
  }

  KernelGrid2D joint;
  joint.grid_x = grid_x;
  joint.grid_y = grid_y;
  joint.kind = KernelGrid2D::Kind::joint;
  joint.values.assign(static_cast<std::size_t>(grid_x.m) * grid_y.m, 0.0);
  joint.row_flag.assign(grid_x.m, 0);
  for (int a = 0; a < grid_x.m; ++a) {
    for (int b = 0; b < grid_y.m; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double sx = bw.h * bw.sigma_x * bw.lambdas[i];
        const double sy = bw.h * bw.sigma_y * bw.lambdas[i];
        double ux = (grid_x.point(a) - x[i]) / sx;
        double uy = (grid_y.point(b) - y[i]) / sy;
        acc += inv_sqrt_2pi / sx * std::exp(-0.5 * ux * ux) * inv_sqrt_2pi / sy *
               std::exp(-0.5 * uy * uy);
      }
      joint.values[static_cast<std::size_t>(a) * grid_y.m + b] = acc / static_cast<double>(n);
    }
  }
  return {std::move(joint), std::move(bw)};
}

}  // namespace reference

}  // namespace distdyn
