#pragma once

#include <span>
#include <vector>

#include "distdyn/grid.hpp"

namespace distdyn {

// Bandwidth ingredients for the (adaptive) Gaussian product-kernel estimator:
// the kernel bandwidth in coordinate k for observation i is h * sigma_k *
// lambda_i. For the standard estimator all lambda_i are 1.
struct BandwidthSpec {
  double h = 0.0;        // scale factor (4/((d+2)n))^(1/(d+4))
  double sigma_x = 0.0;  // per-coordinate sample standard deviations
  double sigma_y = 0.0;  // 0 for univariate estimation
  double alpha = 0.0;    // local-sensitivity exponent in [0,1]
  std::vector<double> lambdas;  // empty until adaptive estimation runs
};

// Normal-reference bandwidth: h = (4/((d+2)n))^(1/(d+4)), per-coordinate
// scale h*sigma_k with sigma_k the sample standard deviation (n-1 in the
// denominator). lambdas are left unset.
BandwidthSpec optimal_bandwidth(std::span<const double> x);
BandwidthSpec optimal_bandwidth(std::span<const double> x, std::span<const double> y);

// Fixed-bandwidth Gaussian KDE on a grid.
DensityGrid1D pilot_density(std::span<const double> x, const Grid1D& grid,
                            const BandwidthSpec& bw);
KernelGrid2D pilot_density(std::span<const double> x, std::span<const double> y,
                           const Grid1D& grid_x, const Grid1D& grid_y, const BandwidthSpec& bw);

// Fixed-bandwidth Gaussian KDE evaluated at the sample points themselves
// (the pilot values that drive the adaptive multipliers).
std::vector<double> pilot_at_points(std::span<const double> x, const BandwidthSpec& bw);
std::vector<double> pilot_at_points(std::span<const double> x, std::span<const double> y,
                                    const BandwidthSpec& bw);

// Adaptive multipliers lambda_i = (pilot_i / g)^(-alpha) with g the geometric
// mean of the nonzero pilot values; zero pilot values (underflow) get
// lambda_i = 1. alpha = 0 yields all ones.
std::vector<double> adaptive_lambdas(std::span<const double> pilot_values, double alpha);

struct DensityEstimate1D {
  DensityGrid1D density;
  BandwidthSpec bandwidth;
};

struct JointEstimate {
  KernelGrid2D joint;  // kind = joint
  BandwidthSpec bandwidth;
};

// Adaptive Gaussian KDE. When `frozen` is supplied, its h and sigma values
// are reused instead of being re-estimated from the sample (the lambdas are
// always recomputed from the sample's own pilot values); this implements the
// bootstrap convention of holding bandwidths at their observed-data values.
DensityEstimate1D adaptive_density(std::span<const double> x, const Grid1D& grid, double alpha,
                                   const BandwidthSpec* frozen = nullptr);
JointEstimate adaptive_density(std::span<const double> x, std::span<const double> y,
                               const Grid1D& grid_x, const Grid1D& grid_y, double alpha,
                               const BandwidthSpec* frozen = nullptr);

// Trapezoid integration of a joint density over y for each grid_x point.
DensityGrid1D marginal_of_joint(const KernelGrid2D& joint);

struct ConditionalDecomposition {
  KernelGrid2D conditional;  // kind = conditional, rows renormalized
  DensityGrid1D marginal;
};

// Divide each row of the joint by the marginal at its conditioning point.
// Rows whose marginal falls below `floor` are zeroed and flagged; the rest
// are renormalized to integrate to exactly 1 on the grid.
ConditionalDecomposition conditional_of_joint(const KernelGrid2D& joint, double floor);

// Settings shared by every estimation in a run.
struct EstimationConfig {
  Grid1D grid_x{-1.0, 4.0, 100};
  Grid1D grid_y{-1.0, 4.0, 100};
  double alpha = 0.5;        // 0 selects the standard (fixed-bandwidth) estimator
  double cond_floor = 1e-8;  // conditioning-marginal density floor
};

struct ConditionalEstimate {
  KernelGrid2D conditional;
  DensityGrid1D marginal;
  BandwidthSpec bandwidth;
};

// Joint estimation + conditional decomposition in one step; the entry point
// used by the hypothesis tests and the ergodic pipeline.
ConditionalEstimate estimate_conditional(std::span<const double> x, std::span<const double> y,
                                         const EstimationConfig& config,
                                         const BandwidthSpec* frozen = nullptr);

namespace reference {

// Straightforward serial implementations (direct double loop over sample and
// grid, no separability tricks, no OpenMP). Kept as an independent oracle for
// the optimized versions and for the benchmark target.
DensityGrid1D pilot_density(std::span<const double> x, const Grid1D& grid,
                            const BandwidthSpec& bw);
KernelGrid2D pilot_density(std::span<const double> x, std::span<const double> y,
                           const Grid1D& grid_x, const Grid1D& grid_y, const BandwidthSpec& bw);
JointEstimate adaptive_density(std::span<const double> x, std::span<const double> y,
                               const Grid1D& grid_x, const Grid1D& grid_y, double alpha,
                               const BandwidthSpec* frozen = nullptr);

}  // namespace reference

}  // namespace distdyn
