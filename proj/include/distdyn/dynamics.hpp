#pragma once

#include <cstdint>
#include <optional>

#include "distdyn/grid.hpp"
#include "distdyn/kde.hpp"
#include "distdyn/panel.hpp"
#include "distdyn/rng.hpp"

namespace distdyn {

// Fixed point of the transition operator plus convergence diagnostics and
// optional pointwise bootstrap bands.
struct ErgodicResult {
  DensityGrid1D density;
  int iterations = 0;
  double residual = 0.0;  // L1 change at the final iteration
  bool converged = false;
  std::optional<DensityGrid1D> band_lo;
  std::optional<DensityGrid1D> band_hi;
};

// f_out(y) = integral of kernel(y|x) f(x) dx by trapezoid quadrature; flagged
// rows contribute nothing, and the output is renormalized to unit mass.
DensityGrid1D push_forward(const KernelGrid2D& kernel, const DensityGrid1D& f);

// Two-step kernel: out(z|x) = integral of a(z|y) b(y|x) dy. Row i of the
// output is push_forward(a, row i of b); flags propagate from b's rows.
KernelGrid2D compose(const KernelGrid2D& a, const KernelGrid2D& b);

// Power iteration from the uniform density on the grid, renormalizing each
// step, until the L1 change drops below tol or max_iter is hit.
ErgodicResult ergodic(const KernelGrid2D& kernel, double tol = 1e-9, int max_iter = 10000);

// Same, but starting from a caller-supplied density (used by the start-
// invariance property test).
ErgodicResult ergodic_from(const KernelGrid2D& kernel, DensityGrid1D start, double tol = 1e-9,
                           int max_iter = 10000);

struct ErgodicBandConfig {
  int replications = 1000;
  double coverage = 0.9;
  double tol = 1e-9;
  int max_iter = 10000;
};

// Point estimate from the full sample plus pointwise coverage bands from
// resampling tuples with replacement and re-estimating kernel and ergodic
// density per replication. For coverage 0.9 and B = 1000 the band endpoints
// at each grid point are the 50th smallest and 50th largest replicate values.
ErgodicResult ergodic_bands(const TransitionSample& sample, const EstimationConfig& est,
                            const ErgodicBandConfig& band, RngStream rng);

}  // namespace distdyn
