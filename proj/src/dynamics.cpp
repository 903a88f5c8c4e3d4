#include "distdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "distdyn/errors.hpp"

namespace distdyn {

namespace {

void check_conditional(const KernelGrid2D& kernel) {
  if (kernel.kind != KernelGrid2D::Kind::conditional)
    throw ConfigError("operation requires a conditional kernel");
}

}  // namespace

DensityGrid1D push_forward(const KernelGrid2D& kernel, const DensityGrid1D& f) {
  check_conditional(kernel);
  if (!(kernel.grid_x == f.grid)) throw ConfigError("kernel and density live on different grids");
  const int mx = kernel.grid_x.m;
  const int my = kernel.grid_y.m;
  const double dx = kernel.grid_x.step();
  DensityGrid1D out{kernel.grid_y, std::vector<double>(my, 0.0)};
  for (int i = 0; i < mx; ++i) {
    if (kernel.flagged(i)) continue;  // no data support at this conditioning point
    const double ci = (i == 0 || i == mx - 1) ? 0.5 : 1.0;
    const double scale = ci * dx * f.values[i];
    auto row = kernel.row(i);
    for (int j = 0; j < my; ++j) out.values[j] += scale * row[j];
  }
  double total = out.integral();
  if (!(total > 0.0)) throw NumericError("push-forward produced zero mass");
  for (double& v : out.values) v /= total;
  return out;
}

KernelGrid2D compose(const KernelGrid2D& a, const KernelGrid2D& b) {
  check_conditional(a);
  check_conditional(b);
  if (!(b.grid_y == a.grid_x)) throw ConfigError("inner grids of composed kernels differ");
  const int mx = b.grid_x.m;
  const int mid = a.grid_x.m;
  const int mz = a.grid_y.m;
  const double dy = a.grid_x.step();
  const double dz = a.grid_y.step();

  KernelGrid2D out;
  out.grid_x = b.grid_x;
  out.grid_y = a.grid_y;
  out.kind = KernelGrid2D::Kind::conditional;
  out.values.assign(static_cast<std::size_t>(mx) * mz, 0.0);
  out.row_flag = b.row_flag;

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < mx; ++i) {
    if (b.flagged(i)) continue;
    auto bi = b.row(i);
    double* oi = out.values.data() + static_cast<std::size_t>(i) * mz;
    for (int k = 0; k < mid; ++k) {
      if (a.flagged(k)) continue;
      const double ck = (k == 0 || k == mid - 1) ? 0.5 : 1.0;
      const double scale = ck * dy * bi[k];
      auto ak = a.row(k);
      for (int j = 0; j < mz; ++j) oi[j] += scale * ak[j];
    }
    double total = trapezoid({oi, static_cast<std::size_t>(mz)}, dz);
    if (total > 0.0)
      for (int j = 0; j < mz; ++j) oi[j] /= total;
    else
      out.row_flag[i] = 1;  // all mass fell on flagged rows of the outer kernel
  }
  return out;
}

ErgodicResult ergodic(const KernelGrid2D& kernel, double tol, int max_iter) {
  check_conditional(kernel);
  if (!(kernel.grid_x == kernel.grid_y))
    throw ConfigError("ergodic iteration requires a square kernel (matching grids)");
  return ergodic_from(kernel, uniform_density(kernel.grid_x), tol, max_iter);
}

ErgodicResult ergodic_from(const KernelGrid2D& kernel, DensityGrid1D start, double tol,
                           int max_iter) {
  check_conditional(kernel);
  if (!(tol > 0.0)) throw ConfigError("ergodic tolerance must be positive");
  if (kernel.flagged_count() == kernel.grid_x.m)
    throw NumericError("every kernel row is flagged; ergodic density undefined");
  if (!(kernel.grid_x == start.grid)) throw ConfigError("start density on the wrong grid");
  start.normalize();

  ErgodicResult result;
  result.density = std::move(start);
  const double dy = kernel.grid_y.step();
  std::vector<double> diff(kernel.grid_y.m, 0.0);
  for (int it = 1; it <= max_iter; ++it) {
    DensityGrid1D next = push_forward(kernel, result.density);
    for (int j = 0; j < kernel.grid_y.m; ++j)
      diff[j] = std::abs(next.values[j] - result.density.values[j]);
    result.residual = trapezoid(diff, dy);
    result.density = std::move(next);
    result.iterations = it;
    if (result.residual < tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

ErgodicResult ergodic_bands(const TransitionSample& sample, const EstimationConfig& est,
                            const ErgodicBandConfig& band, RngStream rng) {
  if (sample.arity < 2) throw ConfigError("ergodic bands need (x, y) transition tuples");
  if (band.replications < 100) throw ConfigError("confidence bands need at least 100 replications");
  if (!(band.coverage > 0.0 && band.coverage < 1.0))
    throw ConfigError("band coverage must lie strictly in (0,1)");

  const auto xs = sample.xs();
  const auto ys = sample.ys();
  ConditionalEstimate point = estimate_conditional(xs, ys, est);
  ErgodicResult result = ergodic(point.conditional, band.tol, band.max_iter);

  const int m = est.grid_y.m;
  const int B = band.replications;
  std::vector<std::vector<double>> replicate(B);
  std::exception_ptr failure = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int b = 0; b < B; ++b) {
    try {
      RngStream stream = rng.substream(static_cast<std::uint64_t>(b));
      const std::size_t n = xs.size();
      std::vector<double> rx(n), ry(n);
      for (int attempt = 0;; ++attempt) {
        for (std::size_t i = 0; i < n; ++i) {
          std::size_t k = stream.uniform_index(n);
          rx[i] = xs[k];
          ry[i] = ys[k];
        }
        auto degenerate = [](const std::vector<double>& v) {
          auto [lo, hi] = std::minmax_element(v.begin(), v.end());
          return *lo == *hi;
        };
        if (!degenerate(rx) && !degenerate(ry)) break;
        if (attempt >= 10)
          throw NumericError("resampling produced a degenerate sample 10 times in a row");
      }
      ConditionalEstimate ce = estimate_conditional(rx, ry, est);
      ErgodicResult er = ergodic(ce.conditional, band.tol, band.max_iter);
      replicate[b] = std::move(er.density.values);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  // k-th smallest / k-th largest pointwise, e.g. 50th of 1000 for 90% bands.
  int k = std::max(1, static_cast<int>(std::lround((1.0 - band.coverage) / 2.0 * B)));
  DensityGrid1D lo{est.grid_y, std::vector<double>(m, 0.0)};
  DensityGrid1D hi{est.grid_y, std::vector<double>(m, 0.0)};
  std::vector<double> column(B);
  for (int j = 0; j < m; ++j) {
    for (int b = 0; b < B; ++b) column[b] = replicate[b][j];
    std::sort(column.begin(), column.end());
    lo.values[j] = column[k - 1];
    hi.values[j] = column[B - k];
  }
  result.band_lo = std::move(lo);
  result.band_hi = std::move(hi);
  return result;
}

}  // namespace distdyn
