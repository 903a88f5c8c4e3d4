#include "distdyn/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "distdyn/errors.hpp"
#include "distdyn/dynamics.hpp"
#include "distdyn/format.hpp"

namespace distdyn {

std::string test_kind_name(TestKind k) {
  return k == TestKind::homogeneity ? "homogeneity" : "first_order";
}

double achieved_significance(double observed, const std::vector<double>& draws) {
  if (draws.empty()) throw ConfigError("achieved significance needs at least one bootstrap draw");
  std::size_t exceed = 0;
  for (double d : draws)
    if (d > observed) ++exceed;  // strict inequality; ties do not count
  return static_cast<double>(exceed) / static_cast<double>(draws.size());
}

std::string estimation_digest(const EstimationConfig& config) {
  std::string canonical = "grid_x=" + format_double(config.grid_x.lo) + ":" +
                          format_double(config.grid_x.hi) + ":" + std::to_string(config.grid_x.m) +
                          ";grid_y=" + format_double(config.grid_y.lo) + ":" +
                          format_double(config.grid_y.hi) + ":" + std::to_string(config.grid_y.m) +
                          ";alpha=" + format_double(config.alpha) +
                          ";floor=" + format_double(config.cond_floor);
  return fnv1a64_hex(canonical);
}

double sample_from_conditional(const KernelGrid2D& conditional, double y, RngStream& rng,
                               int max_proposals) {
  if (conditional.kind != KernelGrid2D::Kind::conditional)
    throw ConfigError("sampling requires a conditional kernel");
  const int i = conditional.grid_x.nearest_index(y);
  if (conditional.flagged(i))
    throw NumericError("cannot sample: conditioning row " + std::to_string(i) +
                       " is flagged (no data support)");
  auto row = conditional.row(i);
  double row_max = *std::max_element(row.begin(), row.end());
  if (!(row_max > 0.0))
    throw NumericError("cannot sample: conditioning row " + std::to_string(i) + " has no mass");
  const double envelope = 1.05 * row_max;
  const Grid1D& gy = conditional.grid_y;
  for (int proposal = 0; proposal < max_proposals; ++proposal) {
    double t = gy.lo + rng.uniform() * (gy.hi - gy.lo);
    double f = interpolate(gy, row, t);
    if (rng.uniform() * envelope < f) return t;
  }
  throw NumericError("rejection sampling for conditioning row " + std::to_string(i) +
                     " exceeded " + std::to_string(max_proposals) + " proposals");
}

namespace {

struct PairSample {
  std::vector<double> x;
  std::vector<double> y;
};

bool degenerate(const std::vector<double>& v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo == *hi;
}

// n_out pairs drawn with replacement; a zero-variance coordinate triggers a
// full redraw, at most 10 times.
PairSample resample_pairs(const std::vector<double>& xs, const std::vector<double>& ys,
                          std::size_t n_out, RngStream& rng) {
  PairSample out;
  out.x.resize(n_out);
  out.y.resize(n_out);
  for (int attempt = 0;; ++attempt) {
    for (std::size_t i = 0; i < n_out; ++i) {
      std::size_t k = rng.uniform_index(xs.size());
      out.x[i] = xs[k];
      out.y[i] = ys[k];
    }
    if (!degenerate(out.x) && !degenerate(out.y)) return out;
    if (attempt >= 10)
      throw NumericError("resampling produced a degenerate sample 10 times in a row");
  }
}

DensityGrid1D homogeneity_weight(const ConditionalEstimate& e1, const ConditionalEstimate& e2,
                                 std::size_t n1, std::size_t n2, HomogeneityWeight kind) {
  if (kind == HomogeneityWeight::first_period) return normalize_weight(e1.marginal);
  // pooled: size-weighted mixture of the two estimated conditioning marginals
  DensityGrid1D mix = e1.marginal;
  const double w1 = static_cast<double>(n1) / static_cast<double>(n1 + n2);
  for (int i = 0; i < mix.grid.m; ++i)
    mix.values[i] = w1 * e1.marginal.values[i] + (1.0 - w1) * e2.marginal.values[i];
  return normalize_weight(std::move(mix));
}

std::vector<TestResult> package_results(TestKind kind, const std::vector<Metric>& metrics,
                                        const std::vector<double>& observed,
                                        std::vector<std::vector<double>> draws,
                                        const TestConfig& config, const RngStream& rng,
                                        std::vector<std::size_t> sample_sizes) {
  std::vector<TestResult> results;
  results.reserve(metrics.size());
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    TestResult r;
    r.test_kind = kind;
    r.metric = metrics[k];
    r.observed = observed[k];
    r.bootstrap_draws = std::move(draws[k]);
    r.asl = achieved_significance(r.observed, r.bootstrap_draws);
    r.seed = rng.seed();
    r.replications = config.replications;
    r.sample_sizes = sample_sizes;
    r.config_digest = estimation_digest(config.estimation);
    results.push_back(std::move(r));
  }
  return results;
}

void check_test_config(const std::vector<Metric>& metrics, const TestConfig& config) {
  if (metrics.empty()) throw ConfigError("at least one divergence metric is required");
  if (config.replications < 1) throw ConfigError("bootstrap replication count must be positive");
}

}  // namespace

std::vector<TestResult> test_homogeneity(const TransitionSample& first,
                                         const TransitionSample& second,
                                         const std::vector<Metric>& metrics,
                                         const TestConfig& config, RngStream rng) {
  if (first.arity != 2 || second.arity != 2)
    throw ConfigError("homogeneity test requires arity-2 transition samples");
  check_test_config(metrics, config);

  const EstimationConfig& est = config.estimation;
  const auto x1 = first.xs(), y1 = first.ys();
  const auto x2 = second.xs(), y2 = second.ys();
  const std::size_t n1 = x1.size(), n2 = x2.size();

  ConditionalEstimate e1 = estimate_conditional(x1, y1, est);
  ConditionalEstimate e2 = estimate_conditional(x2, y2, est);
  DensityGrid1D weight = homogeneity_weight(e1, e2, n1, n2, config.weight);
  std::vector<double> observed =
      divergence_all(e1.conditional, e2.conditional, metrics, weight, est.cond_floor);

  // the null pools both periods' pairs; bootstrap samples redraw from the pool
  std::vector<double> pool_x = x1, pool_y = y1;
  pool_x.insert(pool_x.end(), x2.begin(), x2.end());
  pool_y.insert(pool_y.end(), y2.begin(), y2.end());

  const int B = config.replications;
  std::vector<std::vector<double>> draws(metrics.size(), std::vector<double>(B, 0.0));
  std::exception_ptr failure = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int b = 0; b < B; ++b) {
    try {
      RngStream stream = rng.substream(static_cast<std::uint64_t>(b));
      PairSample s1 = resample_pairs(pool_x, pool_y, n1, stream);
      PairSample s2 = resample_pairs(pool_x, pool_y, n2, stream);
      // bandwidths stay at their observed-data values; the adaptive
      // multipliers are recomputed from each resample's own pilot
      ConditionalEstimate b1 = estimate_conditional(s1.x, s1.y, est, &e1.bandwidth);
      ConditionalEstimate b2 = estimate_conditional(s2.x, s2.y, est, &e2.bandwidth);
      DensityGrid1D bw = homogeneity_weight(b1, b2, n1, n2, config.weight);
      std::vector<double> vals =
          divergence_all(b1.conditional, b2.conditional, metrics, bw, est.cond_floor);
      for (std::size_t k = 0; k < metrics.size(); ++k) draws[k][b] = vals[k];
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

  return package_results(TestKind::homogeneity, metrics, observed, std::move(draws), config, rng,
                         {n1, n2});
}

std::vector<TestResult> test_first_order(const TransitionSample& triples,
                                         const std::vector<Metric>& metrics,
                                         const TestConfig& config, RngStream rng) {
  if (triples.arity != 3)
    throw ConfigError("first-order test requires arity-3 transition samples");
  check_test_config(metrics, config);

  const EstimationConfig& est = config.estimation;
  const auto xs = triples.xs(), ys = triples.ys(), zs = triples.zs();
  const std::size_t n = xs.size();

  ConditionalEstimate one_step = estimate_conditional(xs, ys, est);
  ConditionalEstimate two_step = estimate_conditional(xs, zs, est);
  KernelGrid2D composed = compose(one_step.conditional, one_step.conditional);
  DensityGrid1D weight = normalize_weight(one_step.marginal);
  std::vector<double> observed =
      divergence_all(two_step.conditional, composed, metrics, weight, est.cond_floor);

  const int B = config.replications;
  std::vector<std::vector<double>> draws(metrics.size(), std::vector<double>(B, 0.0));
  std::exception_ptr failure = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int b = 0; b < B; ++b) {
    try {
      RngStream stream = rng.substream(static_cast<std::uint64_t>(b));
      // resample the observed one-step pairs, then manufacture the second
      // step from the re-estimated kernel so the null holds by construction
      PairSample s = resample_pairs(xs, ys, n, stream);
      ConditionalEstimate b_tau = estimate_conditional(s.x, s.y, est, &one_step.bandwidth);
      std::vector<double> z(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        z[i] = sample_from_conditional(b_tau.conditional, s.y[i], stream);
      ConditionalEstimate b_2tau = estimate_conditional(s.x, z, est, &two_step.bandwidth);
      KernelGrid2D b_comp = compose(b_tau.conditional, b_tau.conditional);
      DensityGrid1D bw = normalize_weight(b_tau.marginal);
      std::vector<double> vals =
          divergence_all(b_2tau.conditional, b_comp, metrics, bw, est.cond_floor);
      for (std::size_t k = 0; k < metrics.size(); ++k) draws[k][b] = vals[k];
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

  return package_results(TestKind::first_order, metrics, observed, std::move(draws), config, rng,
                         {n});
}

TestResult test_homogeneity(const TransitionSample& first, const TransitionSample& second,
                            Metric metric, const TestConfig& config, RngStream rng) {
  return std::move(test_homogeneity(first, second, std::vector<Metric>{metric}, config, rng)[0]);
}

TestResult test_first_order(const TransitionSample& triples, Metric metric,
                            const TestConfig& config, RngStream rng) {
  return std::move(test_first_order(triples, std::vector<Metric>{metric}, config, rng)[0]);
}

}  // namespace distdyn
