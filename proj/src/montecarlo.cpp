#include "distdyn/montecarlo.hpp"

#include <cmath>
#include <exception>

#include "distdyn/errors.hpp"

namespace distdyn {

namespace {

void check_homogeneity_dgp(const HomogeneityDgp& dgp) {
  if (std::abs(dgp.rho + dgp.theta) >= 1.0)
    throw ConfigError("nonstationary process: |rho + theta| must be below 1");
  if (!(dgp.sigma_eps > 0.0)) throw ConfigError("innovation scale must be positive");
  if (dgp.n < 2) throw ConfigError("cross-section size must be at least 2");
  if (dgp.burn_in < 0) throw ConfigError("burn-in cannot be negative");
}

void check_order_dgp(const OrderDgp& dgp) {
  if (std::abs(dgp.rho1 + dgp.rho2) >= 1.0)
    throw ConfigError("nonstationary process: |rho1 + rho2| must be below 1");
  if (!(dgp.sigma_eps > 0.0)) throw ConfigError("innovation scale must be positive");
  if (dgp.n < 2) throw ConfigError("cross-section size must be at least 2");
  if (dgp.burn_in < 0) throw ConfigError("burn-in cannot be negative");
}

}  // namespace

std::pair<TransitionSample, TransitionSample> simulate_homogeneity(const HomogeneityDgp& dgp,
                                                                   RngStream& rng) {
  check_homogeneity_dgp(dgp);
  TransitionSample first, second;
  first.tau = second.tau = 1;
  first.arity = second.arity = 2;
  first.tuples.reserve(dgp.n);
  second.tuples.reserve(dgp.n);
  const int last = dgp.burn_in + 3;
  for (int i = 0; i < dgp.n; ++i) {
    double y = dgp.sigma_eps * rng.normal();
    double x = 0.0, mid = 0.0;
    for (int t = 1; t <= last; ++t) {
      // every period is governed by rho except the final one, which breaks
      // to rho + theta
      const double coef = (t == last) ? dgp.rho + dgp.theta : dgp.rho;
      y = coef * y + dgp.sigma_eps * rng.normal();
      if (t == dgp.burn_in + 1) x = y;
      if (t == dgp.burn_in + 2) mid = y;
    }
    first.tuples.push_back({x, mid, 0.0});
    second.tuples.push_back({mid, y, 0.0});
  }
  return {std::move(first), std::move(second)};
}

TransitionSample simulate_order(const OrderDgp& dgp, RngStream& rng) {
  check_order_dgp(dgp);
  TransitionSample triples;
  triples.tau = 1;
  triples.arity = 3;
  triples.tuples.reserve(dgp.n);
  const int last = dgp.burn_in + 3;
  for (int i = 0; i < dgp.n; ++i) {
    double y_lag2 = dgp.sigma_eps * rng.normal();
    double y_lag1 = dgp.sigma_eps * rng.normal();
    double x = 0.0, mid = 0.0, y = 0.0;
    for (int t = 1; t <= last; ++t) {
      y = dgp.rho1 * y_lag1 + dgp.rho2 * y_lag2 + dgp.sigma_eps * rng.normal();
      y_lag2 = y_lag1;
      y_lag1 = y;
      if (t == dgp.burn_in + 1) x = y;
      if (t == dgp.burn_in + 2) mid = y;
    }
    triples.tuples.push_back({x, mid, y});
  }
  return triples;
}

double mc_grid_halfwidth(double persistence, double sigma_eps, bool sigma_as_variance) {
  if (std::abs(persistence) >= 1.0)
    throw ConfigError("nonstationary persistence; grid range undefined");
  const double s = sigma_as_variance ? std::sqrt(sigma_eps) : sigma_eps;
  return 3.0 * s / std::sqrt(1.0 - persistence * persistence);
}

PowerTable run_power_study(const StudyConfig& config, RngStream rng) {
  if (config.cells.empty()) throw ConfigError("power study needs at least one parameter cell");
  if (config.metrics.empty()) throw ConfigError("power study needs at least one metric");
  if (config.runs < 1) throw ConfigError("power study needs at least one run per cell");
  if (config.bootstrap < 1) throw ConfigError("bootstrap count must be positive");
  if (!(config.nominal > 0.0 && config.nominal < 1.0))
    throw ConfigError("nominal size must lie strictly in (0,1)");
  if (config.grid_points < 2) throw ConfigError("grid needs at least 2 points");

  // validate every cell up front so a bad config fails before any work
  for (const StudyCell& cell : config.cells) {
    if (std::abs(cell.a + cell.b) >= 1.0)
      throw ConfigError("nonstationary cell: |" + std::to_string(cell.a) + " + " +
                        std::to_string(cell.b) + "| must be below 1");
    if (cell.n < 2) throw ConfigError("cell sample size must be at least 2");
  }

  const double sigma = config.sigma_as_variance ? std::sqrt(config.sigma_eps) : config.sigma_eps;
  const int n_cells = static_cast<int>(config.cells.size());
  const int n_metrics = static_cast<int>(config.metrics.size());
  const int total = n_cells * config.runs;

  std::vector<double> asl(static_cast<std::size_t>(total) * n_metrics, 0.0);
  std::vector<std::uint8_t> failed(total, 0);
  std::vector<std::string> failure_message(n_cells);
  std::exception_ptr fatal = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int task = 0; task < total; ++task) {
    const int ci = task / config.runs;
    const StudyCell& cell = config.cells[ci];
    try {
      RngStream stream = rng.substream(static_cast<std::uint64_t>(task));
      const double hw = mc_grid_halfwidth(cell.a + cell.b, config.sigma_eps,
                                          config.sigma_as_variance);
      TestConfig tc;
      tc.estimation.grid_x = Grid1D::linspace(-hw, hw, config.grid_points);
      tc.estimation.grid_y = tc.estimation.grid_x;
      tc.estimation.alpha = config.alpha;
      tc.replications = config.bootstrap;

      std::vector<TestResult> results;
      if (cell.kind == TestKind::homogeneity) {
        HomogeneityDgp dgp{cell.a, cell.b, sigma, cell.n, config.burn_in};
        auto [s1, s2] = simulate_homogeneity(dgp, stream);
        results = test_homogeneity(s1, s2, config.metrics, tc, stream);
      } else {
        OrderDgp dgp{cell.a, cell.b, sigma, cell.n, config.burn_in};
        TransitionSample triples = simulate_order(dgp, stream);
        results = test_first_order(triples, config.metrics, tc, stream);
      }
      for (int k = 0; k < n_metrics; ++k)
        asl[static_cast<std::size_t>(task) * n_metrics + k] = results[k].asl;
    } catch (const Error& e) {
      failed[task] = 1;
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (failure_message[ci].empty()) failure_message[ci] = e.what();
      }
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (!fatal) fatal = std::current_exception();
      }
    }
  }
  if (fatal) std::rethrow_exception(fatal);

  PowerTable table;
  table.runs = config.runs;
  table.bootstrap = config.bootstrap;
  table.nominal = config.nominal;
  table.seed = rng.seed();
  for (int ci = 0; ci < n_cells; ++ci) {
    int failures = 0;
    for (int r = 0; r < config.runs; ++r) failures += failed[ci * config.runs + r];
    if (static_cast<double>(failures) >
        config.max_failure_rate * static_cast<double>(config.runs))
      throw NumericError("cell " + std::to_string(ci) + ": " + std::to_string(failures) + "/" +
                         std::to_string(config.runs) + " runs failed (" + failure_message[ci] +
                         ")");
    for (int k = 0; k < n_metrics; ++k) {
      int rejections = 0;
      for (int r = 0; r < config.runs; ++r) {
        const int task = ci * config.runs + r;
        if (failed[task]) continue;
        if (asl[static_cast<std::size_t>(task) * n_metrics + k] < config.nominal) ++rejections;
      }
      PowerCell out;
      out.cell = config.cells[ci];
      out.metric = config.metrics[k];
      out.runs = config.runs - failures;
      out.failures = failures;
      out.rejection_rate = static_cast<double>(rejections) / static_cast<double>(out.runs);
      table.cells.push_back(out);
    }
  }
  return table;
}

}  // namespace distdyn
