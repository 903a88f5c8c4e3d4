#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "distdyn/hypothesis.hpp"
#include "distdyn/panel.hpp"
#include "distdyn/rng.hpp"

namespace distdyn {

// AR(1) with a break in the final transition: periods up to T-1 use rho, the
// last period uses rho + theta. theta = 0 is the time-homogeneous null.
struct HomogeneityDgp {
  double rho = 0.0;
  double theta = 0.0;
  double sigma_eps = 0.15;
  int n = 100;        // cross-section size
  int burn_in = 100;  // periods discarded before the kept transitions
};

// AR(2); rho2 = 0 is the first-order null.
struct OrderDgp {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double sigma_eps = 0.15;
  int n = 100;
  int burn_in = 100;
};

// n paths of y_t = rho y_{t-1} + eps (last step rho + theta), y_0 Gaussian;
// the last three values per path give the two transition samples:
// first (x, y) pairs governed by rho, second (y, z) pairs by rho + theta.
std::pair<TransitionSample, TransitionSample> simulate_homogeneity(const HomogeneityDgp& dgp,
                                                                   RngStream& rng);

// n paths of y_t = rho1 y_{t-1} + rho2 y_{t-2} + eps; last three values per
// path form the (x, y, z) triples.
TransitionSample simulate_order(const OrderDgp& dgp, RngStream& rng);

// Evaluation-grid half-width used in the simulation studies:
// 3 * sigma_eps / sqrt(1 - persistence^2) with persistence = rho + theta or
// rho1 + rho2. sigma_as_variance switches to the reading where sigma_eps^2
// replaces sigma_eps under the square root.
double mc_grid_halfwidth(double persistence, double sigma_eps, bool sigma_as_variance = false);

struct StudyCell {
  TestKind kind = TestKind::homogeneity;
  // Homogeneity cells use a/b = rho/theta; order cells use a/b = rho1/rho2.
  double a = 0.0;
  double b = 0.0;
  int n = 100;
};

struct StudyConfig {
  std::vector<StudyCell> cells;
  std::vector<Metric> metrics{Metric::L1, Metric::Hellinger};
  int runs = 1000;
  int bootstrap = 1000;
  double nominal = 0.05;
  double sigma_eps = 0.15;
  int burn_in = 100;
  int grid_points = 40;
  double alpha = 0.0;  // standard estimator by default in simulations
  bool sigma_as_variance = false;
  double max_failure_rate = 0.05;
};

struct PowerCell {
  StudyCell cell;
  Metric metric = Metric::L1;
  double rejection_rate = 0.0;
  int runs = 0;
  int failures = 0;
};

struct PowerTable {
  std::vector<PowerCell> cells;
  int runs = 0;
  int bootstrap = 0;
  double nominal = 0.0;
  std::uint64_t seed = 0;
};

// Simulate every cell for `runs` Monte Carlo iterations each: generate data,
// run the matching test with the configured bootstrap count, and record the
// fraction of iterations with asl < nominal. Bandwidths are re-estimated from
// each iteration's data and held fixed across that iteration's bootstrap
// replications. Failed iterations are counted and excluded; a failure share
// above max_failure_rate aborts.
PowerTable run_power_study(const StudyConfig& config, RngStream rng);

}  // namespace distdyn
