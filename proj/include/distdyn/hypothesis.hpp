#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distdyn/divergence.hpp"
#include "distdyn/kde.hpp"
#include "distdyn/panel.hpp"
#include "distdyn/rng.hpp"

namespace distdyn {

enum class TestKind { homogeneity, first_order };

std::string test_kind_name(TestKind k);

// One bootstrap specification test outcome with everything needed to rerun it.
struct TestResult {
  TestKind test_kind = TestKind::homogeneity;
  Metric metric = Metric::L1;
  double observed = 0.0;               // divergence on the observed samples
  std::vector<double> bootstrap_draws;  // one divergence per replication
  double asl = 0.0;  // fraction of draws strictly greater than observed
  std::uint64_t seed = 0;
  int replications = 0;
  std::vector<std::size_t> sample_sizes;
  std::string config_digest;  // hash of the estimation settings
};

// Which marginal weights the divergence in the homogeneity test: the first
// period's conditioning marginal (default) or the pooled sample's.
enum class HomogeneityWeight { first_period, pooled };

struct TestConfig {
  EstimationConfig estimation;
  int replications = 1000;
  HomogeneityWeight weight = HomogeneityWeight::first_period;
};

// Time-homogeneity test: are the transition kernels of two same-length
// periods equal? Bootstrap draws re-estimate both kernels on samples drawn
// with replacement from the pooled pairs (the null), holding h and sigma at
// their observed-data values. Each requested metric is evaluated against the
// same resampled kernels, so multi-metric runs share one set of draws.
std::vector<TestResult> test_homogeneity(const TransitionSample& first,
                                         const TransitionSample& second,
                                         const std::vector<Metric>& metrics,
                                         const TestConfig& config, RngStream rng);

// First-order test via the two-step identity: compare the estimated 2tau
// kernel against the composition of the estimated tau kernel with itself.
// Bootstrap draws resample (x, y) pairs, draw z from the re-estimated tau
// kernel by rejection sampling, and recompute the statistic on the triple.
std::vector<TestResult> test_first_order(const TransitionSample& triples,
                                         const std::vector<Metric>& metrics,
                                         const TestConfig& config, RngStream rng);

// Single-metric conveniences.
TestResult test_homogeneity(const TransitionSample& first, const TransitionSample& second,
                            Metric metric, const TestConfig& config, RngStream rng);
TestResult test_first_order(const TransitionSample& triples, Metric metric,
                            const TestConfig& config, RngStream rng);

// count(draws > observed) / B with strict inequality.
double achieved_significance(double observed, const std::vector<double>& draws);

// Draw one value from a grid-valued conditional kernel at conditioning value
// y: condition on the nearest grid row, then rejection-sample against a
// uniform envelope of 1.05 times the row maximum, interpolating the row
// linearly between grid points. Throws NumericError (naming the row) after
// max_proposals rejected proposals.
double sample_from_conditional(const KernelGrid2D& conditional, double y, RngStream& rng,
                               int max_proposals = 10000);

std::string estimation_digest(const EstimationConfig& config);

}  // namespace distdyn
