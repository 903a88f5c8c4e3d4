#pragma once

#include <string>
#include <vector>

#include "distdyn/grid.hpp"

namespace distdyn {

enum class Metric { L1, L2, Linf, Hellinger };

std::string metric_name(Metric m);
Metric parse_metric(const std::string& name);  // accepts L1/L2/Linf/H (case-insensitive)
const std::vector<Metric>& all_metrics();

// Weighted distance between two conditional kernels. The weight is a density
// over the conditioning variable, normalized to integrate to 1 on the grid.
struct DivergenceSpec {
  Metric metric = Metric::L1;
  DensityGrid1D weight;
  double weight_floor = 1e-8;  // rows below this weight are ignored by Linf
};

// L^p (p = 1, 2): [integral of |f1-f2|^p weighted by w(x)]^(1/p) over the
// grid; Linf: unweighted sup of |f1-f2| over rows whose weight density
// exceeds weight_floor; Hellinger: {1/2 integral (sqrt(f1)-sqrt(f2))^2 w(x)}^(1/2).
// Rows flagged in either kernel are excluded and the weight renormalized over
// the remaining rows.
double divergence(const KernelGrid2D& f1, const KernelGrid2D& f2, const DivergenceSpec& spec);

// Same exclusion/renormalization logic shared by all metrics; exposed so the
// hypothesis tests can evaluate several metrics against one pair of kernels
// without redoing the row bookkeeping.
std::vector<double> divergence_all(const KernelGrid2D& f1, const KernelGrid2D& f2,
                                   const std::vector<Metric>& metrics,
                                   const DensityGrid1D& weight, double weight_floor = 1e-8);

// Build a normalized weight from an estimated marginal.
DensityGrid1D normalize_weight(DensityGrid1D marginal);

}  // namespace distdyn
