#include "distdyn/divergence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "distdyn/errors.hpp"

namespace distdyn {

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::L1: return "L1";
    case Metric::L2: return "L2";
    case Metric::Linf: return "Linf";
    case Metric::Hellinger: return "H";
  }
  throw ConfigError("unknown metric");
}

Metric parse_metric(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "l1") return Metric::L1;
  if (s == "l2") return Metric::L2;
  if (s == "linf" || s == "linfty" || s == "sup") return Metric::Linf;
  if (s == "h" || s == "hellinger") return Metric::Hellinger;
  throw ConfigError("unknown metric '" + name + "' (expected L1, L2, Linf, or H)");
}

const std::vector<Metric>& all_metrics() {
  static const std::vector<Metric> metrics{Metric::L1, Metric::L2, Metric::Linf,
                                           Metric::Hellinger};
  return metrics;
}

DensityGrid1D normalize_weight(DensityGrid1D marginal) {
  marginal.normalize();
  return marginal;
}

std::vector<double> divergence_all(const KernelGrid2D& f1, const KernelGrid2D& f2,
                                   const std::vector<Metric>& metrics,
                                   const DensityGrid1D& weight, double weight_floor) {
  if (!(f1.grid_x == f2.grid_x) || !(f1.grid_y == f2.grid_y) || !(f1.grid_x == weight.grid))
    throw ConfigError("divergence inputs live on different grids");
  if (f1.kind != KernelGrid2D::Kind::conditional || f2.kind != KernelGrid2D::Kind::conditional)
    throw ConfigError("divergence is defined between conditional kernels");

  const int mx = f1.grid_x.m;
  const int my = f1.grid_y.m;
  const double dx = f1.grid_x.step();
  const double dy = f1.grid_y.step();

  // Rows flagged in either kernel drop out; the weight is renormalized over
  // what remains so the divergence stays comparable across flag patterns.
  std::vector<double> w(mx, 0.0);
  bool any_included = false;
  for (int i = 0; i < mx; ++i) {
    if (f1.flagged(i) || f2.flagged(i)) continue;
    w[i] = weight.values[i];
    any_included = true;
  }
  if (!any_included) throw NumericError("all kernel rows are flagged; divergence undefined");
  double w_total = trapezoid(w, dx);
  if (!(w_total > 0.0)) throw NumericError("weight has no mass on the unflagged rows");
  for (double& v : w) v /= w_total;

  double acc_l1 = 0.0, acc_l2 = 0.0, acc_h = 0.0, sup = 0.0;
  for (int i = 0; i < mx; ++i) {
    if (f1.flagged(i) || f2.flagged(i)) continue;
    auto r1 = f1.row(i);
    auto r2 = f2.row(i);
    double row_l1 = 0.0, row_l2 = 0.0, row_h = 0.0, row_sup = 0.0;
    for (int j = 0; j < my; ++j) {
      const double cj = (j == 0 || j == my - 1) ? 0.5 : 1.0;
      const double diff = r1[j] - r2[j];
      const double ad = std::abs(diff);
      row_l1 += cj * ad;
      row_l2 += cj * diff * diff;
      const double sq = std::sqrt(r1[j]) - std::sqrt(r2[j]);
      row_h += cj * sq * sq;
      row_sup = std::max(row_sup, ad);
    }
    const double ci = (i == 0 || i == mx - 1) ? 0.5 : 1.0;
    const double wi = ci * w[i] * dx * dy;
    acc_l1 += wi * row_l1;
    acc_l2 += wi * row_l2;
    acc_h += wi * row_h;
    if (w[i] > weight_floor) sup = std::max(sup, row_sup);
  }

  std::vector<double> out(metrics.size(), 0.0);
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    switch (metrics[k]) {
      case Metric::L1: out[k] = acc_l1; break;
      case Metric::L2: out[k] = std::sqrt(acc_l2); break;
      case Metric::Linf: out[k] = sup; break;
      case Metric::Hellinger: out[k] = std::sqrt(0.5 * acc_h); break;
    }
  }
  return out;
}

double divergence(const KernelGrid2D& f1, const KernelGrid2D& f2, const DivergenceSpec& spec) {
  return divergence_all(f1, f2, {spec.metric}, spec.weight, spec.weight_floor)[0];
}

}  // namespace distdyn
