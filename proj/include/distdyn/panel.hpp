#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace distdyn {

// Balanced country-by-year panel of per-worker output, raw and normalized by
// the cross-sectional arithmetic mean of each year.
struct PanelDataset {
  std::vector<std::string> countries;
  std::vector<int> years;  // contiguous, ascending
  // values[c][t] with c indexing countries and t indexing years.
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> normalized;

  int year_index(int year) const;  // throws DataError if absent
  bool has_year(int year) const;
};

// Observation tuples (x_t, y_{t+tau}) or (x_t, y_{t+tau}, z_{t+2tau}) of
// relative incomes for one or two consecutive transitions of length tau.
struct TransitionSample {
  struct Label {
    std::string country;
    int start_year = 0;
  };

  int tau = 1;
  int arity = 2;  // 2 or 3
  // tuple[2] is unused when arity == 2.
  std::vector<std::array<double, 3>> tuples;
  std::vector<Label> labels;  // empty, or one per tuple

  std::size_t size() const { return tuples.size(); }
  std::vector<double> xs() const;
  std::vector<double> ys() const;
  std::vector<double> zs() const;  // throws if arity != 3
};

struct PanelColumns {
  std::string id = "country";
  std::string year = "year";
  std::string value = "value";
};

// Parse delimiter-separated text (comma, semicolon, or tab; sniffed from the
// header) with one row per (country, year, value) observation. Keeps the
// intersection of years observed for every country; the intersection must be
// contiguous and the panel balanced over it.
PanelDataset load_panel(std::istream& source, const PanelColumns& columns = {});
PanelDataset load_panel_file(const std::string& path, const PanelColumns& columns = {});

// Build a PanelDataset directly from in-memory data (used by tests and the
// Monte Carlo harness). Values are normalized per year on construction.
PanelDataset make_panel(std::vector<std::string> countries, std::vector<int> years,
                        std::vector<std::vector<double>> values);

// Optional country filter: when non-empty, only the named countries
// contribute tuples. Values stay normalized by the full panel's yearly means,
// so sub-sample members remain expressed relative to the whole cross-section.
TransitionSample make_transitions(const PanelDataset& panel, int start_year, int tau, int arity,
                                  const std::vector<std::string>& only_countries = {});

// Concatenation of make_transitions over start years first_start..last_start.
TransitionSample pool_overlapping(const PanelDataset& panel, int first_start, int last_start,
                                  int tau, int arity,
                                  const std::vector<std::string>& only_countries = {});

struct IncomeGroups {
  std::vector<std::string> low;
  std::vector<std::string> medium;
  std::vector<std::string> high;
};

// Sort countries by normalized value in base_year (ties broken by country
// identifier) and split into thirds; any remainder joins the middle group.
IncomeGroups split_by_initial_income(const PanelDataset& panel, int base_year);

// Per-year empirical quantiles of the normalized cross-section, linear
// interpolation between order statistics. boundaries[t][k] pairs with
// panel.years[t] and probabilities[k].
std::vector<std::vector<double>> quantile_boundaries(const PanelDataset& panel,
                                                     const std::vector<double>& probabilities);

// Linear-interpolation empirical quantile of an unsorted sample.
double empirical_quantile(std::vector<double> sample, double p);

}  // namespace distdyn
