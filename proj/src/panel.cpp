#include "distdyn/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "distdyn/errors.hpp"

namespace distdyn {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

char sniff_delimiter(const std::string& header) {
  char best = 0;
  std::size_t best_count = 0;
  for (char candidate : {',', ';', '\t'}) {
    std::size_t count = static_cast<std::size_t>(std::count(header.begin(), header.end(), candidate));
    if (count > best_count) {
      best = candidate;
      best_count = count;
    }
  }
  if (best == 0) throw DataError("input header contains no recognized delimiter (comma, semicolon, tab)");
  return best;
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) fields.push_back(trim(field));
  if (!line.empty() && line.back() == delim) fields.push_back("");
  return fields;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  // fall back to a case-insensitive match
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  std::string want = lower(name);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (lower(header[i]) == want) return i;
  std::string available;
  for (const auto& h : header) available += (available.empty() ? "" : ", ") + h;
  throw ConfigError("column '" + name + "' not found in header (available: " + available + ")");
}

void normalize_in_place(PanelDataset& panel) {
  const std::size_t n_countries = panel.countries.size();
  const std::size_t n_years = panel.years.size();
  panel.normalized.assign(n_countries, std::vector<double>(n_years, 0.0));
  for (std::size_t t = 0; t < n_years; ++t) {
    double mean = 0.0;
    for (std::size_t c = 0; c < n_countries; ++c) mean += panel.values[c][t];
    mean /= static_cast<double>(n_countries);
    if (!(mean > 0.0)) throw DataError("nonpositive cross-sectional mean in year " + std::to_string(panel.years[t]));
    for (std::size_t c = 0; c < n_countries; ++c) panel.normalized[c][t] = panel.values[c][t] / mean;
  }
}

}  // namespace

int PanelDataset::year_index(int year) const {
  if (!has_year(year))
    throw DataError("year " + std::to_string(year) + " outside panel range " +
                    std::to_string(years.front()) + ".." + std::to_string(years.back()));
  return year - years.front();
}

bool PanelDataset::has_year(int year) const {
  return !years.empty() && year >= years.front() && year <= years.back();
}

std::vector<double> TransitionSample::xs() const {
  std::vector<double> v(tuples.size());
  for (std::size_t i = 0; i < tuples.size(); ++i) v[i] = tuples[i][0];
  return v;
}

std::vector<double> TransitionSample::ys() const {
  std::vector<double> v(tuples.size());
  for (std::size_t i = 0; i < tuples.size(); ++i) v[i] = tuples[i][1];
  return v;
}

std::vector<double> TransitionSample::zs() const {
  if (arity != 3) throw DataError("third tuple element requested from an arity-2 sample");
  std::vector<double> v(tuples.size());
  for (std::size_t i = 0; i < tuples.size(); ++i) v[i] = tuples[i][2];
  return v;
}

PanelDataset load_panel(std::istream& source, const PanelColumns& columns) {
  std::string header_line;
  if (!std::getline(source, header_line)) throw DataError("empty input: no header row");
  // strip a UTF-8 byte-order mark if present
  if (header_line.size() >= 3 && header_line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    header_line.erase(0, 3);

  char delim = sniff_delimiter(header_line);
  auto header = split_fields(header_line, delim);
  std::size_t id_col = find_column(header, columns.id);
  std::size_t year_col = find_column(header, columns.year);
  std::size_t value_col = find_column(header, columns.value);

  std::map<std::string, std::map<int, double>> by_country;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line, delim);
    std::size_t needed = std::max({id_col, year_col, value_col}) + 1;
    if (fields.size() < needed)
      throw DataError("line " + std::to_string(line_no) + ": expected at least " +
                      std::to_string(needed) + " fields, got " + std::to_string(fields.size()));
    const std::string& id = fields[id_col];
    if (id.empty()) throw DataError("line " + std::to_string(line_no) + ": empty country identifier");
    int year = 0;
    double value = 0.0;
    try {
      year = std::stoi(fields[year_col]);
      value = std::stod(fields[value_col]);
    } catch (const std::exception&) {
      throw DataError("line " + std::to_string(line_no) + ": could not parse year '" +
                      fields[year_col] + "' / value '" + fields[value_col] + "'");
    }
    if (!(value > 0.0) || !std::isfinite(value))
      throw DataError("line " + std::to_string(line_no) + ": nonpositive value " +
                      fields[value_col] + " for " + id + "/" + std::to_string(year));
    auto [it, inserted] = by_country[id].emplace(year, value);
    if (!inserted)
      throw DataError("duplicate observation for " + id + "/" + std::to_string(year));
  }

  if (by_country.size() < 2) throw DataError("panel needs at least 2 countries");

  // Years kept = intersection of the year sets across countries.
  std::set<int> kept;
  bool first = true;
  for (const auto& [id, series] : by_country) {
    std::set<int> here;
    for (const auto& [year, value] : series) here.insert(year);
    if (first) {
      kept = std::move(here);
      first = false;
    } else {
      std::set<int> merged;
      std::set_intersection(kept.begin(), kept.end(), here.begin(), here.end(),
                            std::inserter(merged, merged.begin()));
      kept = std::move(merged);
    }
  }
  if (kept.size() < 2) throw DataError("panel needs at least 2 common years across countries");

  // The intersection must be contiguous: a country missing an interior year
  // punches a hole that cannot be balanced away.
  for (int year = *kept.begin(); year <= *kept.rbegin(); ++year) {
    if (kept.count(year)) continue;
    for (const auto& [id, series] : by_country) {
      if (!series.count(year))
        throw DataError("unbalanced panel: country " + id + " is missing interior year " +
                        std::to_string(year));
    }
  }

  PanelDataset panel;
  for (const auto& [id, series] : by_country) panel.countries.push_back(id);
  panel.years.assign(kept.begin(), kept.end());
  panel.values.assign(panel.countries.size(), std::vector<double>(panel.years.size(), 0.0));
  for (std::size_t c = 0; c < panel.countries.size(); ++c) {
    const auto& series = by_country.at(panel.countries[c]);
    for (std::size_t t = 0; t < panel.years.size(); ++t)
      panel.values[c][t] = series.at(panel.years[t]);
  }
  normalize_in_place(panel);
  return panel;
}

PanelDataset load_panel_file(const std::string& path, const PanelColumns& columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);
  return load_panel(in, columns);
}

PanelDataset make_panel(std::vector<std::string> countries, std::vector<int> years,
                        std::vector<std::vector<double>> values) {
  if (countries.empty() || years.empty()) throw DataError("panel needs countries and years");
  for (std::size_t t = 1; t < years.size(); ++t)
    if (years[t] != years[t - 1] + 1) throw DataError("panel years must be contiguous");
  if (values.size() != countries.size()) throw DataError("values row count must match countries");
  for (const auto& row : values) {
    if (row.size() != years.size()) throw DataError("values column count must match years");
    for (double v : row)
      if (!(v > 0.0)) throw DataError("panel values must be strictly positive");
  }
  PanelDataset panel;
  panel.countries = std::move(countries);
  panel.years = std::move(years);
  panel.values = std::move(values);
  normalize_in_place(panel);
  return panel;
}

namespace {

std::vector<std::size_t> country_indices(const PanelDataset& panel,
                                         const std::vector<std::string>& only) {
  std::vector<std::size_t> idx;
  if (only.empty()) {
    idx.resize(panel.countries.size());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  }
  std::set<std::string> wanted(only.begin(), only.end());
  for (std::size_t c = 0; c < panel.countries.size(); ++c)
    if (wanted.count(panel.countries[c])) {
      idx.push_back(c);
      wanted.erase(panel.countries[c]);
    }
  if (!wanted.empty()) throw DataError("unknown country in filter: " + *wanted.begin());
  return idx;
}

}  // namespace

TransitionSample make_transitions(const PanelDataset& panel, int start_year, int tau, int arity,
                                  const std::vector<std::string>& only_countries) {
  if (arity != 2 && arity != 3) throw ConfigError("transition arity must be 2 or 3");
  if (tau < 1) throw ConfigError("transition length must be positive");
  int span = tau * (arity - 1);
  int last_admissible = panel.years.back() - span;
  if (start_year < panel.years.front() || start_year > last_admissible)
    throw DataError("transition horizon exceeds panel range: last admissible start year is " +
                    std::to_string(last_admissible));

  int t0 = panel.year_index(start_year);
  int t1 = panel.year_index(start_year + tau);
  int t2 = arity == 3 ? panel.year_index(start_year + 2 * tau) : 0;

  TransitionSample sample;
  sample.tau = tau;
  sample.arity = arity;
  for (std::size_t c : country_indices(panel, only_countries)) {
    std::array<double, 3> tuple{panel.normalized[c][t0], panel.normalized[c][t1], 0.0};
    if (arity == 3) tuple[2] = panel.normalized[c][t2];
    sample.tuples.push_back(tuple);
    sample.labels.push_back({panel.countries[c], start_year});
  }
  if (sample.tuples.size() < 2) throw DataError("transition sample needs at least 2 tuples");
  return sample;
}

TransitionSample pool_overlapping(const PanelDataset& panel, int first_start, int last_start,
                                  int tau, int arity,
                                  const std::vector<std::string>& only_countries) {
  if (first_start > last_start) throw ConfigError("pooling range is empty");
  TransitionSample pooled;
  for (int start = first_start; start <= last_start; ++start) {
    TransitionSample one = make_transitions(panel, start, tau, arity, only_countries);
    if (start == first_start) {
      pooled = std::move(one);
    } else {
      pooled.tuples.insert(pooled.tuples.end(), one.tuples.begin(), one.tuples.end());
      pooled.labels.insert(pooled.labels.end(), one.labels.begin(), one.labels.end());
    }
  }
  return pooled;
}

IncomeGroups split_by_initial_income(const PanelDataset& panel, int base_year) {
  int t = panel.year_index(base_year);
  std::vector<std::pair<double, std::string>> ranked;
  for (std::size_t c = 0; c < panel.countries.size(); ++c)
    ranked.emplace_back(panel.normalized[c][t], panel.countries[c]);
  std::sort(ranked.begin(), ranked.end());  // value, then identifier on ties

  std::size_t n = ranked.size();
  std::size_t third = n / 3;
  std::size_t middle = third + n % 3;  // remainder joins the middle group

  IncomeGroups groups;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < third)
      groups.low.push_back(ranked[i].second);
    else if (i < third + middle)
      groups.medium.push_back(ranked[i].second);
    else
      groups.high.push_back(ranked[i].second);
  }
  return groups;
}

double empirical_quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw DataError("quantile of an empty sample");
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantile probability must lie strictly in (0,1)");
  std::sort(sample.begin(), sample.end());
  double h = (static_cast<double>(sample.size()) - 1.0) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sample.size()) return sample.back();
  return sample[lo] + frac * (sample[lo + 1] - sample[lo]);
}

std::vector<std::vector<double>> quantile_boundaries(const PanelDataset& panel,
                                                     const std::vector<double>& probabilities) {
  if (probabilities.empty()) throw ConfigError("quantile boundaries need at least one probability");
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    if (!(probabilities[k] > 0.0 && probabilities[k] < 1.0))
      throw ConfigError("quantile probabilities must lie strictly in (0,1)");
    if (k > 0 && probabilities[k] <= probabilities[k - 1])
      throw ConfigError("quantile probabilities must be strictly increasing");
  }
  std::vector<std::vector<double>> out(panel.years.size(),
                                       std::vector<double>(probabilities.size(), 0.0));
  for (std::size_t t = 0; t < panel.years.size(); ++t) {
    std::vector<double> cross(panel.countries.size());
    for (std::size_t c = 0; c < panel.countries.size(); ++c) cross[c] = panel.normalized[c][t];
    for (std::size_t k = 0; k < probabilities.size(); ++k)
      out[t][k] = empirical_quantile(cross, probabilities[k]);
  }
  return out;
}

}  // namespace distdyn
