// Batch front end: load a panel, estimate densities and transition kernels,
// run the bootstrap specification tests and ergodic analyses, and drive the
// simulation size/power studies. Every run writes its resolved configuration
// and a checksum manifest next to its outputs so reruns can be verified
// byte-for-byte.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distdyn/divergence.hpp"
#include "distdyn/dynamics.hpp"
#include "distdyn/errors.hpp"
#include "distdyn/hypothesis.hpp"
#include "distdyn/io.hpp"
#include "distdyn/kde.hpp"
#include "distdyn/montecarlo.hpp"
#include "distdyn/panel.hpp"
#include "distdyn/parallel.hpp"
#include "distdyn/rng.hpp"

namespace {

constexpr const char* kFormatVersion = "distdyn-output/1";

using distdyn::ConfigError;
using distdyn::DataError;
using distdyn::Metric;

std::vector<int> parse_int_list(const std::vector<std::string>& items) {
  std::vector<int> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      try {
        out.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ConfigError("could not parse integer '" + tok + "'");
      }
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("could not parse number '" + tok + "'");
      }
    }
  }
  return out;
}

std::vector<Metric> resolve_metrics(std::vector<std::string> names) {
  if (names.empty()) names = {"L1", "H"};
  std::vector<Metric> metrics;
  for (const auto& n : names) metrics.push_back(distdyn::parse_metric(n));
  return metrics;
}

std::string period_label(int start, int tau) {
  return std::to_string(start) + "-" + std::to_string(start + tau);
}

// Transition start years implied by the panel range: step by tau from the
// first year while a full transition fits; --overlap-last appends the start
// of the final fully-contained transition even though it overlaps the
// previous one.
std::vector<int> derive_starts(const distdyn::PanelDataset& panel, int tau, int horizon,
                               bool overlap_last) {
  std::vector<int> starts;
  for (int s = panel.years.front(); s + horizon <= panel.years.back(); s += horizon)
    starts.push_back(s);
  if (overlap_last) {
    int s = panel.years.back() - horizon;
    if (starts.empty() || s > starts.back()) starts.push_back(s);
  }
  if (starts.empty())
    throw DataError("panel too short for transitions of length " + std::to_string(horizon));
  return starts;
}

std::vector<std::string> resolve_subsample(const distdyn::PanelDataset& panel,
                                           const std::string& which, int base_year) {
  if (which.empty()) return {};
  distdyn::IncomeGroups groups =
      distdyn::split_by_initial_income(panel, base_year == 0 ? panel.years.front() : base_year);
  if (which == "low") return groups.low;
  if (which == "medium") return groups.medium;
  if (which == "high") return groups.high;
  throw ConfigError("unknown subsample '" + which + "' (expected low, medium, or high)");
}

struct PanelOpts {
  std::string input;
  std::string id_column = "country";
  std::string year_column = "year";
  std::string value_column = "value";
  std::string subsample;
  int base_year = 0;

  void attach(CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--input", input, "panel CSV/TSV with country, year, value");
    if (required) opt->required();
    cmd->add_option("--id-column", id_column, "country identifier column name");
    cmd->add_option("--year-column", year_column, "year column name");
    cmd->add_option("--value-column", value_column, "value column name");
    cmd->add_option("--subsample", subsample,
                    "restrict to an initial-income tercile: low, medium, or high");
    cmd->add_option("--base-year", base_year,
                    "year used for the tercile split (default: first panel year)");
  }

  distdyn::PanelDataset load() const {
    distdyn::PanelColumns cols{id_column, year_column, value_column};
    return distdyn::load_panel_file(input, cols);
  }
};

nlohmann::json panel_json(const PanelOpts& opts) {
  return {{"input", opts.input},
          {"id_column", opts.id_column},
          {"year_column", opts.year_column},
          {"value_column", opts.value_column},
          {"subsample", opts.subsample},
          {"base_year", opts.base_year}};
}

nlohmann::json est_json(const distdyn::EstimationConfig& est) {
  return {{"grid_x", distdyn::grid_json(est.grid_x)},
          {"grid_y", distdyn::grid_json(est.grid_y)},
          {"alpha", est.alpha},
          {"cond_floor", est.cond_floor}};
}

void apply_workers(int workers) {
  if (workers > 0) distdyn::set_workers(workers);
}

// ---------------------------------------------------------------------------
// describe

struct DescribeOpts {
  PanelOpts panel;
  std::string out;
  std::string grid_spec = "-1:4:100";
  double alpha = 0.5;
  std::vector<std::string> year_items;
  std::vector<std::string> prob_items;
  int workers = 0;
};

void run_describe(const DescribeOpts& o, CLI::App* cmd) {
  apply_workers(o.workers);
  distdyn::PanelDataset panel = o.panel.load();
  auto only = resolve_subsample(panel, o.panel.subsample, o.panel.base_year);

  std::vector<int> years = parse_int_list(o.year_items);
  std::vector<double> probs = parse_double_list(o.prob_items);
  if (probs.empty()) probs = {0.2, 0.4, 0.6, 0.8};
  distdyn::Grid1D grid = distdyn::parse_grid_spec(o.grid_spec);

  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < panel.countries.size(); ++c)
    if (only.empty() ||
        std::find(only.begin(), only.end(), panel.countries[c]) != only.end())
      keep.push_back(c);

  distdyn::OutputWriter out(o.out);

  // quantile boundaries of the (possibly restricted) cross-sections
  {
    std::vector<std::vector<double>> bounds(panel.years.size(),
                                            std::vector<double>(probs.size(), 0.0));
    for (std::size_t t = 0; t < panel.years.size(); ++t) {
      std::vector<double> cross;
      for (std::size_t c : keep) cross.push_back(panel.normalized[c][t]);
      for (std::size_t k = 0; k < probs.size(); ++k)
        bounds[t][k] = distdyn::empirical_quantile(cross, probs[k]);
    }
    out.write("boundaries.csv", distdyn::boundaries_csv(panel.years, probs, bounds));
  }

  nlohmann::json density_meta = nlohmann::json::object();
  for (int year : years) {
    int t = panel.year_index(year);
    std::vector<double> cross;
    for (std::size_t c : keep) cross.push_back(panel.normalized[c][t]);
    distdyn::DensityEstimate1D est = distdyn::adaptive_density(cross, grid, o.alpha);
    out.write("density_" + std::to_string(year) + ".csv", distdyn::density_csv(est.density));
    density_meta[std::to_string(year)] = distdyn::bandwidth_json(est.bandwidth);
  }
  out.write_json("densities.json", density_meta);

  out.write("resolved_config.ini", cmd->config_to_str(true, true));
  out.finalize({{"format_version", kFormatVersion},
                {"command", "describe"},
                {"panel", panel_json(o.panel)},
                {"grid", o.grid_spec},
                {"alpha", o.alpha},
                {"years", years},
                {"probabilities", probs}});
}

// ---------------------------------------------------------------------------
// test-homogeneity / test-order

struct TestOpts {
  PanelOpts panel;
  std::string out;
  std::string grid_spec = "-1:4:100";
  double alpha = 0.5;
  int tau = 5;
  std::vector<std::string> period_items;
  bool overlap_last = false;
  bool pool = false;
  std::vector<std::string> metric_names;
  int bootstrap = 1000;
  std::uint64_t seed = 12345;
  bool draws = false;
  std::string weight = "first";
  int workers = 0;
  // synthetic generators (used instead of --input when n > 0)
  int synthetic_n = 0;
  double synthetic_rho = 0.0;
  double synthetic_theta = 0.0;
  double synthetic_rho1 = 0.0;
  double synthetic_rho2 = 0.0;
  double synthetic_sigma = 0.15;
};

distdyn::TestConfig make_test_config(const TestOpts& o, bool user_grid, double default_halfwidth) {
  distdyn::TestConfig tc;
  if (!user_grid && o.synthetic_n > 0) {
    tc.estimation.grid_x = distdyn::Grid1D::linspace(-default_halfwidth, default_halfwidth, 40);
    tc.estimation.grid_y = tc.estimation.grid_x;
  } else {
    tc.estimation.grid_x = distdyn::parse_grid_spec(o.grid_spec);
    tc.estimation.grid_y = tc.estimation.grid_x;
  }
  tc.estimation.alpha = o.alpha;
  tc.replications = o.bootstrap;
  if (o.weight == "first")
    tc.weight = distdyn::HomogeneityWeight::first_period;
  else if (o.weight == "pooled")
    tc.weight = distdyn::HomogeneityWeight::pooled;
  else
    throw ConfigError("unknown homogeneity weight '" + o.weight + "' (expected first or pooled)");
  return tc;
}

void attach_test_options(CLI::App* cmd, TestOpts& o, bool order) {
  o.panel.attach(cmd, /*required=*/false);
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--grid", o.grid_spec, "evaluation grid lo:hi:m");
  cmd->add_option("--alpha", o.alpha, "adaptive sensitivity (0 = standard estimator)");
  cmd->add_option("--tau", o.tau, "transition length in years");
  cmd->add_option("--periods", o.period_items,
                  "comma-separated transition start years (default: derived from panel)");
  cmd->add_flag("--overlap-last", o.overlap_last,
                "also include the last fully-contained transition period");
  cmd->add_option("--metric", o.metric_names, "divergence metric (repeatable; default L1,H)");
  cmd->add_option("--bootstrap", o.bootstrap, "bootstrap replications");
  cmd->add_option("--seed", o.seed, "master RNG seed");
  cmd->add_flag("--draws", o.draws, "include full bootstrap draw vectors in result JSON");
  cmd->add_option("--workers", o.workers, "worker threads (default: all available)");
  if (order) {
    cmd->add_flag("--pool", o.pool, "pool overlapping start years (--periods first,last)");
    cmd->add_option("--synthetic-rho1", o.synthetic_rho1, "synthetic AR(2) first coefficient");
    cmd->add_option("--synthetic-rho2", o.synthetic_rho2, "synthetic AR(2) second coefficient");
  } else {
    cmd->add_option("--weight", o.weight, "divergence weight: first (period) or pooled");
    cmd->add_option("--synthetic-rho", o.synthetic_rho, "synthetic AR(1) coefficient");
    cmd->add_option("--synthetic-theta", o.synthetic_theta, "synthetic break magnitude");
  }
  cmd->add_option("--synthetic-n", o.synthetic_n,
                  "generate a synthetic sample of this size instead of reading --input");
  cmd->add_option("--synthetic-sigma", o.synthetic_sigma, "synthetic innovation scale");
}

void run_test_homogeneity(const TestOpts& o, CLI::App* cmd) {
  apply_workers(o.workers);
  auto metrics = resolve_metrics(o.metric_names);
  distdyn::RngStream master(o.seed);
  distdyn::OutputWriter out(o.out);

  std::string summary = distdyn::test_summary_csv_header();
  nlohmann::json resolved{{"format_version", kFormatVersion},
                          {"command", "test-homogeneity"},
                          {"tau", o.tau},
                          {"bootstrap", o.bootstrap},
                          {"seed", o.seed},
                          {"weight", o.weight}};

  if (o.synthetic_n > 0) {
    double hw = distdyn::mc_grid_halfwidth(o.synthetic_rho + o.synthetic_theta, o.synthetic_sigma);
    distdyn::TestConfig tc = make_test_config(o, cmd->count("--grid") > 0, hw);
    distdyn::HomogeneityDgp dgp{o.synthetic_rho, o.synthetic_theta, o.synthetic_sigma,
                                o.synthetic_n, 100};
    distdyn::RngStream sim = master.substream(0);
    auto [first, second] = distdyn::simulate_homogeneity(dgp, sim);
    auto results = distdyn::test_homogeneity(first, second, metrics, tc, master.substream(1));
    for (const auto& r : results) {
      summary += distdyn::test_summary_csv_row(r, "synthetic");
      out.write_json("result_synthetic_" + distdyn::metric_name(r.metric) + ".json",
                     distdyn::test_result_json(r, o.draws));
    }
    resolved["synthetic"] = {{"rho", o.synthetic_rho},
                             {"theta", o.synthetic_theta},
                             {"n", o.synthetic_n},
                             {"sigma", o.synthetic_sigma}};
    resolved["estimation"] = est_json(tc.estimation);
  } else {
    if (o.panel.input.empty())
      throw ConfigError("either --input or --synthetic-n is required");
    distdyn::PanelDataset panel = o.panel.load();
    auto only = resolve_subsample(panel, o.panel.subsample, o.panel.base_year);
    distdyn::TestConfig tc = make_test_config(o, true, 0.0);

    std::vector<int> starts = parse_int_list(o.period_items);
    if (starts.empty()) starts = derive_starts(panel, o.tau, o.tau, o.overlap_last);
    if (starts.size() < 2)
      throw ConfigError("homogeneity comparison needs at least two transition periods");

    // upper-triangular ASL matrix per metric, mirroring the period-pair table
    std::vector<std::vector<std::vector<double>>> asl(
        metrics.size(), std::vector<std::vector<double>>(
                            starts.size(), std::vector<double>(starts.size(), -1.0)));
    std::uint64_t pair_index = 0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      for (std::size_t j = i + 1; j < starts.size(); ++j, ++pair_index) {
        auto first = distdyn::make_transitions(panel, starts[i], o.tau, 2, only);
        auto second = distdyn::make_transitions(panel, starts[j], o.tau, 2, only);
        auto results = distdyn::test_homogeneity(first, second, metrics, tc,
                                                 master.substream(pair_index));
        std::string label = period_label(starts[i], o.tau) + "_vs_" + period_label(starts[j], o.tau);
        for (std::size_t k = 0; k < results.size(); ++k) {
          asl[k][i][j] = results[k].asl;
          summary += distdyn::test_summary_csv_row(results[k], label);
          if (o.draws)
            out.write_json("result_" + label + "_" + distdyn::metric_name(results[k].metric) +
                               ".json",
                           distdyn::test_result_json(results[k], true));
        }
      }
    }
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      std::string csv = "period";
      for (int s : starts) csv += "," + period_label(s, o.tau);
      csv += "\n";
      for (std::size_t i = 0; i < starts.size(); ++i) {
        csv += period_label(starts[i], o.tau);
        for (std::size_t j = 0; j < starts.size(); ++j) {
          csv += ",";
          if (asl[k][i][j] >= 0.0) csv += distdyn::format_double(asl[k][i][j]);
        }
        csv += "\n";
      }
      out.write("asl_" + distdyn::metric_name(metrics[k]) + ".csv", csv);
    }
    nlohmann::json speriods = nlohmann::json::array();
    for (int s : starts) speriods.push_back(s);
    resolved["panel"] = panel_json(o.panel);
    resolved["periods"] = speriods;
    resolved["estimation"] = est_json(tc.estimation);
  }

  out.write("summary.csv", summary);
  out.write("resolved_config.ini", cmd->config_to_str(true, true));
  out.finalize(resolved);
}

void run_test_order(const TestOpts& o, CLI::App* cmd) {
  apply_workers(o.workers);
  auto metrics = resolve_metrics(o.metric_names);
  distdyn::RngStream master(o.seed);
  distdyn::OutputWriter out(o.out);

  std::string summary = distdyn::test_summary_csv_header();
  nlohmann::json resolved{{"format_version", kFormatVersion},
                          {"command", "test-order"},
                          {"tau", o.tau},
                          {"bootstrap", o.bootstrap},
                          {"seed", o.seed}};

  struct Job {
    std::string label;
    distdyn::TransitionSample sample;
  };
  std::vector<Job> jobs;
  distdyn::TestConfig tc;

  if (o.synthetic_n > 0) {
    double hw = distdyn::mc_grid_halfwidth(o.synthetic_rho1 + o.synthetic_rho2, o.synthetic_sigma);
    tc = make_test_config(o, cmd->count("--grid") > 0, hw);
    distdyn::OrderDgp dgp{o.synthetic_rho1, o.synthetic_rho2, o.synthetic_sigma, o.synthetic_n,
                          100};
    distdyn::RngStream sim = master.substream(0);
    jobs.push_back({"synthetic", distdyn::simulate_order(dgp, sim)});
    resolved["synthetic"] = {{"rho1", o.synthetic_rho1},
                             {"rho2", o.synthetic_rho2},
                             {"n", o.synthetic_n},
                             {"sigma", o.synthetic_sigma}};
  } else {
    if (o.panel.input.empty())
      throw ConfigError("either --input or --synthetic-n is required");
    distdyn::PanelDataset panel = o.panel.load();
    auto only = resolve_subsample(panel, o.panel.subsample, o.panel.base_year);
    tc = make_test_config(o, true, 0.0);

    std::vector<int> starts = parse_int_list(o.period_items);
    if (o.pool) {
      if (starts.size() != 2)
        throw ConfigError("--pool needs --periods first,last (two start years)");
      auto sample = distdyn::pool_overlapping(panel, starts[0], starts[1], o.tau, 3, only);
      jobs.push_back({"pooled-" + std::to_string(starts[0]) + "-" +
                          std::to_string(starts[1] + 2 * o.tau),
                      std::move(sample)});
    } else {
      if (starts.empty()) starts = derive_starts(panel, o.tau, 2 * o.tau, o.overlap_last);
      for (int s : starts)
        jobs.push_back({std::to_string(s) + "-" + std::to_string(s + 2 * o.tau),
                        distdyn::make_transitions(panel, s, o.tau, 3, only)});
    }
    resolved["panel"] = panel_json(o.panel);
    resolved["pool"] = o.pool;
  }
  resolved["estimation"] = est_json(tc.estimation);

  std::uint64_t job_index = o.synthetic_n > 0 ? 1 : 0;
  for (const Job& job : jobs) {
    auto results = distdyn::test_first_order(job.sample, metrics, tc, master.substream(job_index));
    ++job_index;
    for (const auto& r : results) {
      summary += distdyn::test_summary_csv_row(r, job.label);
      out.write_json("result_" + job.label + "_" + distdyn::metric_name(r.metric) + ".json",
                     distdyn::test_result_json(r, o.draws));
    }
  }

  out.write("summary.csv", summary);
  out.write("resolved_config.ini", cmd->config_to_str(true, true));
  out.finalize(resolved);
}

// ---------------------------------------------------------------------------
// ergodic

struct ErgodicOpts {
  PanelOpts panel;
  std::string out;
  std::string grid_spec = "-1:4:100";
  double alpha = 0.5;
  int tau = 5;
  std::vector<std::string> period_items;
  bool overlap_last = false;
  bool pool = false;
  int bands = 0;
  double coverage = 0.9;
  std::uint64_t seed = 12345;
  int workers = 0;
};

void run_ergodic(const ErgodicOpts& o, CLI::App* cmd) {
  apply_workers(o.workers);
  distdyn::PanelDataset panel = o.panel.load();
  auto only = resolve_subsample(panel, o.panel.subsample, o.panel.base_year);
  distdyn::RngStream master(o.seed);
  distdyn::OutputWriter out(o.out);

  distdyn::EstimationConfig est;
  est.grid_x = distdyn::parse_grid_spec(o.grid_spec);
  est.grid_y = est.grid_x;
  est.alpha = o.alpha;

  struct Job {
    std::string label;
    distdyn::TransitionSample sample;
  };
  std::vector<Job> jobs;
  std::vector<int> starts = parse_int_list(o.period_items);
  if (o.pool) {
    if (starts.size() != 2)
      throw ConfigError("--pool needs --periods first,last (two start years)");
    jobs.push_back({"pooled-" + std::to_string(starts[0]) + "-" +
                        std::to_string(starts[1] + o.tau),
                    distdyn::pool_overlapping(panel, starts[0], starts[1], o.tau, 2, only)});
  } else {
    if (starts.empty()) starts = derive_starts(panel, o.tau, o.tau, o.overlap_last);
    for (int s : starts)
      jobs.push_back({period_label(s, o.tau), distdyn::make_transitions(panel, s, o.tau, 2, only)});
  }

  nlohmann::json meta = nlohmann::json::object();
  std::uint64_t job_index = 0;
  for (const Job& job : jobs) {
    auto xs = job.sample.xs();
    auto ys = job.sample.ys();
    distdyn::ConditionalEstimate ce = distdyn::estimate_conditional(xs, ys, est);
    distdyn::ErgodicResult er;
    if (o.bands > 0) {
      distdyn::ErgodicBandConfig band;
      band.replications = o.bands;
      band.coverage = o.coverage;
      er = distdyn::ergodic_bands(job.sample, est, band, master.substream(job_index));
    } else {
      er = distdyn::ergodic(ce.conditional);
    }
    ++job_index;
    out.write("ergodic_" + job.label + ".csv", distdyn::ergodic_csv(er));
    out.write("kernel_" + job.label + ".csv", distdyn::kernel_csv(ce.conditional));
    out.write_json("kernel_" + job.label + ".json",
                   distdyn::kernel_meta_json(ce.conditional, ce.bandwidth));
    meta[job.label] = {{"n", job.sample.size()},
                       {"iterations", er.iterations},
                       {"residual", er.residual},
                       {"converged", er.converged},
                       {"bands", o.bands},
                       {"coverage", o.coverage}};
  }
  out.write_json("ergodic_meta.json", meta);

  out.write("resolved_config.ini", cmd->config_to_str(true, true));
  nlohmann::json speriods = nlohmann::json::array();
  for (const Job& job : jobs) speriods.push_back(job.label);
  out.finalize({{"format_version", kFormatVersion},
                {"command", "ergodic"},
                {"panel", panel_json(o.panel)},
                {"tau", o.tau},
                {"pool", o.pool},
                {"periods", speriods},
                {"bands", o.bands},
                {"coverage", o.coverage},
                {"seed", o.seed},
                {"estimation", est_json(est)}});
}

// ---------------------------------------------------------------------------
// montecarlo

struct MonteCarloOpts {
  std::string out;
  std::string study = "homogeneity";
  std::vector<std::string> a_items;  // rho or rho1
  std::vector<std::string> b_items;  // theta or rho2
  std::vector<std::string> n_items;
  std::vector<std::string> metric_names;
  std::string preset;
  int runs = 200;
  int bootstrap = 200;
  double nominal = 0.05;
  double sigma = 0.15;
  bool sigma_as_variance = false;
  int burn_in = 100;
  int grid_points = 40;
  double alpha = 0.0;
  std::uint64_t seed = 12345;
  int workers = 0;
};

void run_montecarlo(const MonteCarloOpts& o, CLI::App* cmd) {
  apply_workers(o.workers);
  distdyn::StudyConfig sc;
  sc.metrics = resolve_metrics(o.metric_names);
  sc.runs = o.runs;
  sc.bootstrap = o.bootstrap;
  if (o.preset == "desk") {
    sc.runs = 200;
    sc.bootstrap = 200;
  } else if (o.preset == "full") {
    sc.runs = 1000;
    sc.bootstrap = 1000;
  } else if (!o.preset.empty()) {
    throw ConfigError("unknown preset '" + o.preset + "' (expected desk or full)");
  }
  sc.nominal = o.nominal;
  sc.sigma_eps = o.sigma;
  sc.sigma_as_variance = o.sigma_as_variance;
  sc.burn_in = o.burn_in;
  sc.grid_points = o.grid_points;
  sc.alpha = o.alpha;

  distdyn::TestKind kind;
  std::vector<double> a_values = parse_double_list(o.a_items);
  std::vector<double> b_values = parse_double_list(o.b_items);
  if (o.study == "homogeneity") {
    kind = distdyn::TestKind::homogeneity;
    if (a_values.empty()) a_values = {0.05, 0.2, 0.5, 0.75};
    if (b_values.empty()) b_values = {0.0, 0.05, 0.15, 0.25, 0.5};
  } else if (o.study == "order") {
    kind = distdyn::TestKind::first_order;
    if (a_values.empty()) a_values = {0.2, 0.5, 0.75};
    if (b_values.empty()) b_values = {0.0, -0.1, -0.25};
  } else {
    throw ConfigError("unknown study '" + o.study + "' (expected homogeneity or order)");
  }
  std::vector<int> n_values = parse_int_list(o.n_items);
  if (n_values.empty()) n_values = {100};

  for (int n : n_values)
    for (double a : a_values)
      for (double b : b_values) sc.cells.push_back({kind, a, b, n});

  distdyn::PowerTable table = distdyn::run_power_study(sc, distdyn::RngStream(o.seed));

  distdyn::OutputWriter out(o.out);
  out.write("power.csv", distdyn::power_table_csv(table));
  out.write_json("power.json", distdyn::power_table_json(table));
  out.write("resolved_config.ini", cmd->config_to_str(true, true));

  nlohmann::json ja = nlohmann::json::array(), jb = nlohmann::json::array(),
                 jn = nlohmann::json::array(), jm = nlohmann::json::array();
  for (double a : a_values) ja.push_back(a);
  for (double b : b_values) jb.push_back(b);
  for (int n : n_values) jn.push_back(n);
  for (Metric m : sc.metrics) jm.push_back(distdyn::metric_name(m));
  out.finalize({{"format_version", kFormatVersion},
                {"command", "montecarlo"},
                {"study", o.study},
                {"a", ja},
                {"b", jb},
                {"n", jn},
                {"metrics", jm},
                {"runs", sc.runs},
                {"bootstrap", sc.bootstrap},
                {"nominal", sc.nominal},
                {"sigma", sc.sigma_eps},
                {"sigma_as_variance", sc.sigma_as_variance},
                {"burn_in", sc.burn_in},
                {"grid_points", sc.grid_points},
                {"alpha", sc.alpha},
                {"seed", o.seed}});
}

// ---------------------------------------------------------------------------
// selftest

int run_selftest(std::uint64_t seed) {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  };

  // reproducibility of the random stream
  {
    distdyn::RngStream a(seed), b(seed);
    bool ok = true;
    for (int i = 0; i < 1000; ++i)
      if (a.next_u64() != b.next_u64()) ok = false;
    report("rng determinism", ok, "");
  }

  // closed-form divergences between unit Gaussians shifted by one
  {
    distdyn::Grid1D g = distdyn::Grid1D::linspace(-6.0, 7.0, 201);
    auto gauss_rows = [&](double mu) {
      distdyn::KernelGrid2D k;
      k.grid_x = k.grid_y = g;
      k.kind = distdyn::KernelGrid2D::Kind::conditional;
      k.values.resize(static_cast<std::size_t>(g.m) * g.m);
      k.row_flag.assign(g.m, 0);
      for (int i = 0; i < g.m; ++i) {
        auto row = k.row(i);
        for (int j = 0; j < g.m; ++j) {
          double u = g.point(j) - mu;
          row[j] = std::exp(-0.5 * u * u) / std::sqrt(2.0 * 3.14159265358979323846);
        }
        double total = distdyn::trapezoid(row, g.step());
        for (auto& v : row) v /= total;
      }
      return k;
    };
    distdyn::KernelGrid2D f1 = gauss_rows(0.0), f2 = gauss_rows(1.0);
    distdyn::DensityGrid1D w = distdyn::uniform_density(g);
    auto vals = distdyn::divergence_all(f1, f2, {Metric::L1, Metric::Hellinger}, w);
    bool ok_l1 = std::abs(vals[0] - 0.7660) < 0.01;
    bool ok_h = std::abs(vals[1] - 0.3425) < 0.005;
    report("closed-form L1", ok_l1, "got " + distdyn::format_double(vals[0]));
    report("closed-form Hellinger", ok_h, "got " + distdyn::format_double(vals[1]));
  }

  // standard-vs-adaptive estimator agreement at alpha = 0
  {
    distdyn::RngStream rng(seed);
    std::vector<double> x(300), y(300);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.normal();
      y[i] = 0.5 * x[i] + 0.15 * rng.normal();
    }
    distdyn::Grid1D g = distdyn::Grid1D::linspace(-3.0, 3.0, 50);
    distdyn::BandwidthSpec bw = distdyn::optimal_bandwidth(x, y);
    distdyn::KernelGrid2D pilot = distdyn::pilot_density(x, y, g, g, bw);
    distdyn::JointEstimate adaptive = distdyn::adaptive_density(x, y, g, g, 0.0);
    report("alpha=0 reduces to the standard estimator", pilot.values == adaptive.joint.values, "");
  }

  // ergodic density of the analytic AR(1) kernel
  {
    const double rho = 0.5, sig = 0.15;
    const double sd = sig / std::sqrt(1.0 - rho * rho);
    distdyn::Grid1D g = distdyn::Grid1D::linspace(-3.0 * sd, 3.0 * sd, 100);
    distdyn::KernelGrid2D k;
    k.grid_x = k.grid_y = g;
    k.kind = distdyn::KernelGrid2D::Kind::conditional;
    k.values.resize(static_cast<std::size_t>(g.m) * g.m);
    k.row_flag.assign(g.m, 0);
    for (int i = 0; i < g.m; ++i) {
      auto row = k.row(i);
      for (int j = 0; j < g.m; ++j) {
        double u = (g.point(j) - rho * g.point(i)) / sig;
        row[j] = std::exp(-0.5 * u * u);
      }
      double total = distdyn::trapezoid(row, g.step());
      for (auto& v : row) v /= total;
    }
    distdyn::ErgodicResult er = distdyn::ergodic(k);
    double l1 = 0.0;
    std::vector<double> diff(g.m);
    for (int j = 0; j < g.m; ++j) {
      double u = g.point(j) / sd;
      double target = std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * 3.14159265358979323846));
      diff[j] = std::abs(er.density.values[j] - target);
    }
    l1 = distdyn::trapezoid(diff, g.step());
    report("ergodic density of analytic AR(1) kernel",
           er.converged && l1 < 0.02, "L1 " + distdyn::format_double(l1));
  }

  std::cout << (failures == 0 ? "selftest: all checks passed\n"
                              : "selftest: " + std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? 0 : distdyn::NumericError::exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distribution-dynamics toolkit: transition-kernel estimation, bootstrap "
               "specification tests, ergodic densities, and size/power studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "distdyn 1.0.0");

  DescribeOpts describe_opts;
  auto* describe = app.add_subcommand(
      "describe", "cross-sectional densities and quantile boundaries of a panel");
  describe->set_config("--config", "", "read options from an INI config file");
  describe_opts.panel.attach(describe, /*required=*/true);
  describe->add_option("--out", describe_opts.out, "output directory")->required();
  describe->add_option("--grid", describe_opts.grid_spec, "evaluation grid lo:hi:m");
  describe->add_option("--alpha", describe_opts.alpha, "adaptive sensitivity");
  describe->add_option("--years", describe_opts.year_items,
                       "comma-separated years to profile with a density estimate");
  describe->add_option("--probabilities", describe_opts.prob_items,
                       "comma-separated quantile probabilities (default 0.2,0.4,0.6,0.8)");
  describe->add_option("--workers", describe_opts.workers, "worker threads");

  TestOpts homog_opts;
  auto* homog = app.add_subcommand("test-homogeneity",
                                   "bootstrap test: is the transition kernel the same across "
                                   "two (or more) periods?");
  homog->set_config("--config", "", "read options from an INI config file");
  attach_test_options(homog, homog_opts, /*order=*/false);

  TestOpts order_opts;
  auto* order = app.add_subcommand(
      "test-order", "bootstrap test of the first-order (Markov) property via the "
                    "two-step kernel identity");
  order->set_config("--config", "", "read options from an INI config file");
  attach_test_options(order, order_opts, /*order=*/true);

  ErgodicOpts ergodic_opts;
  auto* ergodic_cmd =
      app.add_subcommand("ergodic", "long-run density implied by an estimated transition kernel");
  ergodic_cmd->set_config("--config", "", "read options from an INI config file");
  ergodic_opts.panel.attach(ergodic_cmd, /*required=*/true);
  ergodic_cmd->add_option("--out", ergodic_opts.out, "output directory")->required();
  ergodic_cmd->add_option("--grid", ergodic_opts.grid_spec, "evaluation grid lo:hi:m");
  ergodic_cmd->add_option("--alpha", ergodic_opts.alpha, "adaptive sensitivity");
  ergodic_cmd->add_option("--tau", ergodic_opts.tau, "transition length in years");
  ergodic_cmd->add_option("--periods", ergodic_opts.period_items,
                          "start years (or first,last with --pool)");
  ergodic_cmd->add_flag("--overlap-last", ergodic_opts.overlap_last,
                        "include the last fully-contained transition period");
  ergodic_cmd->add_flag("--pool", ergodic_opts.pool, "pool overlapping start years");
  ergodic_cmd->add_option("--bands", ergodic_opts.bands,
                          "bootstrap replications for confidence bands (0 = none)");
  ergodic_cmd->add_option("--coverage", ergodic_opts.coverage, "pointwise band coverage");
  ergodic_cmd->add_option("--seed", ergodic_opts.seed, "master RNG seed");
  ergodic_cmd->add_option("--workers", ergodic_opts.workers, "worker threads");

  MonteCarloOpts mc_opts;
  auto* mc = app.add_subcommand("montecarlo",
                                "simulation study of the tests' empirical size and power");
  mc->set_config("--config", "", "read options from an INI config file");
  mc->add_option("--out", mc_opts.out, "output directory")->required();
  mc->add_option("--study", mc_opts.study, "homogeneity or order");
  mc->add_option("--rho", mc_opts.a_items, "persistence values (homogeneity) / rho1 (order)");
  mc->add_option("--theta", mc_opts.b_items, "break magnitudes (homogeneity) / rho2 (order)");
  mc->add_option("--n", mc_opts.n_items, "cross-section sizes");
  mc->add_option("--metric", mc_opts.metric_names, "divergence metric (repeatable)");
  mc->add_option("--preset", mc_opts.preset, "desk (200 runs/200 bootstraps) or full (1000/1000)");
  mc->add_option("--runs", mc_opts.runs, "Monte Carlo iterations per cell");
  mc->add_option("--bootstrap", mc_opts.bootstrap, "bootstrap replications per iteration");
  mc->add_option("--nominal", mc_opts.nominal, "nominal test size");
  mc->add_option("--sigma", mc_opts.sigma, "innovation scale constant");
  mc->add_flag("--sigma-as-variance", mc_opts.sigma_as_variance,
               "interpret the innovation scale as a variance instead of a standard deviation");
  mc->add_option("--burn-in", mc_opts.burn_in, "discarded start-up periods");
  mc->add_option("--grid-points", mc_opts.grid_points, "evaluation grid points per axis");
  mc->add_option("--alpha", mc_opts.alpha, "adaptive sensitivity (default 0: standard estimator)");
  mc->add_option("--seed", mc_opts.seed, "master RNG seed");
  mc->add_option("--workers", mc_opts.workers, "worker threads");

  std::uint64_t selftest_seed = 12345;
  auto* selftest = app.add_subcommand("selftest", "quick built-in numerical checks");
  selftest->add_option("--seed", selftest_seed, "RNG seed for the checks");

  try {
    app.parse(argc, argv);
    if (*describe) run_describe(describe_opts, describe);
    if (*homog) run_test_homogeneity(homog_opts, homog);
    if (*order) run_test_order(order_opts, order);
    if (*ergodic_cmd) run_ergodic(ergodic_opts, ergodic_cmd);
    if (*mc) run_montecarlo(mc_opts, mc);
    if (*selftest) return run_selftest(selftest_seed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : distdyn::ConfigError::exit_code;
  } catch (const distdyn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return distdyn::ConfigError::exit_code;
  } catch (const distdyn::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return distdyn::DataError::exit_code;
  } catch (const distdyn::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return distdyn::NumericError::exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
