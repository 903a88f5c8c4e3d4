#include "distdyn/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "distdyn/errors.hpp"

namespace distdyn {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string density_csv(const DensityGrid1D& density) {
  std::string out = "x,density\n";
  for (int i = 0; i < density.grid.m; ++i)
    out += format_double(density.grid.point(i)) + "," + format_double(density.values[i]) + "\n";
  return out;
}

std::string kernel_csv(const KernelGrid2D& kernel) {
  std::string out = "x,y,value\n";
  for (int i = 0; i < kernel.grid_x.m; ++i) {
    auto row = kernel.row(i);
    for (int j = 0; j < kernel.grid_y.m; ++j)
      out += format_double(kernel.grid_x.point(i)) + "," + format_double(kernel.grid_y.point(j)) +
             "," + format_double(row[j]) + "\n";
  }
  return out;
}

std::string ergodic_csv(const ErgodicResult& result) {
  std::string out = "x,density,band_lo,band_hi\n";
  for (int i = 0; i < result.density.grid.m; ++i) {
    out += format_double(result.density.grid.point(i)) + "," +
           format_double(result.density.values[i]) + ",";
    if (result.band_lo) out += format_double(result.band_lo->values[i]);
    out += ",";
    if (result.band_hi) out += format_double(result.band_hi->values[i]);
    out += "\n";
  }
  return out;
}

std::string boundaries_csv(const std::vector<int>& years, const std::vector<double>& probabilities,
                           const std::vector<std::vector<double>>& boundaries) {
  std::string out = "year";
  for (double p : probabilities) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), ",p%g", p * 100.0);
    out += buf;
  }
  out += "\n";
  for (std::size_t t = 0; t < years.size(); ++t) {
    out += std::to_string(years[t]);
    for (double v : boundaries[t]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

nlohmann::json grid_json(const Grid1D& grid) {
  return {{"lo", grid.lo}, {"hi", grid.hi}, {"points", grid.m}};
}

nlohmann::json bandwidth_json(const BandwidthSpec& bw) {
  return {{"h", bw.h},
          {"sigma_x", bw.sigma_x},
          {"sigma_y", bw.sigma_y},
          {"alpha", bw.alpha},
          {"observations", bw.lambdas.size()}};
}

nlohmann::json kernel_meta_json(const KernelGrid2D& kernel, const BandwidthSpec& bw) {
  std::vector<int> flagged;
  for (int i = 0; i < kernel.grid_x.m; ++i)
    if (kernel.flagged(i)) flagged.push_back(i);
  return {{"kind", kernel.kind == KernelGrid2D::Kind::joint ? "joint" : "conditional"},
          {"grid_x", grid_json(kernel.grid_x)},
          {"grid_y", grid_json(kernel.grid_y)},
          {"flagged_rows", flagged},
          {"bandwidth", bandwidth_json(bw)}};
}

nlohmann::json test_result_json(const TestResult& result, bool include_draws) {
  nlohmann::json j{{"test", test_kind_name(result.test_kind)},
                   {"metric", metric_name(result.metric)},
                   {"observed", result.observed},
                   {"asl", result.asl},
                   {"seed", result.seed},
                   {"replications", result.replications},
                   {"sample_sizes", result.sample_sizes},
                   {"config_digest", result.config_digest}};
  if (include_draws) j["bootstrap_draws"] = result.bootstrap_draws;
  return j;
}

nlohmann::json power_table_json(const PowerTable& table) {
  nlohmann::json cells = nlohmann::json::array();
  for (const PowerCell& c : table.cells) {
    cells.push_back({{"kind", test_kind_name(c.cell.kind)},
                     {"a", c.cell.a},
                     {"b", c.cell.b},
                     {"n", c.cell.n},
                     {"metric", metric_name(c.metric)},
                     {"rejection_rate", c.rejection_rate},
                     {"runs", c.runs},
                     {"failures", c.failures}});
  }
  return {{"nominal", table.nominal},
          {"runs", table.runs},
          {"bootstrap", table.bootstrap},
          {"seed", table.seed},
          {"cells", cells}};
}

std::string test_summary_csv_header() { return "test,metric,label,n,B,observed,asl\n"; }

std::string test_summary_csv_row(const TestResult& result, const std::string& label) {
  std::string sizes;
  for (std::size_t s : result.sample_sizes) {
    if (!sizes.empty()) sizes += "+";
    sizes += std::to_string(s);
  }
  return test_kind_name(result.test_kind) + "," + metric_name(result.metric) + "," + label + "," +
         sizes + "," + std::to_string(result.replications) + "," + format_double(result.observed) +
         "," + format_double(result.asl) + "\n";
}

std::string power_table_csv(const PowerTable& table) {
  // mirror the study-table layout: blocks by sample size and metric, one row
  // per first parameter, one column per second parameter
  std::vector<double> b_values;
  for (const PowerCell& c : table.cells)
    if (std::find(b_values.begin(), b_values.end(), c.cell.b) == b_values.end())
      b_values.push_back(c.cell.b);

  bool all_homogeneity = true, all_order = true;
  for (const PowerCell& c : table.cells) {
    all_homogeneity = all_homogeneity && c.cell.kind == TestKind::homogeneity;
    all_order = all_order && c.cell.kind == TestKind::first_order;
  }
  const std::string a_name = all_homogeneity ? "rho" : (all_order ? "rho1" : "a");
  const std::string b_name = all_homogeneity ? "theta" : (all_order ? "rho2" : "b");

  std::string out = "n,metric," + a_name;
  for (double b : b_values) out += "," + b_name + "=" + format_double(b);
  out += "\n";

  // preserve first-appearance order of (n, metric, a) row groups
  struct RowKey {
    int n;
    Metric metric;
    double a;
  };
  std::vector<RowKey> rows;
  auto have_row = [&](const RowKey& k) {
    return std::any_of(rows.begin(), rows.end(), [&](const RowKey& r) {
      return r.n == k.n && r.metric == k.metric && r.a == k.a;
    });
  };
  for (const PowerCell& c : table.cells) {
    RowKey key{c.cell.n, c.metric, c.cell.a};
    if (!have_row(key)) rows.push_back(key);
  }
  for (const RowKey& key : rows) {
    out += std::to_string(key.n) + "," + metric_name(key.metric) + "," + format_double(key.a);
    for (double b : b_values) {
      out += ",";
      for (const PowerCell& c : table.cells)
        if (c.cell.n == key.n && c.metric == key.metric && c.cell.a == key.a && c.cell.b == b) {
          out += format_double(c.rejection_rate);
          break;
        }
    }
    out += "\n";
  }
  return out;
}

OutputWriter::OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw DataError("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void OutputWriter::write(const std::string& filename, const std::string& content) {
  std::ofstream out(dir_ / filename, std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir_ / filename).string());
  out << content;
  if (!out) throw DataError("write failed for " + (dir_ / filename).string());
  checksums_[filename] = fnv1a64_hex(content);
}

void OutputWriter::write_json(const std::string& filename, const nlohmann::json& value) {
  write(filename, value.dump(2) + "\n");
}

void OutputWriter::finalize(const nlohmann::json& resolved_config) {
  write_json("resolved_config.json", resolved_config);
  nlohmann::json manifest{{"algorithm", "fnv1a64"}, {"files", checksums_}};
  std::ofstream out(dir_ / "manifest.json", std::ios::binary);
  if (!out) throw DataError("cannot write manifest in " + dir_.string());
  out << manifest.dump(2) << "\n";
}

}  // namespace distdyn
