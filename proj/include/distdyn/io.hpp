#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "distdyn/dynamics.hpp"
#include "distdyn/format.hpp"
#include "distdyn/grid.hpp"
#include "distdyn/hypothesis.hpp"
#include "distdyn/kde.hpp"
#include "distdyn/montecarlo.hpp"

namespace distdyn {

std::string read_file(const std::filesystem::path& path);

// CSV/JSON emitters. Emitters return strings so callers can checksum before
// writing.
std::string density_csv(const DensityGrid1D& density);
std::string kernel_csv(const KernelGrid2D& kernel);  // long form: x,y,value
std::string ergodic_csv(const ErgodicResult& result);
std::string boundaries_csv(const std::vector<int>& years, const std::vector<double>& probabilities,
                           const std::vector<std::vector<double>>& boundaries);

nlohmann::json grid_json(const Grid1D& grid);
nlohmann::json bandwidth_json(const BandwidthSpec& bw);
nlohmann::json test_result_json(const TestResult& result, bool include_draws);
nlohmann::json power_table_json(const PowerTable& table);

// Metadata sidecar for a serialized kernel: grid specs, bandwidth, flags.
nlohmann::json kernel_meta_json(const KernelGrid2D& kernel, const BandwidthSpec& bw);

std::string test_summary_csv_header();
// One summary line: test,metric,label,n,B,observed,asl.
std::string test_summary_csv_row(const TestResult& result, const std::string& label);

std::string power_table_csv(const PowerTable& table);

// Collects output files for one CLI run, then writes the resolved config and
// a checksum manifest next to them.
class OutputWriter {
 public:
  explicit OutputWriter(std::filesystem::path dir);

  void write(const std::string& filename, const std::string& content);
  void write_json(const std::string& filename, const nlohmann::json& value);

  // Writes resolved_config.json (with format version and seed inside) and
  // manifest.json listing every written file's FNV-1a 64 checksum.
  void finalize(const nlohmann::json& resolved_config);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> checksums_;
};

}  // namespace distdyn
