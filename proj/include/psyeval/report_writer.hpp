#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "psyeval/report.hpp"

namespace psyeval {

// Sorted keys, two-space indent, doubles as %.6g with -0 printed as 0.
// Non-finite doubles are written as {"undefined": "non-finite"}.
std::string canonical_json(const nlohmann::json& value);

// Number with 6 significant digits, the format used in every output file.
std::string format_number(double v);

nlohmann::json to_json(const Metric& m);
nlohmann::json report_to_json(const ComparisonReport& report);

struct ReportFormats {
  bool json = true;
  bool csv = true;
};
// Accepts "json", "csv" or a comma-separated combination. Throws UsageError.
ReportFormats parse_formats(const std::string& text);

// Writes report.json and/or the CSV tables. Returns the file names written.
// Throws IoError.
std::vector<std::string> emit_report(const ComparisonReport& report, const ReportFormats& formats,
                                     const std::string& out_dir);

struct RunManifest {
  std::string command;
  std::string scale;  // name and version of the scale used
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> seeds;
  std::vector<std::string> warnings;
  std::vector<std::string> files;
};

// 16 hex digits of FNV-1a over the canonical config.
std::string config_hash(const nlohmann::json& config);

// manifest.json in out_dir. Throws IoError.
void write_manifest(const RunManifest& manifest, const std::string& out_dir);

}  // namespace psyeval
