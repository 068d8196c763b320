#pragma once

/// \file
/// File formats: datasheet spec files, measured-curve CSV, the benchmark
/// parameter table, and the JSON run report.
///
/// Temperatures are Celsius on disk and Kelvin in memory.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pvsdm/curve.hpp"
#include "pvsdm/model.hpp"
#include "pvsdm/solver.hpp"
#include "pvsdm/validation.hpp"

namespace pvsdm {

/// Celsius-to-Kelvin offset applied on ingestion. The reference datasets
/// and their published parameter sets were reduced with T = t + 273.
inline constexpr double kCelsiusOffset = 273.0;

double celsius_to_kelvin(double celsius);
double kelvin_to_celsius(double kelvin);

/// Flat `key = value` file with exactly the keys i_sc, v_oc, i_mpp, v_mpp,
/// p_mpp, n_series, temperature_celsius. '#' starts a comment line.
DatasheetSpec parse_spec(std::string_view text, const std::string& origin = "<spec>");
DatasheetSpec load_spec(const std::filesystem::path& path);
std::string format_spec(const DatasheetSpec& spec);

/// CSV with header `voltage_V,current_A`, preceded by `# key=value`
/// metadata comments (temperature_celsius, n_series, optional source).
/// Rows are sorted by voltage; repeated voltages are an error.
MeasuredCurve parse_measured_curve(std::string_view text, const std::string& origin = "<curve>");
MeasuredCurve load_measured_curve(const std::filesystem::path& path);

/// Benchmark table CSV, one published parameter set per row. Rows whose
/// `dataset` column differs from `dataset` are skipped when it is given.
std::vector<BenchmarkEntry> parse_benchmarks(std::string_view text,
                                             const std::optional<std::string>& dataset = {},
                                             const std::string& origin = "<benchmarks>");
std::vector<BenchmarkEntry> load_benchmarks(const std::filesystem::path& path,
                                            const std::optional<std::string>& dataset = {});

/// Inline `key=value,key=value` or a file of `key = value` lines. Keys
/// i_ph,i_s,n,r_s,r_sh give a single-diode set; i_ph,i_s1,i_s2,n1,n2,r_s,r_sh
/// a double-diode set.
DiodeModel parse_params(std::string_view text, ModelKind kind);

struct ValidationSummary {
  std::string label;
  DiodeModel params;
  double rmse = 0.0;
  std::vector<double> voltages;
  std::vector<double> measured;
  std::vector<double> simulated;
  std::vector<double> absolute_errors;

  bool operator==(const ValidationSummary&) const = default;
};

struct ReportDocument {
  std::string tool_version;
  std::string timestamp;
  std::vector<std::string> dataset_labels;
  std::optional<DatasheetSpec> datasheet;
  std::vector<ExtractionResult> extractions;
  std::vector<BenchmarkRow> benchmarks;
  std::optional<ValidationSummary> validation;

  bool operator==(const ReportDocument&) const = default;
};

std::string report_to_json(const ReportDocument& report);
ReportDocument report_from_json(std::string_view text);
void write_report(const ReportDocument& report, const std::filesystem::path& path);
ReportDocument read_report(const std::filesystem::path& path);

/// Whole-file read. Throws DataError naming the path when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace pvsdm
