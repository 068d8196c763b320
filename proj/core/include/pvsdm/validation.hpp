#pragma once

/// \file
/// Forward simulation of characteristic curves and the error measures used
/// to compare parameter sets against measurements.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pvsdm/curve.hpp"
#include "pvsdm/model.hpp"

namespace pvsdm {

enum class ModelKind { single, double_diode };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);
ModelKind kind_of(const DiodeModel& model);

/// A published parameter set and the RMSE its authors reported.
struct BenchmarkEntry {
  std::string label;
  DiodeModel params;
  double reported_rmse = 0.0;  // A

  ModelKind model_kind() const { return kind_of(params); }
  bool operator==(const BenchmarkEntry&) const = default;
};

/// Model current at each voltage. Output has the input's length.
std::vector<double> simulate_curve(const DiodeModel& model, const Conditions& c,
                                   std::span<const double> voltages);

/// Root-mean-square difference. Throws DataError on empty or mismatched input.
double rmse(std::span<const double> measured, std::span<const double> simulated);

/// Element-wise |measured - simulated|.
std::vector<double> absolute_error_series(std::span<const double> measured,
                                          std::span<const double> simulated);

/// Convenience: simulate at the curve's voltages and return the RMSE.
double curve_rmse(const DiodeModel& model, const MeasuredCurve& curve);

struct BenchmarkRow {
  std::string label;
  ModelKind model_kind = ModelKind::single;
  double computed_rmse = 0.0;
  double reported_rmse = 0.0;
  /// computed / reported - 1
  double relative_deviation = 0.0;
  std::vector<double> absolute_errors;
  /// Set when the simulation of this entry failed; the row then sorts last.
  bool failed = false;
  std::string failure;

  bool operator==(const BenchmarkRow&) const = default;
};

/// Simulates every entry at the curve's voltages and ranks them by RMSE.
std::vector<BenchmarkRow> compare_benchmarks(const MeasuredCurve& curve,
                                             const std::vector<BenchmarkEntry>& entries);

}  // namespace pvsdm
