#pragma once

#include <string>
#include <vector>

#include "pvsdm/model.hpp"

namespace pvsdm {

struct CurvePoint {
  double voltage = 0.0;  // V
  double current = 0.0;  // A

  bool operator==(const CurvePoint&) const = default;
};

/// Measured I-V samples of one PV source, strictly increasing in voltage.
struct MeasuredCurve {
  std::vector<CurvePoint> points;
  std::string source_label;
  double temperature = 298.15;  // K
  int n_series = 1;

  /// Throws DataError unless there are >= 5 finite points with strictly
  /// increasing voltages, n_series >= 1 and a positive temperature.
  void validate() const;

  Conditions conditions() const { return {n_series, temperature}; }
  std::vector<double> voltages() const;
  std::vector<double> currents() const;

  bool operator==(const MeasuredCurve&) const = default;
};

}  // namespace pvsdm
