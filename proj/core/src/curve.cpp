#include "pvsdm/curve.hpp"

#include <cmath>

#include "pvsdm/error.hpp"

namespace pvsdm {

void MeasuredCurve::validate() const {
  if (points.size() < 5) {
    throw DataError("measured curve '" + source_label + "': needs at least 5 points, got " +
                    std::to_string(points.size()));
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!std::isfinite(points[k].voltage) || !std::isfinite(points[k].current)) {
      throw DataError("measured curve '" + source_label + "': non-finite sample at index " +
                      std::to_string(k));
    }
    if (k > 0 && !(points[k].voltage > points[k - 1].voltage)) {
      throw DataError("measured curve '" + source_label +
                      "': voltages must be strictly increasing (index " + std::to_string(k) + ")");
    }
  }
  if (n_series < 1) throw DataError("measured curve: n_series must be >= 1");
  if (!(temperature > 0.0)) throw DataError("measured curve: temperature must be > 0 K");
}

std::vector<double> MeasuredCurve::voltages() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& pt : points) out.push_back(pt.voltage);
  return out;
}

std::vector<double> MeasuredCurve::currents() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& pt : points) out.push_back(pt.current);
  return out;
}

}  // namespace pvsdm
