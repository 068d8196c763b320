#include "pvsdm/validation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "pvsdm/error.hpp"

namespace pvsdm {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::single ? "single" : "double";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "single") return ModelKind::single;
  if (text == "double") return ModelKind::double_diode;
  throw DomainError("unknown model kind '" + std::string(text) + "' (expected single or double)");
}

ModelKind kind_of(const DiodeModel& model) {
  return std::holds_alternative<SingleDiodeParams>(model) ? ModelKind::single
                                                          : ModelKind::double_diode;
}

std::vector<double> simulate_curve(const DiodeModel& model, const Conditions& c,
                                   std::span<const double> voltages) {
  std::vector<double> out;
  out.reserve(voltages.size());
  for (double v : voltages) out.push_back(solve_current(model, c, v));
  return out;
}

namespace {

void check_series(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DataError("series length mismatch: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
}

}  // namespace

double rmse(std::span<const double> measured, std::span<const double> simulated) {
  check_series(measured, simulated);
  if (measured.empty()) throw DataError("rmse: empty series");
  double sum = 0.0;
  for (std::size_t k = 0; k < measured.size(); ++k) {
    const double d = measured[k] - simulated[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(measured.size()));
}

std::vector<double> absolute_error_series(std::span<const double> measured,
                                          std::span<const double> simulated) {
  check_series(measured, simulated);
  std::vector<double> out(measured.size());
  for (std::size_t k = 0; k < measured.size(); ++k) out[k] = std::abs(measured[k] - simulated[k]);
  return out;
}

double curve_rmse(const DiodeModel& model, const MeasuredCurve& curve) {
  const auto voltages = curve.voltages();
  const auto currents = curve.currents();
  return rmse(currents, simulate_curve(model, curve.conditions(), voltages));
}

std::vector<BenchmarkRow> compare_benchmarks(const MeasuredCurve& curve,
                                             const std::vector<BenchmarkEntry>& entries) {
  curve.validate();
  const auto voltages = curve.voltages();
  const auto currents = curve.currents();

  auto evaluate = [&](const BenchmarkEntry& e) {
    BenchmarkRow row;
    row.label = e.label;
    row.model_kind = e.model_kind();
    row.reported_rmse = e.reported_rmse;
    try {
      const auto sim = simulate_curve(e.params, curve.conditions(), voltages);
      row.absolute_errors = absolute_error_series(currents, sim);
      row.computed_rmse = rmse(currents, sim);
      row.relative_deviation = row.computed_rmse / row.reported_rmse - 1.0;
    } catch (const Error& err) {
      row.failed = true;
      row.failure = err.what();
    }
    return row;
  };

  std::vector<std::future<BenchmarkRow>> jobs;
  jobs.reserve(entries.size());
  for (const auto& e : entries) jobs.push_back(std::async(std::launch::async, evaluate, e));

  std::vector<BenchmarkRow> rows;
  rows.reserve(entries.size());
  for (auto& j : jobs) rows.push_back(j.get());

  std::stable_sort(rows.begin(), rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    if (a.failed != b.failed) return !a.failed;
    return a.computed_rmse < b.computed_rmse;
  });
  return rows;
}

}  // namespace pvsdm
