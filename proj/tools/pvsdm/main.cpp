#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pvsdm/error.hpp"
#include "pvsdm/io.hpp"
#include "pvsdm/plot.hpp"
#include "pvsdm/solver.hpp"
#include "pvsdm/validation.hpp"
#include "pvsdm/version.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;
constexpr const char* kFixedTimestamp = "1970-01-01T00:00:00Z";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Existing paths are used as given. Otherwise a relative path is looked up
// under $PV_SDM_DATA_DIR, then under the vendored data directory.
fs::path resolve(const std::string& arg) {
  const fs::path p(arg);
  if (fs::exists(p) || p.is_absolute()) return p;
  if (const char* env = std::getenv("PV_SDM_DATA_DIR"); env && *env) {
    const fs::path candidate = fs::path(env) / p;
    if (fs::exists(candidate)) return candidate;
  }
#ifdef PVSDM_DATA_DIR
  const fs::path vendored = fs::path(PVSDM_DATA_DIR) / p;
  if (fs::exists(vendored)) return vendored;
#endif
  return p;
}

std::string timestamp(bool fixed) {
  if (fixed) return kFixedTimestamp;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

pvsdm::DiodeModel read_params(const std::string& arg, pvsdm::ModelKind kind) {
  const fs::path p = resolve(arg);
  if (arg.find('=') == std::string::npos && fs::is_regular_file(p)) {
    return pvsdm::parse_params(pvsdm::read_text_file(p), kind);
  }
  return pvsdm::parse_params(arg, kind);
}

void print_params(const pvsdm::DiodeModel& model) {
  if (const auto* s = std::get_if<pvsdm::SingleDiodeParams>(&model)) {
    fmt::print("  {:<6} {:>16.9g} A\n", "I_ph", s->i_ph);
    fmt::print("  {:<6} {:>16.9g} A\n", "I_s", s->i_s);
    fmt::print("  {:<6} {:>16.9g}\n", "n", s->n);
    fmt::print("  {:<6} {:>16.9g} ohm\n", "R_s", s->r_s);
    fmt::print("  {:<6} {:>16.9g} ohm\n", "R_sh", s->r_sh);
    return;
  }
  const auto& d = std::get<pvsdm::DoubleDiodeParams>(model);
  fmt::print("  {:<6} {:>16.9g} A\n", "I_ph", d.i_ph);
  fmt::print("  {:<6} {:>16.9g} A\n", "I_s1", d.i_s1);
  fmt::print("  {:<6} {:>16.9g} A\n", "I_s2", d.i_s2);
  fmt::print("  {:<6} {:>16.9g}\n", "n1", d.n1);
  fmt::print("  {:<6} {:>16.9g}\n", "n2", d.n2);
  fmt::print("  {:<6} {:>16.9g} ohm\n", "R_s", d.r_s);
  fmt::print("  {:<6} {:>16.9g} ohm\n", "R_sh", d.r_sh);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 1) return {lo};
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return out;
}

std::vector<double> power(const std::vector<double>& v, const std::vector<double>& i) {
  std::vector<double> p(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) p[k] = v[k] * i[k];
  return p;
}

pvsdm::ValidationSummary summarize(const std::string& label, const pvsdm::DiodeModel& model,
                                   const pvsdm::MeasuredCurve& curve) {
  pvsdm::ValidationSummary s;
  s.label = label;
  s.params = model;
  s.voltages = curve.voltages();
  s.measured = curve.currents();
  s.simulated = pvsdm::simulate_curve(model, curve.conditions(), s.voltages);
  s.absolute_errors = pvsdm::absolute_error_series(s.measured, s.simulated);
  s.rmse = pvsdm::rmse(s.measured, s.simulated);
  return s;
}

// I-V, P-V and (with a curve) absolute-error charts for one parameter set.
void write_curve_plots(const fs::path& dir, const pvsdm::DiodeModel& model,
                       const pvsdm::Conditions& c, const pvsdm::MeasuredCurve* curve,
                       const std::optional<pvsdm::ValidationSummary>& summary,
                       const std::string& title) {
  fs::create_directories(dir);
  double v_hi = pvsdm::open_circuit_voltage(model, c);
  double v_lo = 0.0;
  if (curve) {
    v_lo = std::min(v_lo, curve->points.front().voltage);
    v_hi = std::max(v_hi, curve->points.back().voltage);
  }
  const auto v = linspace(v_lo, v_hi, 200);
  const auto i = pvsdm::simulate_curve(model, c, v);

  std::vector<pvsdm::PlotSeries> iv;
  std::vector<pvsdm::PlotSeries> pv;
  if (curve) {
    const auto mv = curve->voltages();
    const auto mi = curve->currents();
    iv.push_back({"measured", mv, mi, pvsdm::SeriesStyle::markers});
    pv.push_back({"measured", mv, power(mv, mi), pvsdm::SeriesStyle::markers});
  }
  iv.push_back({"simulated", v, i, pvsdm::SeriesStyle::line});
  pv.push_back({"simulated", v, power(v, i), pvsdm::SeriesStyle::line});
  pvsdm::render_plot(iv, pvsdm::PlotKind::iv, dir / "iv.svg", title);
  pvsdm::render_plot(pv, pvsdm::PlotKind::pv, dir / "pv.svg", title);
  if (summary) {
    pvsdm::render_plot({{summary->label, summary->voltages, summary->absolute_errors,
                         pvsdm::SeriesStyle::line}},
                       pvsdm::PlotKind::error, dir / "error.svg", title);
  }
}

struct ExtractArgs {
  std::string spec;
  std::string variant = "proposed";
  std::string curve;
  std::string out;
  std::string plots;
  bool fixed_timestamp = false;
};

int cmd_extract(const ExtractArgs& a) {
  const auto tag = pvsdm::parse_fifth_equation(a.variant);
  if (tag == pvsdm::FifthEquation::area && a.curve.empty()) {
    throw UsageError("--variant area requires --curve");
  }
  const auto spec_path = resolve(a.spec);
  const auto spec = pvsdm::load_spec(spec_path);
  std::shared_ptr<const pvsdm::MeasuredCurve> curve;
  if (!a.curve.empty()) {
    curve = std::make_shared<const pvsdm::MeasuredCurve>(pvsdm::load_measured_curve(resolve(a.curve)));
  }

  pvsdm::FifthEquationVariant variant;
  switch (tag) {
    case pvsdm::FifthEquation::proposed_dpdi: variant = pvsdm::FifthEquationVariant::proposed(); break;
    case pvsdm::FifthEquation::slope_sc: variant = pvsdm::FifthEquationVariant::slope_at_sc(); break;
    case pvsdm::FifthEquation::slope_oc: variant = pvsdm::FifthEquationVariant::slope_at_oc(); break;
    case pvsdm::FifthEquation::area: variant = pvsdm::FifthEquationVariant::area_under(curve); break;
  }

  const auto result = pvsdm::extract(spec, variant, {}, curve.get());

  pvsdm::ReportDocument report;
  report.tool_version = pvsdm::kVersion;
  report.timestamp = timestamp(a.fixed_timestamp);
  report.dataset_labels.push_back(spec_path.stem().string());
  if (curve) report.dataset_labels.push_back(curve->source_label);
  report.datasheet = spec;
  report.extractions.push_back(result);
  if (curve) report.validation = summarize(std::string(pvsdm::to_string(tag)), result.params, *curve);
  pvsdm::write_report(report, a.out);

  fmt::print("variant {} (n seed {:.1f}, {} iterations, residual norm {:.3e})\n",
             pvsdm::to_string(tag), result.n_seed, result.iterations, result.residual_norm);
  print_params(result.params);
  fmt::print("jacobian rank {} condition {:.3e}\n", result.jacobian_rank, result.jacobian_condition);
  if (result.rmse) fmt::print("RMSE {:.6e} A\n", *result.rmse);

  if (!a.plots.empty()) {
    write_curve_plots(a.plots, result.params, curve ? curve->conditions() : spec.conditions(),
                      curve.get(), report.validation, spec_path.stem().string());
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string params;
  std::string model = "single";
  std::string spec;
  std::size_t grid = 100;
  std::string curve;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  if (a.spec.empty() && a.curve.empty()) {
    throw UsageError("simulate needs --spec or --curve for temperature and series count");
  }
  if (a.grid < 1) throw UsageError("--grid must be >= 1");
  const auto kind = pvsdm::parse_model_kind(a.model);
  const auto model = read_params(a.params, kind);

  std::vector<double> v;
  pvsdm::Conditions c;
  if (!a.curve.empty()) {
    const auto curve = pvsdm::load_measured_curve(resolve(a.curve));
    c = curve.conditions();
    v = curve.voltages();
  } else {
    c = pvsdm::load_spec(resolve(a.spec)).conditions();
    v = linspace(0.0, a.grid == 1 ? 0.0 : pvsdm::open_circuit_voltage(model, c), a.grid);
  }
  const auto i = pvsdm::simulate_curve(model, c, v);

  std::string csv = "voltage_V,current_A,power_W\n";
  for (std::size_t k = 0; k < v.size(); ++k) {
    csv += fmt::format("{},{},{}\n", v[k], i[k], v[k] * i[k]);
  }
  pvsdm::write_text_file(a.out, csv);
  fmt::print("wrote {} points to {}\n", v.size(), a.out);
  return kExitOk;
}

struct ValidateArgs {
  std::string params;
  std::string model = "single";
  std::string curve;
  std::string report;
  bool fixed_timestamp = false;
};

int cmd_validate(const ValidateArgs& a) {
  const auto kind = pvsdm::parse_model_kind(a.model);
  const auto model = read_params(a.params, kind);
  const auto curve = pvsdm::load_measured_curve(resolve(a.curve));
  const auto summary = summarize("params", model, curve);

  pvsdm::ReportDocument report;
  report.tool_version = pvsdm::kVersion;
  report.timestamp = timestamp(a.fixed_timestamp);
  report.dataset_labels.push_back(curve.source_label);
  report.validation = summary;
  pvsdm::write_report(report, a.report);

  print_params(model);
  fmt::print("{:>12} {:>14} {:>14} {:>12}\n", "V", "I_measured", "I_simulated", "|error|");
  for (std::size_t k = 0; k < summary.voltages.size(); ++k) {
    fmt::print("{:>12.5g} {:>14.6g} {:>14.6g} {:>12.3e}\n", summary.voltages[k],
               summary.measured[k], summary.simulated[k], summary.absolute_errors[k]);
  }
  fmt::print("RMSE {:.6e} A\n", summary.rmse);
  return kExitOk;
}

struct CompareArgs {
  std::string curve;
  std::string benchmarks;
  std::string dataset;
  std::string out;
  std::string plots;
  bool fixed_timestamp = false;
};

int cmd_compare(const CompareArgs& a) {
  const auto curve = pvsdm::load_measured_curve(resolve(a.curve));
  const std::string dataset = a.dataset.empty() ? curve.source_label : a.dataset;
  const auto entries = pvsdm::load_benchmarks(resolve(a.benchmarks), dataset);
  if (entries.empty()) {
    throw pvsdm::DomainError("no benchmark entries for dataset '" + dataset + "' in " +
                             a.benchmarks);
  }
  const auto rows = pvsdm::compare_benchmarks(curve, entries);

  pvsdm::ReportDocument report;
  report.tool_version = pvsdm::kVersion;
  report.timestamp = timestamp(a.fixed_timestamp);
  report.dataset_labels.push_back(dataset);
  report.benchmarks = rows;
  pvsdm::write_report(report, a.out);

  fmt::print("{:>4}  {:<16} {:<7} {:>14} {:>14} {:>10}\n", "rank", "label", "model",
             "RMSE (A)", "reported (A)", "deviation");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (r.failed) {
      fmt::print("{:>4}  {:<16} {:<7} failed: {}\n", k + 1, r.label, pvsdm::to_string(r.model_kind),
                 r.failure);
      continue;
    }
    fmt::print("{:>4}  {:<16} {:<7} {:>14.4e} {:>14.4e} {:>+9.1f}%\n", k + 1, r.label,
               pvsdm::to_string(r.model_kind), r.computed_rmse, r.reported_rmse,
               100.0 * r.relative_deviation);
  }
  auto reported_order = rows;
  std::stable_sort(reported_order.begin(), reported_order.end(),
                   [](const auto& x, const auto& y) { return x.reported_rmse < y.reported_rmse; });
  bool same = true;
  for (std::size_t k = 0; k < rows.size(); ++k) same = same && rows[k].label == reported_order[k].label;
  fmt::print("ranking {} the reported ordering\n", same ? "matches" : "differs from");

  if (!a.plots.empty()) {
    fs::create_directories(a.plots);
    std::vector<pvsdm::PlotSeries> series;
    const auto v = curve.voltages();
    for (const auto& r : rows) {
      if (!r.failed) series.push_back({r.label, v, r.absolute_errors, pvsdm::SeriesStyle::line});
    }
    if (!series.empty()) {
      pvsdm::render_plot(series, pvsdm::PlotKind::error, fs::path(a.plots) / "error.svg", dataset);
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-diode PV model parameter extraction and validation"};
  app.set_version_flag("--version", std::string(pvsdm::kVersion));
  app.require_subcommand(1);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Extract single-diode parameters from key points");
  extract->add_option("--spec", ex.spec, "Datasheet spec file")->required();
  extract->add_option("--variant", ex.variant, "Fifth equation")
      ->check(CLI::IsMember({"proposed", "slope-sc", "slope-oc", "area"}));
  extract->add_option("--curve", ex.curve, "Measured I-V curve CSV");
  extract->add_option("--out", ex.out, "Report path (JSON)")->required();
  extract->add_option("--plots", ex.plots, "Directory for iv.svg, pv.svg, error.svg");
  extract->add_flag("--fixed-timestamp", ex.fixed_timestamp, "Write a constant report timestamp");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a characteristic curve");
  simulate->add_option("--params", sim.params, "k=v,... or a parameter file")->required();
  simulate->add_option("--model", sim.model, "single or double")
      ->check(CLI::IsMember({"single", "double"}));
  simulate->add_option("--spec", sim.spec, "Spec file supplying temperature and n_series");
  simulate->add_option("--grid", sim.grid, "Uniform grid size on [0, Voc]");
  simulate->add_option("--curve", sim.curve, "Simulate at this curve's voltages");
  simulate->add_option("--out", sim.out, "Output CSV")->required();

  ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "RMSE of one parameter set against a curve");
  validate->add_option("--params", val.params, "k=v,... or a parameter file")->required();
  validate->add_option("--model", val.model, "single or double")
      ->check(CLI::IsMember({"single", "double"}));
  validate->add_option("--curve", val.curve, "Measured I-V curve CSV")->required();
  validate->add_option("--report", val.report, "Report path (JSON)")->required();
  validate->add_flag("--fixed-timestamp", val.fixed_timestamp, "Write a constant report timestamp");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Rank published parameter sets on a curve");
  compare->add_option("--curve", cmp.curve, "Measured I-V curve CSV")->required();
  compare->add_option("--benchmarks", cmp.benchmarks, "Benchmark table CSV")->required();
  compare->add_option("--dataset", cmp.dataset, "Dataset column to select (default: curve source)");
  compare->add_option("--out", cmp.out, "Report path (JSON)")->required();
  compare->add_option("--plots", cmp.plots, "Directory for error.svg");
  compare->add_flag("--fixed-timestamp", cmp.fixed_timestamp, "Write a constant report timestamp");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*extract) return cmd_extract(ex);
    if (*simulate) return cmd_simulate(sim);
    if (*validate) return cmd_validate(val);
    if (*compare) return cmd_compare(cmp);
  } catch (const UsageError& e) {
    std::cerr << "pvsdm: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const pvsdm::Error& e) {
    std::cerr << "pvsdm: " << e.what() << "\n";
    return kExitDomain;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "pvsdm: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
