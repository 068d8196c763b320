#include "pvsdm/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pvsdm/error.hpp"

namespace pvsdm {

using Json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto end = s.find(sep, start);
    out.push_back(trim(s.substr(start, end == std::string_view::npos ? s.npos : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::string where(const std::string& origin, std::size_t line) {
  return origin + ":" + std::to_string(line);
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<int> to_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

double require_double(std::string_view s, const std::string& ctx, std::string_view key) {
  const auto v = to_double(s);
  if (!v) throw DataError(ctx + ": '" + std::string(key) + "' is not a finite number: '" +
                          std::string(s) + "'");
  return *v;
}

// Parses `key <sep> value` lines; '#' lines and blank lines are skipped.
std::map<std::string, std::pair<std::string, std::size_t>> parse_key_values(
    std::string_view text, const std::string& origin, std::string_view allowed_separators) {
  std::map<std::string, std::pair<std::string, std::size_t>> out;
  const auto lines = split_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto line = trim(lines[k]);
    if (line.empty() || line.front() == '#') continue;
    const auto pos = line.find_first_of(allowed_separators);
    if (pos == std::string_view::npos) {
      throw DataError(where(origin, k + 1) + ": expected 'key = value', got '" + std::string(line) +
                      "'");
    }
    const std::string key(trim(line.substr(0, pos)));
    const std::string value(trim(line.substr(pos + 1)));
    if (key.empty()) throw DataError(where(origin, k + 1) + ": empty key");
    if (!out.emplace(key, std::make_pair(value, k + 1)).second) {
      throw DataError(where(origin, k + 1) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

void put_number(Json& j, const char* key, double v) {
  if (std::isfinite(v)) {
    j[key] = v;
  } else if (std::isnan(v)) {
    j[key] = "nan";
  } else {
    j[key] = v > 0 ? "inf" : "-inf";
  }
}

double get_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw DataError("report: expected a number, got " + j.dump());
}

Json params_to_json(const DiodeModel& model) {
  Json j;
  if (const auto* s = std::get_if<SingleDiodeParams>(&model)) {
    j["model"] = "single";
    j["i_ph"] = s->i_ph;
    j["i_s"] = s->i_s;
    j["n"] = s->n;
    j["r_s"] = s->r_s;
    j["r_sh"] = s->r_sh;
  } else {
    const auto& d = std::get<DoubleDiodeParams>(model);
    j["model"] = "double";
    j["i_ph"] = d.i_ph;
    j["i_s1"] = d.i_s1;
    j["i_s2"] = d.i_s2;
    j["n1"] = d.n1;
    j["n2"] = d.n2;
    j["r_s"] = d.r_s;
    j["r_sh"] = d.r_sh;
  }
  return j;
}

DiodeModel params_from_json(const Json& j) {
  if (j.at("model").get<std::string>() == "single") {
    return SingleDiodeParams{j.at("i_ph").get<double>(), j.at("i_s").get<double>(),
                             j.at("n").get<double>(), j.at("r_s").get<double>(),
                             j.at("r_sh").get<double>()};
  }
  return DoubleDiodeParams{j.at("i_ph").get<double>(), j.at("i_s1").get<double>(),
                           j.at("i_s2").get<double>(), j.at("n1").get<double>(),
                           j.at("n2").get<double>(), j.at("r_s").get<double>(),
                           j.at("r_sh").get<double>()};
}

Json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  Json tmp;
  put_number(tmp, "v", *v);
  return tmp["v"];
}

std::optional<double> optional_number(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return get_number(j);
}

Json extraction_to_json(const ExtractionResult& r) {
  Json j;
  j["params"] = params_to_json(r.params);
  j["variant"] = std::string(to_string(r.variant));
  put_number(j, "residual_norm", r.residual_norm);
  Json res = Json::array();
  for (std::size_t k = 0; k < r.residuals.size(); ++k) {
    Json item;
    put_number(item, "value", r.residuals[k]);
    res.push_back(item["value"]);
  }
  j["residuals"] = res;
  j["iterations"] = r.iterations;
  put_number(j, "jacobian_condition", r.jacobian_condition);
  j["jacobian_rank"] = r.jacobian_rank;
  j["converged"] = r.converged;
  j["rmse"] = optional_number(r.rmse);
  j["n_seed"] = r.n_seed;
  Json starts = Json::array();
  for (const auto& s : r.starts) {
    Json sj;
    sj["n_seed"] = s.n_seed;
    sj["converged"] = s.converged;
    put_number(sj, "residual_norm", s.residual_norm);
    sj["iterations"] = s.iterations;
    sj["rmse"] = optional_number(s.rmse);
    sj["failure"] = s.failure;
    starts.push_back(sj);
  }
  j["starts"] = starts;
  return j;
}

ExtractionResult extraction_from_json(const Json& j) {
  ExtractionResult r;
  r.params = std::get<SingleDiodeParams>(params_from_json(j.at("params")));
  r.variant = parse_fifth_equation(j.at("variant").get<std::string>());
  r.residual_norm = get_number(j.at("residual_norm"));
  const auto& res = j.at("residuals");
  if (!res.is_array() || res.size() != 5) throw DataError("report: residuals must have 5 entries");
  for (std::size_t k = 0; k < 5; ++k) r.residuals[k] = get_number(res[k]);
  r.iterations = j.at("iterations").get<int>();
  r.jacobian_condition = get_number(j.at("jacobian_condition"));
  r.jacobian_rank = j.at("jacobian_rank").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.rmse = optional_number(j.at("rmse"));
  r.n_seed = j.at("n_seed").get<double>();
  for (const auto& sj : j.at("starts")) {
    StartDiagnostic s;
    s.n_seed = sj.at("n_seed").get<double>();
    s.converged = sj.at("converged").get<bool>();
    s.residual_norm = get_number(sj.at("residual_norm"));
    s.iterations = sj.at("iterations").get<int>();
    s.rmse = optional_number(sj.at("rmse"));
    s.failure = sj.at("failure").get<std::string>();
    r.starts.push_back(s);
  }
  return r;
}

Json benchmark_to_json(const BenchmarkRow& b) {
  Json j;
  j["label"] = b.label;
  j["model"] = std::string(to_string(b.model_kind));
  put_number(j, "computed_rmse", b.computed_rmse);
  j["reported_rmse"] = b.reported_rmse;
  put_number(j, "relative_deviation", b.relative_deviation);
  j["absolute_errors"] = b.absolute_errors;
  j["failed"] = b.failed;
  j["failure"] = b.failure;
  return j;
}

BenchmarkRow benchmark_from_json(const Json& j) {
  BenchmarkRow b;
  b.label = j.at("label").get<std::string>();
  b.model_kind = parse_model_kind(j.at("model").get<std::string>());
  b.computed_rmse = get_number(j.at("computed_rmse"));
  b.reported_rmse = j.at("reported_rmse").get<double>();
  b.relative_deviation = get_number(j.at("relative_deviation"));
  b.absolute_errors = j.at("absolute_errors").get<std::vector<double>>();
  b.failed = j.at("failed").get<bool>();
  b.failure = j.at("failure").get<std::string>();
  return b;
}

}  // namespace

double celsius_to_kelvin(double celsius) { return celsius + kCelsiusOffset; }
double kelvin_to_celsius(double kelvin) { return kelvin - kCelsiusOffset; }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

DatasheetSpec parse_spec(std::string_view text, const std::string& origin) {
  static const std::array<std::string_view, 7> keys{
      "i_sc", "v_oc", "i_mpp", "v_mpp", "p_mpp", "n_series", "temperature_celsius"};
  const auto kv = parse_key_values(text, origin, "=");
  for (const auto& [key, value] : kv) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw DataError(where(origin, value.second) + ": unknown key '" + key + "'");
    }
  }
  for (auto key : keys) {
    if (!kv.contains(std::string(key))) {
      throw DataError(origin + ": missing key '" + std::string(key) + "'");
    }
  }
  auto num = [&](const char* key) {
    const auto& [value, line] = kv.at(key);
    return require_double(value, where(origin, line), key);
  };
  DatasheetSpec spec;
  spec.i_sc = num("i_sc");
  spec.v_oc = num("v_oc");
  spec.i_mpp = num("i_mpp");
  spec.v_mpp = num("v_mpp");
  spec.p_mpp = num("p_mpp");
  const auto& [ns_text, ns_line] = kv.at("n_series");
  const auto ns = to_int(ns_text);
  if (!ns) throw DataError(where(origin, ns_line) + ": 'n_series' must be an integer");
  spec.n_series = *ns;
  spec.temperature = celsius_to_kelvin(num("temperature_celsius"));
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw DataError(origin + ": " + e.what());
  }
  return spec;
}

DatasheetSpec load_spec(const std::filesystem::path& path) {
  return parse_spec(read_text_file(path), path.string());
}

std::string format_spec(const DatasheetSpec& spec) {
  Json tmp = {spec.i_sc, spec.v_oc, spec.i_mpp, spec.v_mpp, spec.p_mpp,
              kelvin_to_celsius(spec.temperature)};
  std::ostringstream out;
  out << "i_sc = " << tmp[0].dump() << '\n'
      << "v_oc = " << tmp[1].dump() << '\n'
      << "i_mpp = " << tmp[2].dump() << '\n'
      << "v_mpp = " << tmp[3].dump() << '\n'
      << "p_mpp = " << tmp[4].dump() << '\n'
      << "n_series = " << spec.n_series << '\n'
      << "temperature_celsius = " << tmp[5].dump() << '\n';
  return out.str();
}

MeasuredCurve parse_measured_curve(std::string_view text, const std::string& origin) {
  MeasuredCurve curve;
  std::optional<double> temperature_c;
  std::optional<int> n_series;
  bool header_seen = false;

  const auto lines = split_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto line = trim(lines[k]);
    const auto ctx = where(origin, k + 1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (header_seen) continue;
      const auto body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;  // free-text comment
      const auto key = trim(body.substr(0, eq));
      const auto value = trim(body.substr(eq + 1));
      if (key == "temperature_celsius") {
        temperature_c = require_double(value, ctx, key);
      } else if (key == "n_series") {
        n_series = to_int(value);
        if (!n_series) throw DataError(ctx + ": 'n_series' must be an integer");
      } else if (key == "source") {
        curve.source_label = std::string(value);
      } else {
        throw DataError(ctx + ": unknown metadata key '" + std::string(key) + "'");
      }
      continue;
    }
    if (!header_seen) {
      if (line != "voltage_V,current_A") {
        throw DataError(ctx + ": expected header 'voltage_V,current_A'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw DataError(ctx + ": expected 2 comma-separated values");
    const auto v = to_double(fields[0]);
    const auto i = to_double(fields[1]);
    if (!v || !i) throw DataError(ctx + ": malformed row '" + std::string(line) + "'");
    curve.points.push_back({*v, *i});
  }
  if (!header_seen) throw DataError(origin + ": missing header 'voltage_V,current_A'");
  if (!temperature_c) throw DataError(origin + ": missing metadata '# temperature_celsius=...'");
  if (!n_series) throw DataError(origin + ": missing metadata '# n_series=...'");
  curve.temperature = celsius_to_kelvin(*temperature_c);
  curve.n_series = *n_series;
  if (curve.source_label.empty()) curve.source_label = origin;

  std::stable_sort(curve.points.begin(), curve.points.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.voltage < b.voltage; });
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    if (curve.points[k].voltage == curve.points[k - 1].voltage) {
      throw DataError(origin + ": repeated voltage " + std::to_string(curve.points[k].voltage));
    }
  }
  curve.validate();
  return curve;
}

MeasuredCurve load_measured_curve(const std::filesystem::path& path) {
  return parse_measured_curve(read_text_file(path), path.string());
}

std::vector<BenchmarkEntry> parse_benchmarks(std::string_view text,
                                             const std::optional<std::string>& dataset,
                                             const std::string& origin) {
  static const std::vector<std::string_view> header{
      "dataset", "label", "model", "i_ph_A", "i_s1_A", "i_s2_A",
      "n1",      "n2",    "r_s_ohm", "r_sh_ohm", "reported_rmse_A"};
  std::vector<BenchmarkEntry> out;
  bool header_seen = false;
  const auto lines = split_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto line = trim(lines[k]);
    const auto ctx = where(origin, k + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto f = split(line, ',');
    if (!header_seen) {
      if (f != header) throw DataError(ctx + ": unexpected benchmark header");
      header_seen = true;
      continue;
    }
    if (f.size() != header.size()) {
      throw DataError(ctx + ": expected " + std::to_string(header.size()) + " fields");
    }
    if (dataset && f[0] != *dataset) continue;
    BenchmarkEntry e;
    e.label = std::string(f[1]);
    ModelKind kind = ModelKind::single;
    try {
      kind = parse_model_kind(f[2]);
    } catch (const DomainError& err) {
      throw DataError(ctx + ": " + err.what());
    }
    auto num = [&](std::size_t idx) { return require_double(f[idx], ctx, header[idx]); };
    if (kind == ModelKind::single) {
      if (!f[5].empty() || !f[7].empty()) {
        throw DataError(ctx + ": single-diode row must leave i_s2_A and n2 empty");
      }
      e.params = SingleDiodeParams{num(3), num(4), num(6), num(8), num(9)};
    } else {
      e.params = DoubleDiodeParams{num(3), num(4), num(5), num(6), num(7), num(8), num(9)};
    }
    e.reported_rmse = num(10);
    try {
      std::visit([](const auto& p) { p.validate(); }, e.params);
    } catch (const DomainError& err) {
      throw DataError(ctx + ": " + err.what());
    }
    if (!(e.reported_rmse > 0.0)) throw DataError(ctx + ": reported_rmse_A must be > 0");
    out.push_back(std::move(e));
  }
  if (!header_seen) throw DataError(origin + ": missing benchmark header");
  return out;
}

std::vector<BenchmarkEntry> load_benchmarks(const std::filesystem::path& path,
                                            const std::optional<std::string>& dataset) {
  return parse_benchmarks(read_text_file(path), dataset, path.string());
}

DiodeModel parse_params(std::string_view text, ModelKind kind) {
  // Inline form uses ',' between pairs; file form uses newlines.
  std::string normalized(text);
  if (normalized.find('\n') == std::string::npos) {
    std::replace(normalized.begin(), normalized.end(), ',', '\n');
  }
  const auto kv = parse_key_values(normalized, "<params>", "=");
  const std::vector<std::string_view> keys =
      kind == ModelKind::single
          ? std::vector<std::string_view>{"i_ph", "i_s", "n", "r_s", "r_sh"}
          : std::vector<std::string_view>{"i_ph", "i_s1", "i_s2", "n1", "n2", "r_s", "r_sh"};
  for (const auto& [key, value] : kv) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw DataError("params: unknown key '" + key + "' for " + std::string(to_string(kind)) +
                      "-diode model");
    }
  }
  std::vector<double> v;
  for (auto key : keys) {
    const auto it = kv.find(std::string(key));
    if (it == kv.end()) throw DataError("params: missing key '" + std::string(key) + "'");
    v.push_back(require_double(it->second.first, "params", key));
  }
  DiodeModel model = kind == ModelKind::single
                         ? DiodeModel{SingleDiodeParams{v[0], v[1], v[2], v[3], v[4]}}
                         : DiodeModel{DoubleDiodeParams{v[0], v[1], v[2], v[3], v[4], v[5], v[6]}};
  try {
    std::visit([](const auto& p) { p.check_evaluable(); }, model);
  } catch (const DomainError& e) {
    throw DataError(std::string("params: ") + e.what());
  }
  return model;
}

std::string report_to_json(const ReportDocument& report) {
  Json j;
  j["tool"] = {{"name", "pvsdm"}, {"version", report.tool_version}};
  j["timestamp"] = report.timestamp;
  j["datasets"] = report.dataset_labels;
  if (report.datasheet) {
    const auto& s = *report.datasheet;
    j["datasheet"] = {{"i_sc", s.i_sc},         {"v_oc", s.v_oc},         {"i_mpp", s.i_mpp},
                      {"v_mpp", s.v_mpp},       {"p_mpp", s.p_mpp},       {"n_series", s.n_series},
                      {"temperature_K", s.temperature}};
  } else {
    j["datasheet"] = nullptr;
  }
  j["extractions"] = Json::array();
  for (const auto& r : report.extractions) j["extractions"].push_back(extraction_to_json(r));
  j["benchmarks"] = Json::array();
  for (const auto& b : report.benchmarks) j["benchmarks"].push_back(benchmark_to_json(b));
  if (report.validation) {
    const auto& v = *report.validation;
    Json vj;
    vj["label"] = v.label;
    vj["params"] = params_to_json(v.params);
    put_number(vj, "rmse", v.rmse);
    vj["voltages"] = v.voltages;
    vj["measured"] = v.measured;
    vj["simulated"] = v.simulated;
    vj["absolute_errors"] = v.absolute_errors;
    j["validation"] = vj;
  } else {
    j["validation"] = nullptr;
  }
  return j.dump(2) + "\n";
}

ReportDocument report_from_json(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    ReportDocument r;
    r.tool_version = j.at("tool").at("version").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.dataset_labels = j.at("datasets").get<std::vector<std::string>>();
    if (!j.at("datasheet").is_null()) {
      const auto& s = j.at("datasheet");
      r.datasheet = DatasheetSpec{s.at("i_sc").get<double>(),   s.at("v_oc").get<double>(),
                                  s.at("i_mpp").get<double>(),  s.at("v_mpp").get<double>(),
                                  s.at("p_mpp").get<double>(),  s.at("n_series").get<int>(),
                                  s.at("temperature_K").get<double>()};
    }
    for (const auto& e : j.at("extractions")) r.extractions.push_back(extraction_from_json(e));
    for (const auto& b : j.at("benchmarks")) r.benchmarks.push_back(benchmark_from_json(b));
    if (!j.at("validation").is_null()) {
      const auto& vj = j.at("validation");
      ValidationSummary v;
      v.label = vj.at("label").get<std::string>();
      v.params = params_from_json(vj.at("params"));
      v.rmse = get_number(vj.at("rmse"));
      v.voltages = vj.at("voltages").get<std::vector<double>>();
      v.measured = vj.at("measured").get<std::vector<double>>();
      v.simulated = vj.at("simulated").get<std::vector<double>>();
      v.absolute_errors = vj.at("absolute_errors").get<std::vector<double>>();
      r.validation = std::move(v);
    }
    return r;
  } catch (const Json::exception& e) {
    throw DataError(std::string("report: malformed document: ") + e.what());
  }
}

void write_report(const ReportDocument& report, const std::filesystem::path& path) {
  write_text_file(path, report_to_json(report));
}

ReportDocument read_report(const std::filesystem::path& path) {
  return report_from_json(read_text_file(path));
}

}  // namespace pvsdm
