#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "pvsdm/error.hpp"
#include "pvsdm/io.hpp"
#include "support.hpp"

using namespace pvsdm;

namespace {

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

constexpr const char* kSpec =
    "i_sc = 1.0\nv_oc = 20\ni_mpp = 0.9\nv_mpp = 16\np_mpp = 14.4\nn_series = 36\n"
    "temperature_celsius = 25\n";

}  // namespace

TEST_CASE("temperature conversion") {
  CHECK(celsius_to_kelvin(33.0) == 306.0);
  CHECK(celsius_to_kelvin(45.0) == 318.0);
  CHECK(kelvin_to_celsius(celsius_to_kelvin(21.7)) == doctest::Approx(21.7));
}

TEST_CASE("vendored datasheet files") {
  const auto pwp = load_spec(test::data_file("pwp201.spec"));
  CHECK(pwp == test::pwp_spec());
  CHECK(pwp.n_series == 36);
  CHECK(pwp.temperature == 318.0);
  const auto rtc = load_spec(test::data_file("rtc_france.spec"));
  CHECK(rtc == test::rtc_spec());
  CHECK(rtc.temperature == 306.0);
}

TEST_CASE("datasheet file parsing errors") {
  CHECK(parse_spec(kSpec).temperature == 298.0);
  CHECK(parse_spec(std::string("# header\n\n") + kSpec).i_sc == 1.0);

  const auto unknown = message_of([] { (void)parse_spec(std::string(kSpec) + "colour = red\n", "x.spec"); });
  CHECK(unknown.find("x.spec:8") != std::string::npos);
  CHECK(unknown.find("colour") != std::string::npos);

  std::string missing = kSpec;
  missing.erase(missing.find("p_mpp"), std::string("p_mpp = 14.4\n").size());
  CHECK(message_of([&] { (void)parse_spec(missing); }).find("p_mpp") != std::string::npos);

  std::string bad = kSpec;
  bad.replace(bad.find("0.9"), 3, "0.9x");
  CHECK(message_of([&] { (void)parse_spec(bad); }).find("i_mpp") != std::string::npos);

  const auto dup = message_of([] { (void)parse_spec(std::string(kSpec) + "v_oc = 21\n", "d"); });
  CHECK(dup.find("d:8") != std::string::npos);

  CHECK(message_of([] { (void)parse_spec("garbage line\n", "g"); }).find("g:1") != std::string::npos);

  std::string inconsistent = kSpec;
  inconsistent.replace(inconsistent.find("i_mpp = 0.9"), 11, "i_mpp = 1.2");
  CHECK_THROWS_AS(parse_spec(inconsistent), DataError);
}

TEST_CASE("datasheet format round trip") {
  for (const auto& s : {test::pwp_spec(), test::rtc_spec()}) CHECK(parse_spec(format_spec(s)) == s);
}

TEST_CASE("vendored measured curves") {
  const auto rtc = load_measured_curve(test::data_file("rtc_france.csv"));
  CHECK(rtc.points.size() == 26);
  CHECK(rtc.temperature == 306.0);
  CHECK(rtc.n_series == 1);
  CHECK(rtc.source_label == "rtc-france");
  CHECK(rtc.points.front() == CurvePoint{-0.2057, 0.7640});

  const auto pwp = load_measured_curve(test::data_file("pwp201.csv"));
  CHECK(pwp.points.size() == 25);
  CHECK(pwp.temperature == 318.0);
  CHECK(pwp.n_series == 36);
  for (std::size_t k = 1; k < pwp.points.size(); ++k) CHECK(pwp.points[k - 1].voltage < pwp.points[k].voltage);
}

TEST_CASE("measured curve parsing") {
  const std::string head = "# temperature_celsius=25\n# n_series=1\nvoltage_V,current_A\n";
  const auto c = parse_measured_curve(head + "0.4,0.1\n0.1,0.5\n0.2,0.4\n0.0,0.6\n0.3,0.3\n");
  CHECK(c.points.front().voltage == 0.0);
  CHECK(c.points.back().voltage == 0.4);
  CHECK(c.source_label == "<curve>");

  CHECK_THROWS_AS(parse_measured_curve(head + "0.0,0.6\n0.1,0.5\n"), DataError);
  CHECK_THROWS_AS(parse_measured_curve(head + "0,1\n0.1,1\n0.1,0.9\n0.2,1\n0.3,1\n"), DataError);
  CHECK_THROWS_AS(parse_measured_curve(head + "0,1\n0.1,1\n0.2,nan\n0.3,1\n0.4,1\n"), DataError);
  const auto row = message_of([&] { (void)parse_measured_curve(head + "0,1\n0.1;1\n", "c.csv"); });
  CHECK(row.find("c.csv:5") != std::string::npos);
  CHECK_THROWS_AS(parse_measured_curve("# n_series=1\nvoltage_V,current_A\n0,1\n"), DataError);
  CHECK_THROWS_AS(parse_measured_curve("# temperature_celsius=25\n# n_series=1\nV,I\n"), DataError);
}

TEST_CASE("benchmark table") {
  const auto all = load_benchmarks(test::data_file("published_benchmarks.csv"));
  CHECK(all.size() == 10);
  const auto rtc = load_benchmarks(test::data_file("published_benchmarks.csv"), "rtc-france");
  CHECK(rtc.size() == 5);
  CHECK(load_benchmarks(test::data_file("published_benchmarks.csv"), "pwp201").size() == 5);
  CHECK(load_benchmarks(test::data_file("published_benchmarks.csv"), "none").empty());
  CHECK(rtc[0].label == "dpdi-analytic");
  CHECK(std::get<SingleDiodeParams>(rtc[0].params) == test::rtc_proposed());
  int doubles = 0;
  for (const auto& e : rtc) doubles += e.model_kind() == ModelKind::double_diode;
  CHECK(doubles == 2);

  const std::string header =
      "dataset,label,model,i_ph_A,i_s1_A,i_s2_A,n1,n2,r_s_ohm,r_sh_ohm,reported_rmse_A\n";
  CHECK_THROWS_AS(parse_benchmarks(header + "a,b,single,1,1e-9,1e-9,1.2,,0.1,100,1e-3\n"), DataError);
  CHECK_THROWS_AS(parse_benchmarks(header + "a,b,single,1,1e-9,,1.2,,0.1,100\n"), DataError);
  CHECK_THROWS_AS(parse_benchmarks(header + "a,b,triple,1,1e-9,,1.2,,0.1,100,1e-3\n"), DataError);
  CHECK_THROWS_AS(parse_benchmarks("a,b,c\n"), DataError);
}

TEST_CASE("params parsing") {
  const auto s = parse_params("i_ph=0.76081,i_s=3.265e-7,n=1.483,r_s=0.036234,r_sh=54.0092", ModelKind::single);
  CHECK(std::get<SingleDiodeParams>(s) == SingleDiodeParams{0.76081, 3.265e-7, 1.483, 0.036234, 54.0092});
  const auto f = parse_params("i_ph = 0.76081\ni_s = 3.265e-7\nn = 1.483\nr_s = 0.036234\nr_sh = 54.0092\n",
                              ModelKind::single);
  CHECK(f == s);
  const auto d = parse_params("i_ph=1,i_s1=1e-9,i_s2=0,n1=1,n2=2,r_s=0.1,r_sh=100", ModelKind::double_diode);
  CHECK(std::get<DoubleDiodeParams>(d).i_s2 == 0.0);
  CHECK_THROWS_AS(parse_params("i_ph=1,i_s=1e-9,n=1.2,r_s=0.1", ModelKind::single), DataError);
  CHECK_THROWS_AS(parse_params("i_ph=1,i_s=1e-9,n=1.2,r_s=0.1,r_sh=100,x=1", ModelKind::single), DataError);
  CHECK_THROWS_AS(parse_params("i_ph=1,i_s=1e-9,n=1.2,r_s=-0.1,r_sh=100", ModelKind::single), DataError);
}

TEST_CASE("report round trip") {
  const auto spec = test::rtc_spec();
  const auto curve = load_measured_curve(test::data_file("rtc_france.csv"));
  ReportDocument doc;
  doc.tool_version = "0.1.0";
  doc.timestamp = "1970-01-01T00:00:00Z";
  doc.dataset_labels = {"rtc-france"};
  doc.datasheet = spec;
  doc.extractions.push_back(extract(spec, FifthEquationVariant::proposed(), {}, &curve));
  doc.benchmarks = compare_benchmarks(
      curve, load_benchmarks(test::data_file("published_benchmarks.csv"), "rtc-france"));
  BenchmarkRow odd;
  odd.label = "odd";
  odd.computed_rmse = std::numeric_limits<double>::infinity();
  odd.relative_deviation = -std::numeric_limits<double>::infinity();
  odd.failed = true;
  odd.failure = "non-finite";
  doc.benchmarks.push_back(odd);
  ValidationSummary v;
  v.label = "proposed";
  v.params = test::rtc_proposed();
  v.voltages = curve.voltages();
  v.measured = curve.currents();
  v.simulated = simulate_curve(v.params, curve.conditions(), v.voltages);
  v.absolute_errors = absolute_error_series(v.measured, v.simulated);
  v.rmse = rmse(v.measured, v.simulated);
  doc.validation = v;

  const auto text = report_to_json(doc);
  CHECK(report_from_json(text) == doc);
  CHECK(report_to_json(report_from_json(text)) == text);

  const auto path = std::filesystem::temp_directory_path() / "pvsdm_report_roundtrip.json";
  write_report(doc, path);
  CHECK(read_report(path) == doc);
  std::filesystem::remove(path);

  ReportDocument empty;
  CHECK(report_from_json(report_to_json(empty)) == empty);
}

TEST_CASE("malformed documents and missing files") {
  CHECK_THROWS_AS(report_from_json("{not json"), DataError);
  CHECK_THROWS_AS(report_from_json("[1,2]"), DataError);
  const auto missing = message_of([] { (void)load_spec("/nonexistent/dir/x.spec"); });
  CHECK(missing.find("/nonexistent/dir/x.spec") != std::string::npos);
}
