#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pvsdm/error.hpp"
#include "pvsdm/io.hpp"
#include "pvsdm/validation.hpp"
#include "support.hpp"

using namespace pvsdm;

TEST_CASE("rmse") {
  const std::vector<double> a{0.1, 0.5, 0.7, -0.2};
  std::vector<double> b = a;
  CHECK(rmse(a, a) == 0.0);
  for (double& x : b) x += 0.01;
  CHECK(rmse(a, b) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(rmse(a, b) == rmse(b, a));

  std::vector<double> sa = a;
  std::vector<double> sb = b;
  for (double& x : sa) x *= 3.0;
  for (double& x : sb) x *= 3.0;
  CHECK(rmse(sa, sb) == doctest::Approx(3.0 * rmse(a, b)));

  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), DataError);
  CHECK_THROWS_AS(rmse(a, std::vector<double>{1.0}), DataError);
  CHECK_THROWS_AS(absolute_error_series(a, std::vector<double>{1.0}), DataError);
}

TEST_CASE("rmse properties on random vectors") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<double> m(n);
    std::vector<double> s(n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = test::uniform(rng, -1.0, 1.0);
      s[j] = test::uniform(rng, -1.0, 1.0);
      sum += (m[j] - s[j]) * (m[j] - s[j]);
    }
    const double r = rmse(m, s);
    CHECK(r >= 0.0);
    CHECK(r == doctest::Approx(std::sqrt(sum / static_cast<double>(n))).epsilon(1e-14));
    const auto e = absolute_error_series(m, s);
    REQUIRE(e.size() == n);
    double sq = 0.0;
    for (double x : e) {
      CHECK(x >= 0.0);
      sq += x * x;
    }
    CHECK(std::sqrt(sq / static_cast<double>(n)) == doctest::Approx(r).epsilon(1e-14));
  }
}

TEST_CASE("simulate_curve") {
  const DiodeModel m = test::rtc_proposed();
  CHECK(simulate_curve(m, test::rtc_conditions(), std::vector<double>{}).empty());
  const auto one = simulate_curve(m, test::rtc_conditions(), std::vector<double>{0.3});
  REQUIRE(one.size() == 1);
  CHECK(one[0] == solve_current(test::rtc_proposed(), test::rtc_conditions(), 0.3));

  const std::vector<double> v{-0.2, 0.0, 0.2, 0.4, 0.5, 0.57};
  const auto i = simulate_curve(m, test::rtc_conditions(), v);
  REQUIRE(i.size() == v.size());
  for (std::size_t k = 1; k < i.size(); ++k) CHECK(i[k] < i[k - 1]);

  DoubleDiodeParams dd{0.760810, 32.65e-8, 0.0, 1.4830, 2.0, 0.036234, 54.0092};
  const auto j = simulate_curve(DiodeModel{dd}, test::rtc_conditions(), v);
  for (std::size_t k = 0; k < v.size(); ++k) CHECK(test::currents_agree(i[k], j[k], dd.i_ph));
}

TEST_CASE("curve_rmse against a curve generated by the model") {
  MeasuredCurve curve;
  curve.temperature = 306.0;
  for (int k = 0; k < 20; ++k) {
    const double v = 0.03 * k;
    curve.points.push_back({v, solve_current(test::rtc_proposed(), test::rtc_conditions(), v)});
  }
  CHECK(curve_rmse(test::rtc_proposed(), curve) < 1e-15);
}

TEST_CASE("compare_benchmarks ranks by rmse") {
  const auto curve = load_measured_curve(test::data_file("rtc_france.csv"));
  const auto entries = load_benchmarks(test::data_file("published_benchmarks.csv"), "rtc-france");
  const auto rows = compare_benchmarks(curve, entries);
  REQUIRE(rows.size() == entries.size());
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k - 1].computed_rmse <= rows[k].computed_rmse);
  for (const auto& r : rows) {
    CHECK_FALSE(r.failed);
    CHECK(r.absolute_errors.size() == curve.points.size());
    CHECK(r.relative_deviation == doctest::Approx(r.computed_rmse / r.reported_rmse - 1.0));
  }
  CHECK(compare_benchmarks(curve, {}).empty());
}

TEST_CASE("failed simulations sort last") {
  const auto curve = load_measured_curve(test::data_file("rtc_france.csv"));
  std::vector<BenchmarkEntry> entries;
  entries.push_back({"broken", SingleDiodeParams{0.76, 1e-7, 1.5, -1.0, 50.0}, 1e-3});
  entries.push_back({"ok", test::rtc_proposed(), 7.97e-4});
  const auto rows = compare_benchmarks(curve, entries);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].label == "ok");
  CHECK(rows[1].failed);
  CHECK_FALSE(rows[1].failure.empty());
}

TEST_CASE("model kinds") {
  CHECK(parse_model_kind("single") == ModelKind::single);
  CHECK(parse_model_kind("double") == ModelKind::double_diode);
  CHECK(to_string(ModelKind::double_diode) == "double");
  CHECK_THROWS_AS(parse_model_kind("triple"), DomainError);
  CHECK(kind_of(DiodeModel{DoubleDiodeParams{}}) == ModelKind::double_diode);
}
