#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

#include "pvsdm/io.hpp"
#include "pvsdm/model.hpp"
#include "pvsdm/solver.hpp"
#include "pvsdm/validation.hpp"

namespace {

using namespace pvsdm;

const std::filesystem::path kData = PVSDM_BENCH_DATA_DIR;

const SingleDiodeParams kRtc{0.760810, 32.65e-8, 1.4830, 0.036234, 54.0092};
const Conditions kRtcConditions{1, 306.0};

void BM_SolveCurrentNewton(benchmark::State& state) {
  double v = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_current(kRtc, kRtcConditions, v));
    v = v > 0.57 ? 0.0 : v + 0.01;
  }
}
BENCHMARK(BM_SolveCurrentNewton);

void BM_SolveCurrentLambertW(benchmark::State& state) {
  double v = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_current_lambertw(kRtc, kRtcConditions, v));
    v = v > 0.57 ? 0.0 : v + 0.01;
  }
}
BENCHMARK(BM_SolveCurrentLambertW);

void BM_KeyPoints(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(key_points(kRtc, kRtcConditions));
}
BENCHMARK(BM_KeyPoints);

void BM_Extract(benchmark::State& state, const std::string& name, bool parallel) {
  const auto spec = load_spec(kData / (name + ".spec"));
  const auto curve = load_measured_curve(kData / (name + ".csv"));
  SolverOptions opts;
  opts.parallel = parallel;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract(spec, FifthEquationVariant::proposed(), opts, &curve));
  }
}
BENCHMARK_CAPTURE(BM_Extract, rtc_serial, std::string("rtc_france"), false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Extract, rtc_parallel, std::string("rtc_france"), true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Extract, pwp_serial, std::string("pwp201"), false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Extract, pwp_parallel, std::string("pwp201"), true)->Unit(benchmark::kMillisecond);

void BM_CompareBenchmarks(benchmark::State& state) {
  const auto curve = load_measured_curve(kData / "rtc_france.csv");
  const auto entries = load_benchmarks(kData / "published_benchmarks.csv", "rtc-france");
  for (auto _ : state) benchmark::DoNotOptimize(compare_benchmarks(curve, entries));
}
BENCHMARK(BM_CompareBenchmarks)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
