// Acceptance gates. Each criterion prints exactly one PASS/FAIL line; the
// exit status is non-zero when any selected criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "pvsdm/equations.hpp"
#include "pvsdm/error.hpp"
#include "pvsdm/io.hpp"
#include "pvsdm/model.hpp"
#include "pvsdm/solver.hpp"
#include "pvsdm/validation.hpp"
#include "support.hpp"

using namespace pvsdm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("pvsdm_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + PVSDM_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

std::vector<std::string> order_by(const std::vector<BenchmarkRow>& rows, bool reported) {
  std::vector<const BenchmarkRow*> ptrs;
  for (const auto& r : rows) ptrs.push_back(&r);
  std::stable_sort(ptrs.begin(), ptrs.end(), [&](const BenchmarkRow* a, const BenchmarkRow* b) {
    return reported ? a->reported_rmse < b->reported_rmse : a->computed_rmse < b->computed_rmse;
  });
  std::vector<std::string> labels;
  for (const auto* p : ptrs) labels.push_back(p->label);
  return labels;
}

Outcome rmse_reproduction() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& [curve_file, dataset] :
       {std::pair{"rtc_france.csv", "rtc-france"}, std::pair{"pwp201.csv", "pwp201"}}) {
    const auto curve = load_measured_curve(test::data_file(curve_file));
    const auto rows = compare_benchmarks(curve, load_benchmarks(test::data_file("published_benchmarks.csv"), dataset));
    if (rows.size() != 5) ok = false;
    for (const auto& r : rows) {
      const bool within = !r.failed && std::abs(r.relative_deviation) <= 0.10;
      ok = ok && within;
      detail += fmt::format(" {}:{}{:+.1f}%", r.label, within ? "" : "!", 100.0 * r.relative_deviation);
    }
    const bool same_order = order_by(rows, false) == order_by(rows, true);
    ok = ok && same_order;
    detail += fmt::format(" [{} order {}]", dataset, same_order ? "matches" : "differs");
  }
  const double t = seconds_since(t0);
  ok = ok && t < 5.0;
  return {ok, fmt::format("{:.3f} s;{}", t, detail)};
}

Outcome extraction_rmse() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, bound] : {std::pair{"pwp201", 5.0e-3}, std::pair{"rtc_france", 1.2e-3}}) {
    const auto report = scratch() / (std::string(name) + "_c2.json");
    const auto t0 = Clock::now();
    const int code = run_cli("extract --spec " + quoted(test::data_file(std::string(name) + ".spec")) +
                             " --curve " + quoted(test::data_file(std::string(name) + ".csv")) +
                             " --variant proposed --out " + quoted(report));
    const double t = seconds_since(t0);
    if (code != 0) {
      ok = false;
      detail += fmt::format(" {}: exit {}", name, code);
      continue;
    }
    const auto doc = read_report(report);
    const double rmse = doc.extractions.at(0).rmse.value();
    ok = ok && rmse <= bound && t < 1.0;
    detail += fmt::format(" {}: rmse {:.4e} (<= {:.1e}) in {:.3f} s", name, rmse, bound, t);
  }
  return {ok, detail};
}

Outcome residual_substitution() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, spec, p] : {std::tuple{"rtc", test::rtc_spec(), test::rtc_proposed()},
                                      std::tuple{"pwp", test::pwp_spec(), test::pwp_proposed()}}) {
    const double r[5] = {residual_sc(p, spec), residual_oc(p, spec), residual_mpp(p, spec), residual_dpdv(p, spec),
                         residual_dpdi(p, spec)};
    detail += fmt::format(" {}:", name);
    for (double x : r) {
      const bool within = std::abs(x) < 5e-3;
      ok = ok && within;
      detail += fmt::format(" {}{:.2e}", within ? "" : "!", x);
    }
  }
  return {ok, detail};
}

Outcome synthetic_round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240611);
  int recovered = 0;
  int failed_extract = 0;
  double worst_main = 0.0;
  double worst_aux = 0.0;
  for (int k = 0; k < 25; ++k) {
    SingleDiodeParams truth;
    truth.i_ph = test::uniform(rng, 0.5, 8.0);
    truth.i_s = test::log_uniform(rng, 1e-10, 1e-6);
    truth.n = test::uniform(rng, 1.0, 1.8);
    truth.r_s = test::log_uniform(rng, 5e-3, 0.5);
    truth.r_sh = test::log_uniform(rng, 50.0, 5000.0);
    const Conditions c{k % 2 == 0 ? 1 : 36, 300.0};
    ExtractionResult r;
    try {
      r = extract(key_points(truth, c), FifthEquationVariant::proposed());
    } catch (const ExtractionError&) {
      ++failed_extract;
      continue;
    }
    const double main = std::max({test::rel_diff(r.params.i_ph, truth.i_ph), test::rel_diff(r.params.n, truth.n),
                                  test::rel_diff(r.params.r_s, truth.r_s)});
    const double aux = std::max(test::rel_diff(r.params.i_s, truth.i_s), test::rel_diff(r.params.r_sh, truth.r_sh));
    worst_main = std::max(worst_main, main);
    worst_aux = std::max(worst_aux, aux);
    if (main <= 1e-4 && aux <= 1e-2 && r.residual_norm < 1e-9) ++recovered;
  }
  const double t = seconds_since(t0);
  const bool ok = recovered == 25 && t < 10.0;
  return {ok, fmt::format("{:.3f} s; {}/25 recovered, {} without a converged seed, worst Iph/n/Rs {:.2e}, "
                          "worst Is/Rsh {:.2e}",
                          t, recovered, failed_extract, worst_main, worst_aux)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(99);
  int mismatches = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto p = test::random_params(rng);
    const Conditions c{1 + static_cast<int>(rng() % 72), test::uniform(rng, 250.0, 350.0)};
    const double voc = open_circuit_voltage(p, c);
    for (int j = 0; j < 20; ++j) {
      const double v = voc * j / 19.0;
      const double a = solve_current(p, c, v);
      const double b = solve_current_lambertw(p, c, v);
      if (!test::currents_agree(a, b, p.i_ph)) ++mismatches;
      worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3 * p.i_ph}));
    }
  }
  return {mismatches == 0, fmt::format("{} of 2000 points disagree; worst scaled difference {:.2e}", mismatches, worst)};
}

Outcome derivative_suite() {
  bool ok = true;
  double worst_fd = 0.0;
  double worst_chain = 0.0;
  for (const auto& [p, c] : {std::pair{test::rtc_proposed(), test::rtc_conditions()},
                             std::pair{test::pwp_proposed(), test::pwp_conditions()}}) {
    const double voc = open_circuit_voltage(p, c);
    const double vmpp = key_points(p, c).v_mpp;
    const double h = 1e-6;
    for (int j = 0; j < 20; ++j) {
      double v = voc * (0.025 + 0.95 * j / 19.0);
      // Keep away from the power maximum, where dP/dV itself vanishes.
      if (std::abs(v - vmpp) < 0.01 * voc) v -= 0.02 * voc;
      const double i = solve_current(p, c, v);
      const double ip = solve_current(p, c, v + h);
      const double im = solve_current(p, c, v - h);
      const double fd_didv = (ip - im) / (2 * h);
      const double fd_dpdv = ((v + h) * ip - (v - h) * im) / (2 * h);
      const double fd_dpdi = ((v + h) * ip - (v - h) * im) / (ip - im);
      const double a_didv = di_dv(p, c, v, i);
      const double a_dpdv = dp_dv(p, c, v, i);
      const double a_dpdi = dp_di(p, c, v, i);
      worst_fd = std::max({worst_fd, test::rel_diff(a_didv, fd_didv), test::rel_diff(a_dpdv, fd_dpdv),
                           test::rel_diff(a_dpdi, fd_dpdi)});
      worst_chain = std::max(worst_chain, test::rel_diff(a_dpdi * a_didv, a_dpdv));
    }
  }
  ok = worst_fd <= 1e-6 && worst_chain <= 1e-12;
  return {ok, fmt::format("worst finite-difference {:.2e} (<= 1e-6), worst chain rule {:.2e} (<= 1e-12)", worst_fd,
                          worst_chain)};
}

Outcome unimodality() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, p, c] : {std::tuple{"rtc", test::rtc_proposed(), test::rtc_conditions()},
                                   std::tuple{"pwp", test::pwp_proposed(), test::pwp_conditions()}}) {
    const double voc = open_circuit_voltage(p, c);
    std::vector<double> i(200);
    std::vector<double> pw(200);
    for (int k = 0; k < 200; ++k) {
      const double v = voc * k / 199.0;
      i[k] = solve_current(p, c, v);
      pw[k] = v * i[k];
    }
    bool decreasing = true;
    int turns = 0;
    for (int k = 1; k < 200; ++k) {
      decreasing = decreasing && i[k] < i[k - 1];
      if (k > 1 && (pw[k] - pw[k - 1] < 0.0) != (pw[k - 1] - pw[k - 2] < 0.0)) ++turns;
    }
    const bool peaked = turns == 1 && pw[1] > pw[0];
    ok = ok && decreasing && peaked;
    detail += fmt::format(" {}: I {}, P {}", name, decreasing ? "decreasing" : "not decreasing",
                          peaked ? "single-peaked" : "not single-peaked");
  }
  return {ok, detail};
}

Outcome deterministic_artifacts() {
  std::vector<std::map<std::string, std::string>> runs;
  for (int k = 0; k < 2; ++k) {
    const auto dir = scratch() / ("c8_run" + std::to_string(k));
    fs::create_directories(dir);
    const int code = run_cli("extract --spec " + quoted(test::data_file("rtc_france.spec")) + " --curve " +
                             quoted(test::data_file("rtc_france.csv")) + " --out " + quoted(dir / "report.json") +
                             " --plots " + quoted(dir) + " --fixed-timestamp");
    if (code != 0) return {false, fmt::format("extract exited {}", code)};
    std::map<std::string, std::string> files;
    for (const char* f : {"report.json", "iv.svg", "pv.svg", "error.svg"}) files[f] = read_text_file(dir / f);
    runs.push_back(std::move(files));
  }
  std::string differing;
  for (const auto& [name, bytes] : runs[0]) {
    if (runs[1].at(name) != bytes) differing += " " + name;
  }
  return {differing.empty(), differing.empty() ? "report.json, iv.svg, pv.svg, error.svg identical"
                                               : "differ:" + differing};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"rmse reproduction on published sets", rmse_reproduction},
      {"extraction rmse", extraction_rmse},
      {"residual substitution", residual_substitution},
      {"synthetic round trip", synthetic_round_trip},
      {"newton vs lambert-w equivalence", oracle_equivalence},
      {"derivative suite", derivative_suite},
      {"unimodality and monotonicity", unimodality},
      {"deterministic artifacts", deterministic_artifacts},
  };
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));
  if (selected.empty()) {
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
  }
  int failures = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      fmt::print(stderr, "unknown criterion {}\n", id);
      return 2;
    }
    const auto& [name, fn] = criteria[id - 1];
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    fmt::print("{} {} {}:{}{}\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.empty() || o.detail[0] == ' ' ? "" : " ",
               o.detail);
  }
  std::error_code ec;
  fs::remove_all(scratch(), ec);
  return failures == 0 ? 0 : 1;
}
