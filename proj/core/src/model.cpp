#include "pvsdm/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "pvsdm/error.hpp"
#include "pvsdm/lambert_w.hpp"

namespace pvsdm {

namespace {

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

struct DiodeEval {
  double residual = 0.0;
  double d_residual_di = 0.0;  // always < 0
  bool clamped = false;
};

// Shockley term I_s [exp(x) - 1] and its x-derivative I_s exp(x), with the
// exponent clamped so a hopeless trial point is flagged, not overflowed.
struct DiodeTerm {
  double current;
  double exp_scaled;
  bool clamped;
};

DiodeTerm diode_term(double i_s, double x) {
  const bool clamped = x > kMaxExponent;
  const double xc = std::min(x, kMaxExponent);
  return {i_s * std::expm1(xc), i_s * std::exp(xc), clamped};
}

DiodeEval eval_sdm(const SingleDiodeParams& p, double a, double v, double i) {
  const double vd = v + i * p.r_s;
  const DiodeTerm d = diode_term(p.i_s, vd / a);
  const double g = d.exp_scaled / a + 1.0 / p.r_sh;
  return {(p.i_ph - i) - d.current - vd / p.r_sh, -(1.0 + p.r_s * g), d.clamped};
}

DiodeEval eval_ddm(const DoubleDiodeParams& p, double a1, double a2, double v, double i) {
  const double vd = v + i * p.r_s;
  const DiodeTerm d1 = diode_term(p.i_s1, vd / a1);
  const DiodeTerm d2 = diode_term(p.i_s2, vd / a2);
  const double g = d1.exp_scaled / a1 + d2.exp_scaled / a2 + 1.0 / p.r_sh;
  return {(p.i_ph - i) - d1.current - d2.current - vd / p.r_sh, -(1.0 + p.r_s * g),
          d1.clamped || d2.clamped};
}

// Damped Newton on a residual that is smooth, strictly decreasing and
// concave in I. Steps are halved until |residual| decreases.
template <typename Eval>
double damped_newton(Eval&& eval, double i0, double i_ph, double r_s, double max_exponent_current,
                     double diode_limited_current, const NewtonOptions& opts) {
  const double tol = std::max(opts.abs_tolerance, opts.rel_tolerance * std::abs(i_ph));
  double i = i0;
  // From the right of the root Newton descends monotonically, but from deep
  // inside the exponential branch it gains only ~1 exponent unit per step.
  // Where the diode alone carries i_ph the residual is already <= 0.
  if (i0 > diode_limited_current) {
    const DiodeEval er = eval(diode_limited_current);
    if (!er.clamped && er.residual <= 0.0) i = diode_limited_current;
  }
  DiodeEval ev = eval(i);
  if (ev.clamped) {
    // The diode exponent grows with I, so back off to where it is finite.
    if (r_s <= 0.0 || !std::isfinite(max_exponent_current)) {
      throw DomainError("solve_current: diode exponent overflows at this voltage");
    }
    i = max_exponent_current;
    ev = eval(i);
    if (ev.clamped) throw DomainError("solve_current: diode exponent overflows at this voltage");
  }

  for (int it = 0; it < opts.max_iterations; ++it) {
    if (std::abs(ev.residual) <= tol) {
      // A few polishing steps, kept only while they strictly improve.
      for (int k = 0; k < 3 && ev.residual != 0.0; ++k) {
        const double trial = i - ev.residual / ev.d_residual_di;
        const DiodeEval et = eval(trial);
        if (et.clamped || !(std::abs(et.residual) < std::abs(ev.residual))) break;
        i = trial;
        ev = et;
      }
      return i;
    }
    const double step = -ev.residual / ev.d_residual_di;
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      const double trial = i + t * step;
      const DiodeEval et = eval(trial);
      if (!et.clamped && std::abs(et.residual) < std::abs(ev.residual)) {
        i = trial;
        ev = et;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (std::abs(ev.residual) <= tol) return i;
  throw SolverError("solve_current: Newton iteration did not converge", i, ev.residual);
}

double newton_start(double i_ph, double v, double voc_estimate) {
  if (!(voc_estimate > 0.0)) return 0.0;
  return std::clamp(i_ph * (1.0 - v / voc_estimate), 0.0, std::max(i_ph, 0.0));
}

double sdm_voc_estimate(const SingleDiodeParams& p, double a) {
  if (p.i_s > 0.0) return a * std::log1p(p.i_ph / p.i_s);
  return p.i_ph * p.r_sh;
}

// Current at which a diode with divisor `a` alone conducts i_ph.
double diode_limited_current(double i_ph, double i_s, double a, double r_s, double v) {
  if (r_s <= 0.0 || !(i_s > 0.0)) return std::numeric_limits<double>::infinity();
  return (a * std::log1p(i_ph / i_s) - v) / r_s;
}

// Current at which (V + I R_s)/a reaches the clamp, minus a margin.
double clamp_current(double a, double r_s, double v) {
  if (r_s <= 0.0) return std::numeric_limits<double>::infinity();
  return ((kMaxExponent - 1.0) * a - v) / r_s;
}

}  // namespace

double thermal_voltage(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError("thermal_voltage: temperature must be positive and finite (K)");
  }
  return PhysicalConstants::boltzmann * temperature / PhysicalConstants::unit_charge;
}

double Conditions::diode_voltage(double ideality) const {
  require(n_series >= 1, "n_series must be >= 1");
  return n_series * ideality * thermal_voltage(temperature);
}

void DatasheetSpec::validate() const {
  require(finite_all({i_sc, v_oc, i_mpp, v_mpp, p_mpp, temperature}),
          "datasheet: all values must be finite");
  require(i_mpp > 0.0, "datasheet: i_mpp must be > 0");
  require(i_mpp < i_sc, "datasheet: i_mpp must be < i_sc");
  require(v_mpp > 0.0, "datasheet: v_mpp must be > 0");
  require(v_mpp < v_oc, "datasheet: v_mpp must be < v_oc");
  require(n_series >= 1, "datasheet: n_series must be >= 1");
  require(temperature > 0.0, "datasheet: temperature must be > 0 K");
  require(std::abs(p_mpp - v_mpp * i_mpp) <= 0.01 * p_mpp,
          "datasheet: p_mpp must equal v_mpp * i_mpp within 1%");
}

void SingleDiodeParams::validate() const {
  require(finite_all({i_ph, i_s, n, r_s, r_sh}), "single-diode params: values must be finite");
  require(i_ph > 0.0, "single-diode params: i_ph must be > 0");
  require(i_s > 0.0, "single-diode params: i_s must be > 0");
  require(n > 0.0, "single-diode params: n must be > 0");
  require(r_s > 0.0, "single-diode params: r_s must be > 0");
  require(r_sh > 0.0, "single-diode params: r_sh must be > 0");
  require(r_sh > r_s, "single-diode params: r_sh must be > r_s");
}

void SingleDiodeParams::check_evaluable() const {
  require(finite_all({i_ph, i_s, n, r_s, r_sh}), "single-diode params: values must be finite");
  require(i_ph >= 0.0, "single-diode params: i_ph must be >= 0");
  require(i_s >= 0.0, "single-diode params: i_s must be >= 0");
  require(n > 0.0, "single-diode params: n must be > 0");
  require(r_s >= 0.0, "single-diode params: r_s must be >= 0");
  require(r_sh > 0.0, "single-diode params: r_sh must be > 0");
}

void DoubleDiodeParams::validate() const {
  require(finite_all({i_ph, i_s1, i_s2, n1, n2, r_s, r_sh}),
          "double-diode params: values must be finite");
  require(i_ph > 0.0 && i_s1 > 0.0 && i_s2 > 0.0 && n1 > 0.0 && n2 > 0.0 && r_s > 0.0 &&
              r_sh > 0.0,
          "double-diode params: all values must be > 0");
}

void DoubleDiodeParams::check_evaluable() const {
  require(finite_all({i_ph, i_s1, i_s2, n1, n2, r_s, r_sh}),
          "double-diode params: values must be finite");
  require(i_ph >= 0.0 && i_s1 >= 0.0 && i_s2 >= 0.0 && r_s >= 0.0,
          "double-diode params: currents and r_s must be >= 0");
  require(n1 > 0.0 && n2 > 0.0 && r_sh > 0.0, "double-diode params: n1, n2, r_sh must be > 0");
}

double sdm_residual(const SingleDiodeParams& p, const Conditions& c, double v, double i) {
  p.check_evaluable();
  const DiodeEval ev = eval_sdm(p, c.diode_voltage(p.n), v, i);
  if (ev.clamped) throw DomainError("sdm_residual: diode exponent exceeds the overflow guard");
  return ev.residual;
}

double ddm_residual(const DoubleDiodeParams& p, const Conditions& c, double v, double i) {
  p.check_evaluable();
  const DiodeEval ev = eval_ddm(p, c.diode_voltage(p.n1), c.diode_voltage(p.n2), v, i);
  if (ev.clamped) throw DomainError("ddm_residual: diode exponent exceeds the overflow guard");
  return ev.residual;
}

double solve_current_from(const SingleDiodeParams& p, const Conditions& c, double v, double guess,
                          const NewtonOptions& opts) {
  p.check_evaluable();
  require(std::isfinite(v), "solve_current: voltage must be finite");
  const double a = c.diode_voltage(p.n);
  return damped_newton([&](double i) { return eval_sdm(p, a, v, i); }, guess, p.i_ph, p.r_s,
                       clamp_current(a, p.r_s, v),
                       diode_limited_current(p.i_ph, p.i_s, a, p.r_s, v), opts);
}

double solve_current(const SingleDiodeParams& p, const Conditions& c, double v,
                     const NewtonOptions& opts) {
  p.check_evaluable();
  const double a = c.diode_voltage(p.n);
  return solve_current_from(p, c, v, newton_start(p.i_ph, v, sdm_voc_estimate(p, a)), opts);
}

double solve_current(const DoubleDiodeParams& p, const Conditions& c, double v,
                     const NewtonOptions& opts) {
  p.check_evaluable();
  require(std::isfinite(v), "solve_current: voltage must be finite");
  const double a1 = c.diode_voltage(p.n1);
  const double a2 = c.diode_voltage(p.n2);
  const double i_s = p.i_s1 + p.i_s2;
  const double voc = i_s > 0.0 ? std::min(a1, a2) * std::log1p(p.i_ph / i_s) : p.i_ph * p.r_sh;
  return damped_newton([&](double i) { return eval_ddm(p, a1, a2, v, i); },
                       newton_start(p.i_ph, v, voc), p.i_ph, p.r_s,
                       clamp_current(std::min(a1, a2), p.r_s, v),
                       std::min(diode_limited_current(p.i_ph, p.i_s1, a1, p.r_s, v),
                                diode_limited_current(p.i_ph, p.i_s2, a2, p.r_s, v)),
                       opts);
}

double solve_current(const DiodeModel& model, const Conditions& c, double v,
                     const NewtonOptions& opts) {
  return std::visit([&](const auto& p) { return solve_current(p, c, v, opts); }, model);
}

double solve_current_lambertw(const SingleDiodeParams& p, const Conditions& c, double v) {
  p.check_evaluable();
  require(p.r_s > 0.0, "solve_current_lambertw: r_s must be > 0");
  const double a = c.diode_voltage(p.n);
  const double sum = p.r_s + p.r_sh;
  // Work with log(theta) so huge arguments never overflow.
  const double log_theta = std::log(p.r_s * p.r_sh * p.i_s / (a * sum)) +
                           p.r_sh * (p.r_s * (p.i_ph + p.i_s) + v) / (a * sum);
  const double w = lambert_w0_of_exp(log_theta);
  return (p.r_sh * (p.i_ph + p.i_s) - v) / sum - (a / p.r_s) * w;
}

namespace detail {

double branch_conductance(const SingleDiodeParams& p, const Conditions& c, double v, double i) {
  const double a = c.diode_voltage(p.n);
  const DiodeTerm d = diode_term(p.i_s, (v + i * p.r_s) / a);
  if (d.clamped) throw DomainError("diode exponent exceeds the overflow guard");
  return d.exp_scaled / a + 1.0 / p.r_sh;
}

double implicit_slope(const SingleDiodeParams& p, const Conditions& c, double v, double i) {
  const double g = branch_conductance(p, c, v, i);
  return -g / (1.0 + p.r_s * g);
}

}  // namespace detail

double di_dv(const SingleDiodeParams& p, const Conditions& c, double v, double i) {
  const double r = sdm_residual(p, c, v, i);
  if (!(std::abs(r) <= 1e-9)) {
    throw ContractError("di_dv: (v, i) is not on the model curve (|residual| = " +
                        std::to_string(std::abs(r)) + " A)");
  }
  return detail::implicit_slope(p, c, v, i);
}

double dp_dv(const SingleDiodeParams& p, const Conditions& c, double v, double i) {
  return i + v * di_dv(p, c, v, i);
}

double dp_di(const SingleDiodeParams& p, const Conditions& c, double v, double i) {
  const double slope = di_dv(p, c, v, i);
  if (slope == 0.0) throw DomainError("dp_di: dI/dV vanishes, dV/dI is singular");
  return v + i / slope;
}

double open_circuit_voltage(const SingleDiodeParams& p, const Conditions& c) {
  p.check_evaluable();
  if (p.i_ph == 0.0) return 0.0;
  if (p.i_s == 0.0) return p.i_ph * p.r_sh;
  const double a = c.diode_voltage(p.n);
  // h(V) = residual at I = 0 is concave and decreasing; the shunt-free
  // estimate lies to the right of the root so Newton descends monotonically.
  double v = a * std::log1p(p.i_ph / p.i_s);
  for (int it = 0; it < 200; ++it) {
    const DiodeTerm d = diode_term(p.i_s, v / a);
    const double h = p.i_ph - d.current - v / p.r_sh;
    const double dh = -(d.exp_scaled / a + 1.0 / p.r_sh);
    const double step = -h / dh;
    v += step;
    if (std::abs(step) <= 1e-15 * std::abs(v)) return v;
  }
  throw SolverError("open_circuit_voltage: Newton iteration did not converge", v, 0.0);
}

double open_circuit_voltage(const DoubleDiodeParams& p, const Conditions& c) {
  p.check_evaluable();
  if (p.i_ph == 0.0) return 0.0;
  const double a1 = c.diode_voltage(p.n1);
  const double a2 = c.diode_voltage(p.n2);
  // Same concave, decreasing h(V) as the single-diode case. Either diode
  // alone already drives h to <= 0 at its own shunt-free estimate.
  double v = std::numeric_limits<double>::infinity();
  if (p.i_s1 > 0.0) v = std::min(v, a1 * std::log1p(p.i_ph / p.i_s1));
  if (p.i_s2 > 0.0) v = std::min(v, a2 * std::log1p(p.i_ph / p.i_s2));
  if (!std::isfinite(v)) return p.i_ph * p.r_sh;
  v = std::min(v, p.i_ph * p.r_sh);
  for (int it = 0; it < 200; ++it) {
    const DiodeTerm d1 = diode_term(p.i_s1, v / a1);
    const DiodeTerm d2 = diode_term(p.i_s2, v / a2);
    const double h = p.i_ph - d1.current - d2.current - v / p.r_sh;
    const double dh = -(d1.exp_scaled / a1 + d2.exp_scaled / a2 + 1.0 / p.r_sh);
    const double step = -h / dh;
    v += step;
    if (std::abs(step) <= 1e-15 * std::abs(v)) return v;
  }
  throw SolverError("open_circuit_voltage: Newton iteration did not converge", v, 0.0);
}

double open_circuit_voltage(const DiodeModel& model, const Conditions& c) {
  return std::visit([&](const auto& p) { return open_circuit_voltage(p, c); }, model);
}

DatasheetSpec key_points(const SingleDiodeParams& p, const Conditions& c) {
  const double i_sc = solve_current(p, c, 0.0);
  const double v_oc = open_circuit_voltage(p, c);
  auto stationarity = [&](double v) {
    const double i = solve_current(p, c, v);
    return i + v * detail::implicit_slope(p, c, v, i);
  };
  std::uintmax_t max_iter = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      stationarity, 0.0, v_oc, i_sc, stationarity(v_oc),
      boost::math::tools::eps_tolerance<double>(), max_iter);
  const double v_mpp = 0.5 * (lo + hi);
  const double i_mpp = solve_current(p, c, v_mpp);
  return {i_sc, v_oc, i_mpp, v_mpp, v_mpp * i_mpp, c.n_series, c.temperature};
}

}  // namespace pvsdm
