#pragma once

/// \file
/// Single- and double-diode equivalent circuit of a PV cell string: domain
/// types, the implicit current equation, its numerical and closed-form
/// solutions, and the derivative chain dI/dV, dP/dV, dP/dI.
///
/// All functions are pure. Temperatures are Kelvin.

#include <variant>

namespace pvsdm {

/// CODATA 2018 exact values.
struct PhysicalConstants {
  static constexpr double boltzmann = 1.380649e-23;     // J/K
  static constexpr double unit_charge = 1.602176634e-19;  // C
};

/// Number of series cells and absolute temperature of the string.
struct Conditions {
  int n_series = 1;
  double temperature = 298.15;  // K

  /// Ns * n * k T / q, the exponent divisor of a diode with ideality `n`.
  double diode_voltage(double ideality) const;

  bool operator==(const Conditions&) const = default;
};

/// Datasheet key points: short circuit, open circuit and maximum power.
struct DatasheetSpec {
  double i_sc = 0.0;   // A
  double v_oc = 0.0;   // V
  double i_mpp = 0.0;  // A
  double v_mpp = 0.0;  // V
  double p_mpp = 0.0;  // W
  int n_series = 1;
  double temperature = 298.15;  // K

  Conditions conditions() const { return {n_series, temperature}; }

  /// Throws DomainError naming the first violated constraint.
  void validate() const;

  bool operator==(const DatasheetSpec&) const = default;
};

struct SingleDiodeParams {
  double i_ph = 0.0;  // photon current, A
  double i_s = 0.0;   // saturation current, A
  double n = 1.0;     // ideality factor
  double r_s = 0.0;   // series resistance, Ohm
  double r_sh = 0.0;  // shunt resistance, Ohm

  /// Full invariant: every field strictly positive and r_sh > r_s.
  void validate() const;

  /// Weaker check used by the evaluators. Admits the limiting cases
  /// r_s = 0, i_s = 0 and i_ph = 0, which are physically meaningful
  /// circuits even though they are never extraction results.
  void check_evaluable() const;

  bool operator==(const SingleDiodeParams&) const = default;
};

struct DoubleDiodeParams {
  double i_ph = 0.0;
  double i_s1 = 0.0;
  double i_s2 = 0.0;
  double n1 = 1.0;
  double n2 = 2.0;
  double r_s = 0.0;
  double r_sh = 0.0;

  void validate() const;
  void check_evaluable() const;

  bool operator==(const DoubleDiodeParams&) const = default;
};

using DiodeModel = std::variant<SingleDiodeParams, DoubleDiodeParams>;

/// Settings of the damped Newton iteration behind solve_current.
struct NewtonOptions {
  int max_iterations = 100;
  double abs_tolerance = 1e-12;  // A
  double rel_tolerance = 1e-12;  // relative to i_ph
};

/// k T / q. Throws DomainError for T <= 0.
double thermal_voltage(double temperature);

/// Exponents above this are clamped before exp(); a clamped evaluation is
/// reported as non-physical instead of returning an overflowed value.
inline constexpr double kMaxExponent = 700.0;

/// I_ph - I_s [exp((V + I R_s)/(Ns n vt)) - 1] - (V + I R_s)/R_sh - I.
/// Throws DomainError when the diode exponent would overflow.
double sdm_residual(const SingleDiodeParams& p, const Conditions& c, double v, double i);

/// Two-diode counterpart of sdm_residual.
double ddm_residual(const DoubleDiodeParams& p, const Conditions& c, double v, double i);

/// Terminal current at voltage `v`, by damped Newton on the residual.
/// Throws SolverError (carrying the last iterate) on non-convergence.
double solve_current(const SingleDiodeParams& p, const Conditions& c, double v,
                     const NewtonOptions& opts = {});
double solve_current(const DoubleDiodeParams& p, const Conditions& c, double v,
                     const NewtonOptions& opts = {});
double solve_current(const DiodeModel& model, const Conditions& c, double v,
                     const NewtonOptions& opts = {});

/// Same as solve_current but starting Newton from `guess`. Used when
/// sweeping a fine voltage grid where the previous point is a good start.
double solve_current_from(const SingleDiodeParams& p, const Conditions& c, double v,
                          double guess, const NewtonOptions& opts = {});

/// Explicit single-diode current through the principal branch of the
/// Lambert W function. Requires r_s > 0 and a finite r_sh. Intended as an
/// independent cross-check of solve_current.
double solve_current_lambertw(const SingleDiodeParams& p, const Conditions& c, double v);

/// Slope dI/dV of the characteristic at an on-curve point (v, i).
/// Throws ContractError if |residual(v, i)| > 1e-9.
double di_dv(const SingleDiodeParams& p, const Conditions& c, double v, double i);

/// dP/dV = I + V dI/dV at an on-curve point.
double dp_dv(const SingleDiodeParams& p, const Conditions& c, double v, double i);

/// dP/dI = V + I dV/dI at an on-curve point. Throws DomainError when the
/// slope vanishes.
double dp_di(const SingleDiodeParams& p, const Conditions& c, double v, double i);

/// Voltage at which the model current is zero.
double open_circuit_voltage(const SingleDiodeParams& p, const Conditions& c);
double open_circuit_voltage(const DoubleDiodeParams& p, const Conditions& c);
double open_circuit_voltage(const DiodeModel& model, const Conditions& c);

/// Key points (Isc, Voc, MPP) of the model's own characteristic. The MPP is
/// the root of dP/dV located by bracketing on (0, Voc).
DatasheetSpec key_points(const SingleDiodeParams& p, const Conditions& c);

namespace detail {

/// Diode-branch conductance g = (I_s / a) exp((V + I R_s)/a) + 1/R_sh,
/// evaluated at an arbitrary (v, i), on the curve or not.
double branch_conductance(const SingleDiodeParams& p, const Conditions& c, double v, double i);

/// dI/dV implied by implicit differentiation at an arbitrary (v, i):
/// -g / (1 + R_s g). Equals di_dv() on the curve.
double implicit_slope(const SingleDiodeParams& p, const Conditions& c, double v, double i);

}  // namespace detail

}  // namespace pvsdm
