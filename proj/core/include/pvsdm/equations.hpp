#pragma once

/// \file
/// The five-equation system closing the single-diode model: three
/// characteristic-point equations (short circuit, open circuit, MPP), the
/// dP/dV = 0 stationarity at the MPP, and one selectable fifth equation.

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "pvsdm/curve.hpp"
#include "pvsdm/model.hpp"

namespace pvsdm {

enum class FifthEquation {
  proposed_dpdi,  // dP/dI = 0 at the MPP
  slope_sc,       // dI/dV at short circuit = -1/R_sh
  slope_oc,       // dI/dV at open circuit = -1/R_s
  area,           // area under the model curve = area under the measured curve
};

enum class Interpolation { monotone_cubic };

std::string_view to_string(FifthEquation tag);

/// Accepts "proposed", "slope-sc", "slope-oc", "area" (and the enum
/// spellings with underscores). Throws DomainError otherwise.
FifthEquation parse_fifth_equation(std::string_view text);

inline constexpr std::size_t kDefaultAreaPoints = 100'000;

struct FifthEquationVariant {
  FifthEquation tag = FifthEquation::proposed_dpdi;
  // Only meaningful for the area variant.
  std::shared_ptr<const MeasuredCurve> curve;
  Interpolation interpolation = Interpolation::monotone_cubic;
  std::size_t n_points = kDefaultAreaPoints;

  static FifthEquationVariant proposed() { return {}; }
  static FifthEquationVariant slope_at_sc() { return {FifthEquation::slope_sc, {}}; }
  static FifthEquationVariant slope_at_oc() { return {FifthEquation::slope_oc, {}}; }
  static FifthEquationVariant area_under(std::shared_ptr<const MeasuredCurve> curve,
                                         std::size_t n_points = kDefaultAreaPoints);

  /// Throws DomainError if the area variant lacks a curve or has fewer than
  /// 1000 grid points.
  void validate() const;
};

/// Residual components in natural units (A, A, A, A, then V, A/V or A·V for
/// the fifth) together with the per-component scale the solver divides by.
struct ResidualVector {
  static constexpr std::array<std::string_view, 5> names{"r_sc", "r_oc", "r_mpp", "r_dpdv",
                                                         "r_fifth"};
  std::array<double, 5> values{};
  std::array<double, 5> scales{1.0, 1.0, 1.0, 1.0, 1.0};

  double normalized(std::size_t k) const { return values[k] / scales[k]; }
  /// Euclidean norm of the scale-normalized components.
  double norm() const;
};

// Characteristic-point residuals: the single-diode current equation with a
// datasheet point substituted, exponent (V + I R_s) / (Ns n vt) throughout.
double residual_sc(const SingleDiodeParams& p, const DatasheetSpec& spec);
double residual_oc(const SingleDiodeParams& p, const DatasheetSpec& spec);
double residual_mpp(const SingleDiodeParams& p, const DatasheetSpec& spec);

/// I_mpp - V_mpp g / (1 + R_s g), g the diode-branch conductance at the MPP.
double residual_dpdv(const SingleDiodeParams& p, const DatasheetSpec& spec);

/// V_mpp - I_mpp (1 + R_s g) / g.
double residual_dpdi(const SingleDiodeParams& p, const DatasheetSpec& spec);

/// dI/dV at (0, I_sc) + 1/R_sh.
double residual_slope_sc(const SingleDiodeParams& p, const DatasheetSpec& spec);

/// dI/dV at (V_oc, 0) + 1/R_s.
double residual_slope_oc(const SingleDiodeParams& p, const DatasheetSpec& spec);

/// Trapezoid sum over uniformly spaced samples with spacing h.
double trapezoid_uniform(std::span<const double> samples, double h);

/// Area under the measured curve on [0, v_end], from a shape-preserving
/// piecewise-cubic interpolant sampled on `n_points` uniform voltages.
/// When the samples do not reach 0 or v_end, the datasheet end points
/// (0, i_sc) and (v_end, 0) are added as knots.
double measured_area(const MeasuredCurve& curve, double i_sc, double v_end, std::size_t n_points);

/// Area under the model curve on [0, v_end] by the same trapezoid rule.
double model_area(const SingleDiodeParams& p, const Conditions& c, double v_end,
                  std::size_t n_points);

/// model_area - measured_area on [0, V_oc].
double residual_area(const SingleDiodeParams& p, const DatasheetSpec& spec,
                     const MeasuredCurve& curve, std::size_t n_points = kDefaultAreaPoints);

/// Residual function of one datasheet and one fifth-equation variant.
/// Immutable once built; safe to share between threads.
class EquationSystem {
 public:
  EquationSystem(DatasheetSpec spec, FifthEquationVariant variant);

  /// Throws DomainError when `p` is not evaluable (e.g. negative r_s).
  ResidualVector operator()(const SingleDiodeParams& p) const;

  const DatasheetSpec& spec() const { return spec_; }
  const FifthEquationVariant& variant() const { return variant_; }
  const std::array<double, 5>& scales() const { return scales_; }

 private:
  DatasheetSpec spec_;
  FifthEquationVariant variant_;
  std::array<double, 5> scales_{};
  double measured_area_ = 0.0;  // cached for the area variant
};

EquationSystem build_system(const DatasheetSpec& spec, const FifthEquationVariant& variant);

using Jacobian = Eigen::Matrix<double, 5, 5>;

/// Parameter order of Jacobian columns and of the solver's unknown vector.
inline constexpr std::array<std::string_view, 5> kParamNames{"i_ph", "i_s", "n", "r_s", "r_sh"};

Eigen::Matrix<double, 5, 1> to_vector(const SingleDiodeParams& p);
SingleDiodeParams from_vector(const Eigen::Matrix<double, 5, 1>& x);

/// Forward-difference Jacobian of the natural-unit residuals with respect
/// to (i_ph, i_s, n, r_s, r_sh). Step per parameter: max(1e-7 |p_j|, 1e-12).
Jacobian jacobian(const EquationSystem& system, const SingleDiodeParams& p);

struct JacobianDiagnostics {
  double condition = 0.0;  // sigma_max / sigma_min, +inf when singular
  int rank = 0;            // singular values above 1e-6 sigma_max
  std::array<double, 5> singular_values{};
};

JacobianDiagnostics diagnose(const Jacobian& j);

}  // namespace pvsdm
