#include "pvsdm/equations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/SVD>
// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>

#include "pvsdm/error.hpp"

namespace pvsdm {

std::string_view to_string(FifthEquation tag) {
  switch (tag) {
    case FifthEquation::proposed_dpdi: return "proposed";
    case FifthEquation::slope_sc: return "slope-sc";
    case FifthEquation::slope_oc: return "slope-oc";
    case FifthEquation::area: return "area";
  }
  return "unknown";
}

FifthEquation parse_fifth_equation(std::string_view text) {
  if (text == "proposed" || text == "proposed_dpdi") return FifthEquation::proposed_dpdi;
  if (text == "slope-sc" || text == "slope_sc") return FifthEquation::slope_sc;
  if (text == "slope-oc" || text == "slope_oc") return FifthEquation::slope_oc;
  if (text == "area") return FifthEquation::area;
  throw DomainError("unknown fifth-equation variant '" + std::string(text) +
                    "' (expected proposed, slope-sc, slope-oc or area)");
}

FifthEquationVariant FifthEquationVariant::area_under(std::shared_ptr<const MeasuredCurve> curve,
                                                      std::size_t n_points) {
  FifthEquationVariant v;
  v.tag = FifthEquation::area;
  v.curve = std::move(curve);
  v.n_points = n_points;
  return v;
}

void FifthEquationVariant::validate() const {
  if (tag != FifthEquation::area) return;
  if (!curve) throw DomainError("area variant requires a measured curve");
  if (n_points < 1000) throw DomainError("area variant requires n_points >= 1000");
  curve->validate();
}

double ResidualVector::norm() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) sum += normalized(k) * normalized(k);
  return std::sqrt(sum);
}

namespace {

double sdm_at(const SingleDiodeParams& p, const DatasheetSpec& spec, double v, double i) {
  return sdm_residual(p, spec.conditions(), v, i);
}

}  // namespace

double residual_sc(const SingleDiodeParams& p, const DatasheetSpec& spec) {
  return sdm_at(p, spec, 0.0, spec.i_sc);
}

double residual_oc(const SingleDiodeParams& p, const DatasheetSpec& spec) {
  return sdm_at(p, spec, spec.v_oc, 0.0);
}

double residual_mpp(const SingleDiodeParams& p, const DatasheetSpec& spec) {
  return sdm_at(p, spec, spec.v_mpp, spec.i_mpp);
}

double residual_dpdv(const SingleDiodeParams& p, const DatasheetSpec& spec) {
  p.check_evaluable();
  const double g = detail::branch_conductance(p, spec.conditions(), spec.v_mpp, spec.i_mpp);
  return spec.i_mpp - spec.v_mpp * g / (1.0 + p.r_s * g);
}

double residual_dpdi(const SingleDiodeParams& p, const DatasheetSpec& spec) {
  p.check_evaluable();
  const double g = detail::branch_conductance(p, spec.conditions(), spec.v_mpp, spec.i_mpp);
  return spec.v_mpp - spec.i_mpp * (1.0 + p.r_s * g) / g;
}

double residual_slope_sc(const SingleDiodeParams& p, const DatasheetSpec& spec) {
  p.check_evaluable();
  return detail::implicit_slope(p, spec.conditions(), 0.0, spec.i_sc) + 1.0 / p.r_sh;
}

double residual_slope_oc(const SingleDiodeParams& p, const DatasheetSpec& spec) {
  p.check_evaluable();
  if (!(p.r_s > 0.0)) throw DomainError("slope-oc residual requires r_s > 0");
  return detail::implicit_slope(p, spec.conditions(), spec.v_oc, 0.0) + 1.0 / p.r_s;
}

double trapezoid_uniform(std::span<const double> samples, double h) {
  if (samples.size() < 2) return 0.0;
  const double inner = std::accumulate(samples.begin(), samples.end(), 0.0);
  return h * (inner - 0.5 * (samples.front() + samples.back()));
}

double measured_area(const MeasuredCurve& curve, double i_sc, double v_end, std::size_t n_points) {
  curve.validate();
  if (n_points < 2) throw DomainError("measured_area: n_points must be >= 2");
  if (!(v_end > 0.0)) throw DomainError("measured_area: v_end must be > 0");

  std::vector<double> x;
  std::vector<double> y;
  x.reserve(curve.points.size() + 2);
  y.reserve(curve.points.size() + 2);
  if (curve.points.front().voltage > 0.0) {
    x.push_back(0.0);
    y.push_back(i_sc);
  }
  for (const auto& pt : curve.points) {
    x.push_back(pt.voltage);
    y.push_back(pt.current);
  }
  if (curve.points.back().voltage < v_end) {
    x.push_back(v_end);
    y.push_back(0.0);
  }

  const boost::math::interpolators::pchip<std::vector<double>> interp(std::move(x), std::move(y));
  const double h = v_end / static_cast<double>(n_points - 1);
  std::vector<double> samples(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    samples[k] = interp(std::min(v_end, h * static_cast<double>(k)));
  }
  return trapezoid_uniform(samples, h);
}

double model_area(const SingleDiodeParams& p, const Conditions& c, double v_end,
                  std::size_t n_points) {
  if (n_points < 2) throw DomainError("model_area: n_points must be >= 2");
  if (!(v_end > 0.0)) throw DomainError("model_area: v_end must be > 0");
  const double h = v_end / static_cast<double>(n_points - 1);
  std::vector<double> samples(n_points);
  samples[0] = solve_current(p, c, 0.0);
  for (std::size_t k = 1; k < n_points; ++k) {
    samples[k] = solve_current_from(p, c, h * static_cast<double>(k), samples[k - 1]);
  }
  return trapezoid_uniform(samples, h);
}

double residual_area(const SingleDiodeParams& p, const DatasheetSpec& spec,
                     const MeasuredCurve& curve, std::size_t n_points) {
  p.check_evaluable();
  return model_area(p, spec.conditions(), spec.v_oc, n_points) -
         measured_area(curve, spec.i_sc, spec.v_oc, n_points);
}

EquationSystem::EquationSystem(DatasheetSpec spec, FifthEquationVariant variant)
    : spec_(spec), variant_(std::move(variant)) {
  spec_.validate();
  variant_.validate();
  double fifth_scale = 1.0;
  switch (variant_.tag) {
    case FifthEquation::proposed_dpdi: fifth_scale = spec_.v_oc; break;
    case FifthEquation::slope_sc:
    case FifthEquation::slope_oc: fifth_scale = spec_.i_sc / spec_.v_oc; break;
    case FifthEquation::area:
      fifth_scale = spec_.i_sc * spec_.v_oc;
      measured_area_ = measured_area(*variant_.curve, spec_.i_sc, spec_.v_oc, variant_.n_points);
      break;
  }
  scales_ = {spec_.i_sc, spec_.i_sc, spec_.i_sc, spec_.i_sc, fifth_scale};
}

ResidualVector EquationSystem::operator()(const SingleDiodeParams& p) const {
  p.check_evaluable();
  ResidualVector r;
  r.scales = scales_;
  r.values[0] = residual_sc(p, spec_);
  r.values[1] = residual_oc(p, spec_);
  r.values[2] = residual_mpp(p, spec_);
  r.values[3] = residual_dpdv(p, spec_);
  switch (variant_.tag) {
    case FifthEquation::proposed_dpdi: r.values[4] = residual_dpdi(p, spec_); break;
    case FifthEquation::slope_sc: r.values[4] = residual_slope_sc(p, spec_); break;
    case FifthEquation::slope_oc: r.values[4] = residual_slope_oc(p, spec_); break;
    case FifthEquation::area:
      r.values[4] =
          model_area(p, spec_.conditions(), spec_.v_oc, variant_.n_points) - measured_area_;
      break;
  }
  for (double v : r.values) {
    if (!std::isfinite(v)) throw DomainError("equation system: non-finite residual");
  }
  return r;
}

EquationSystem build_system(const DatasheetSpec& spec, const FifthEquationVariant& variant) {
  return EquationSystem(spec, variant);
}

Eigen::Matrix<double, 5, 1> to_vector(const SingleDiodeParams& p) {
  return {p.i_ph, p.i_s, p.n, p.r_s, p.r_sh};
}

SingleDiodeParams from_vector(const Eigen::Matrix<double, 5, 1>& x) {
  return {x[0], x[1], x[2], x[3], x[4]};
}

Jacobian jacobian(const EquationSystem& system, const SingleDiodeParams& p) {
  const Eigen::Matrix<double, 5, 1> x = to_vector(p);
  const ResidualVector base = system(p);
  Jacobian j;
  for (int col = 0; col < 5; ++col) {
    Eigen::Matrix<double, 5, 1> xp = x;
    xp[col] += std::max(1e-7 * std::abs(x[col]), 1e-12);
    const double h = xp[col] - x[col];
    const ResidualVector shifted = system(from_vector(xp));
    for (int row = 0; row < 5; ++row) {
      j(row, col) = (shifted.values[row] - base.values[row]) / h;
    }
  }
  if (!j.allFinite()) throw DomainError("jacobian: non-finite entry");
  return j;
}

JacobianDiagnostics diagnose(const Jacobian& j) {
  const Eigen::JacobiSVD<Jacobian> svd(j);
  const auto& s = svd.singularValues();
  JacobianDiagnostics d;
  for (int k = 0; k < 5; ++k) d.singular_values[k] = s[k];
  d.condition = s[4] > 0.0 ? s[0] / s[4] : std::numeric_limits<double>::infinity();
  // Forward-difference Jacobians carry ~1e-7 relative noise.
  d.rank = static_cast<int>((s.array() > 1e-6 * s[0]).count());
  return d;
}

}  // namespace pvsdm
