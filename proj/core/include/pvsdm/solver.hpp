#pragma once

/// \file
/// Parameter extraction: closed-form starting points, a Levenberg-Marquardt
/// solve of the five-equation system in log-parameter space, and a
/// multistart driver over the ideality factor.

#include <optional>
#include <string>
#include <vector>

#include "pvsdm/curve.hpp"
#include "pvsdm/equations.hpp"
#include "pvsdm/error.hpp"
#include "pvsdm/model.hpp"

namespace pvsdm {

struct SolverOptions {
  int max_iterations = 200;
  double residual_tolerance = 1e-10;  // on the scale-normalized residual norm
  double step_tolerance = 1e-12;      // on the largest log-parameter step
  double damping_init = 1e-3;
  std::vector<double> multistart_n_grid{1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0};
  /// Run multistart seeds concurrently. Results do not depend on it.
  bool parallel = true;

  void validate() const;
};

/// Outcome of one multistart seed.
struct StartDiagnostic {
  double n_seed = 0.0;
  bool converged = false;
  double residual_norm = 0.0;
  int iterations = 0;
  std::optional<double> rmse;
  std::string failure;

  bool operator==(const StartDiagnostic&) const = default;
};

struct ExtractionResult {
  SingleDiodeParams params;
  FifthEquation variant = FifthEquation::proposed_dpdi;
  double residual_norm = 0.0;
  std::array<double, 5> residuals{};  // natural units
  int iterations = 0;
  double jacobian_condition = 0.0;
  int jacobian_rank = 0;
  bool converged = false;
  std::optional<double> rmse;  // A, when a measured curve was supplied
  double n_seed = 0.0;
  std::vector<StartDiagnostic> starts;

  bool operator==(const ExtractionResult&) const = default;
};

/// Raised by extract() when no start converges.
class ExtractionError : public Error {
 public:
  ExtractionError(const std::string& what, std::vector<StartDiagnostic> starts)
      : Error(what), starts_(std::move(starts)) {}
  const std::vector<StartDiagnostic>& starts() const noexcept { return starts_; }

 private:
  std::vector<StartDiagnostic> starts_;
};

/// I_ph = I_sc, n = n_seed, R_s = (V_oc - V_mpp) / (2 I_mpp),
/// R_sh = V_mpp / (I_sc - I_mpp), I_s = I_sc / (exp(V_oc / (Ns n vt)) - 1).
SingleDiodeParams initial_guess(const DatasheetSpec& spec, double n_seed);

/// Levenberg-Marquardt on the normalized residuals over log(params).
/// Hitting the iteration cap is reported through `converged`, not thrown.
ExtractionResult solve(const EquationSystem& system, const SingleDiodeParams& guess,
                       const SolverOptions& opts = {});

/// Solves from every seed in opts.multistart_n_grid and keeps the best:
/// lowest RMSE against `curve` when given, else lowest residual norm; ties
/// go to the lowest seed. Throws ExtractionError if nothing converges.
ExtractionResult extract(const DatasheetSpec& spec, const FifthEquationVariant& variant,
                         const SolverOptions& opts = {}, const MeasuredCurve* curve = nullptr);

}  // namespace pvsdm
