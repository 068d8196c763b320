#include "pvsdm/solver.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <utility>

#include <Eigen/Cholesky>

#include "pvsdm/validation.hpp"

namespace pvsdm {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;

constexpr double kMinDamping = 1e-15;
constexpr double kMaxDamping = 1e16;

Vec5 normalized(const ResidualVector& r) {
  Vec5 f;
  for (int k = 0; k < 5; ++k) f[k] = r.normalized(static_cast<std::size_t>(k));
  return f;
}

SingleDiodeParams from_log(const Vec5& x) { return from_vector(x.array().exp().matrix()); }

// d(normalized residual) / d(log param), from the natural-unit Jacobian.
Jacobian log_jacobian(const EquationSystem& system, const SingleDiodeParams& p) {
  const Jacobian natural = jacobian(system, p);
  const Vec5 x = to_vector(p);
  Jacobian j;
  for (int row = 0; row < 5; ++row) {
    for (int col = 0; col < 5; ++col) {
      j(row, col) = natural(row, col) * x[col] / system.scales()[static_cast<std::size_t>(row)];
    }
  }
  return j;
}

}  // namespace

void SolverOptions::validate() const {
  if (max_iterations < 1) throw DomainError("solver options: max_iterations must be >= 1");
  if (!(residual_tolerance > 0.0)) throw DomainError("solver options: residual_tolerance must be > 0");
  if (!(step_tolerance > 0.0)) throw DomainError("solver options: step_tolerance must be > 0");
  if (!(damping_init > 0.0)) throw DomainError("solver options: damping_init must be > 0");
  if (multistart_n_grid.empty()) throw DomainError("solver options: multistart grid is empty");
}

SingleDiodeParams initial_guess(const DatasheetSpec& spec, double n_seed) {
  spec.validate();
  if (!(n_seed >= 1.0 && n_seed <= 2.0)) {
    throw DomainError("initial_guess: n_seed must lie in [1, 2]");
  }
  SingleDiodeParams p;
  p.i_ph = spec.i_sc;
  p.n = n_seed;
  p.r_s = (spec.v_oc - spec.v_mpp) / (2.0 * spec.i_mpp);
  p.r_sh = spec.v_mpp / (spec.i_sc - spec.i_mpp);
  p.i_s = spec.i_sc / std::expm1(spec.v_oc / spec.conditions().diode_voltage(n_seed));
  if (!(p.i_s > 0.0) || !(p.r_sh > p.r_s)) {
    throw DomainError("initial_guess: datasheet is too degenerate for a starting point");
  }
  return p;
}

ExtractionResult solve(const EquationSystem& system, const SingleDiodeParams& guess,
                       const SolverOptions& opts) {
  opts.validate();
  guess.validate();

  Vec5 x = to_vector(guess).array().log().matrix();
  SingleDiodeParams p = from_log(x);
  ResidualVector r = system(p);
  Vec5 f = normalized(r);
  double norm = f.norm();
  Jacobian j = log_jacobian(system, p);
  double lambda = opts.damping_init;

  int it = 0;
  while (it < opts.max_iterations && norm > opts.residual_tolerance) {
    ++it;
    const Jacobian a = j.transpose() * j;
    const Vec5 g = j.transpose() * f;
    Jacobian m = a;
    m.diagonal() += lambda * a.diagonal().cwiseMax(1e-30);
    const Vec5 delta = m.ldlt().solve(-g);

    const Vec5 x_trial = x + delta;
    double norm_trial = std::numeric_limits<double>::infinity();
    SingleDiodeParams p_trial;
    ResidualVector r_trial;
    if (delta.allFinite()) {
      try {
        p_trial = from_log(x_trial);
        r_trial = system(p_trial);
        norm_trial = normalized(r_trial).norm();
      } catch (const Error&) {
        // Overflowing trial point: treat as a rejected step.
      }
    }

    if (norm_trial < norm) {
      x = x_trial;
      p = p_trial;
      r = r_trial;
      f = normalized(r);
      norm = norm_trial;
      lambda = std::max(lambda * 0.1, kMinDamping);
      if (delta.cwiseAbs().maxCoeff() < opts.step_tolerance) break;
      try {
        j = log_jacobian(system, p);
      } catch (const Error&) {
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > kMaxDamping) break;
    }
  }

  ExtractionResult out;
  out.params = p;
  out.variant = system.variant().tag;
  out.residual_norm = norm;
  out.residuals = r.values;
  out.iterations = it;
  const JacobianDiagnostics diag = diagnose(j);
  out.jacobian_condition = diag.condition;
  out.jacobian_rank = diag.rank;
  out.converged = norm <= opts.residual_tolerance;
  out.n_seed = guess.n;
  return out;
}

ExtractionResult extract(const DatasheetSpec& spec, const FifthEquationVariant& variant,
                         const SolverOptions& opts, const MeasuredCurve* curve) {
  opts.validate();
  if (curve) curve->validate();
  const EquationSystem system = build_system(spec, variant);

  using Outcome = std::pair<StartDiagnostic, std::optional<ExtractionResult>>;
  auto run = [&](double seed) -> Outcome {
    StartDiagnostic d;
    d.n_seed = seed;
    try {
      ExtractionResult res = solve(system, initial_guess(spec, seed), opts);
      d.converged = res.converged;
      d.residual_norm = res.residual_norm;
      d.iterations = res.iterations;
      if (!res.converged) {
        d.failure = "iteration limit or stagnation before residual tolerance";
        return {d, std::nullopt};
      }
      if (curve) {
        res.rmse = curve_rmse(res.params, *curve);
        d.rmse = res.rmse;
      }
      return {d, std::move(res)};
    } catch (const Error& e) {
      d.failure = e.what();
      return {d, std::nullopt};
    }
  };

  std::vector<Outcome> outcomes;
  outcomes.reserve(opts.multistart_n_grid.size());
  if (opts.parallel) {
    std::vector<std::future<Outcome>> jobs;
    for (double seed : opts.multistart_n_grid) jobs.push_back(std::async(std::launch::async, run, seed));
    for (auto& job : jobs) outcomes.push_back(job.get());
  } else {
    for (double seed : opts.multistart_n_grid) outcomes.push_back(run(seed));
  }

  std::vector<StartDiagnostic> diagnostics;
  const ExtractionResult* best = nullptr;
  auto metric = [&](const ExtractionResult& res) {
    return curve ? *res.rmse : res.residual_norm;
  };
  for (const auto& [diag, res] : outcomes) {
    diagnostics.push_back(diag);
    if (!res) continue;
    const bool better = !best || metric(*res) < metric(*best) ||
                        (metric(*res) == metric(*best) && res->n_seed < best->n_seed);
    if (better) best = &*res;
  }
  if (!best) throw ExtractionError("extract: no multistart seed converged", diagnostics);

  ExtractionResult chosen = *best;
  chosen.starts = std::move(diagnostics);
  return chosen;
}

}  // namespace pvsdm
