#include "dualmpc/estimator.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "dualmpc/errors.hpp"

namespace dualmpc {

PenaltyConfig PenaltyConfig::quadratic_box(Vector lo, Vector hi, double weight) {
  PenaltyConfig cfg;
  cfg.kind = Kind::kQuadraticBox;
  cfg.lower = std::move(lo);
  cfg.upper = std::move(hi);
  cfg.weight = weight;
  return cfg;
}

double PenaltyConfig::value(const Vector& p) const {
  if (kind == Kind::kZero) return 0.0;
  const Vector outside = p - p.cwiseMax(lower).cwiseMin(upper);
  return weight * outside.squaredNorm();
}

Vector PenaltyConfig::gradient(const Vector& p) const {
  if (kind == Kind::kZero) return Vector::Zero(p.size());
  const Vector outside = p - p.cwiseMax(lower).cwiseMin(upper);
  return 2.0 * weight * outside;
}

Matrix PenaltyConfig::hessian(const Vector& p) const {
  Matrix hess = Matrix::Zero(p.size(), p.size());
  if (kind == Kind::kZero) return hess;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] < lower[i] || p[i] > upper[i]) hess(i, i) = 2.0 * weight;
  }
  return hess;
}

void EstimatorConfig::validate() const {
  if (window_length < 2) throw std::invalid_argument("estimator.window_length must be >= 2");
  if (iters_per_step < 1) throw std::invalid_argument("estimator.iters_per_step must be >= 1");
  if (!(damping > 0.0)) throw std::invalid_argument("estimator.damping must be > 0");
  if (!(full_solve_damping > 0.0)) throw std::invalid_argument("estimator.full_solve_damping must be > 0");
  if (!(full_solve_tol > 0.0)) throw std::invalid_argument("estimator.full_solve_tol must be > 0");
  if (full_solve_max_iters < 1) throw std::invalid_argument("estimator.full_solve_max_iters must be >= 1");
  if (multistart_count < 1) throw std::invalid_argument("estimator.multistart_count must be >= 1");
  if (!(jitter_radius >= 0.0)) throw std::invalid_argument("estimator.jitter_radius must be >= 0");
  if (penalty.kind == PenaltyConfig::Kind::kQuadraticBox) {
    if (penalty.lower.size() != penalty.upper.size() || penalty.lower.size() == 0)
      throw std::invalid_argument("estimator.penalty box bounds must be non-empty and of equal size");
    if (!(penalty.weight >= 0.0)) throw std::invalid_argument("estimator.penalty.weight must be >= 0");
  }
}

CostReport eval_cost(const MeasurementWindow& window, const Vector& p, const PenaltyConfig& penalty,
                     const SystemModel& model) {
  if (!window.full()) throw std::invalid_argument("eval_cost: window not full");
  const int np = model.param_dim();

  CostReport report;
  report.value = 0.0;
  report.gradient = Vector::Zero(np);
  report.gauss_newton_hessian = Matrix::Zero(np, np);

  const bool propagate = model.dynamics_depend_on_parameter();
  Vector x = window.state(0);
  Matrix dx_dp = Matrix::Zero(model.state_dim(), np);

  for (int k = 0; k < window.size(); ++k) {
    if (!propagate) x = window.state(k);
    const Vector residual = window.observation(k) - model.observe(x, p);
    Matrix jac = model.jac_obs_p(x, p);
    if (propagate) jac += model.jac_obs_x(x, p) * dx_dp;

    report.value += residual.squaredNorm();
    report.gradient.noalias() -= 2.0 * jac.transpose() * residual;
    report.gauss_newton_hessian.noalias() += jac.transpose() * jac;

    if (propagate && k + 1 < window.size()) {
      const Vector& u = window.control(k);
      dx_dp = model.jac_dyn_x(x, u, p) * dx_dp + model.jac_dyn_p(x, u, p);
      x = model.dynamics(x, u, p);
    }
  }

  report.value += penalty.value(p);
  report.gradient += penalty.gradient(p);
  report.gauss_newton_hessian += 0.5 * penalty.hessian(p);
  // Exact symmetry for downstream eigen-analysis.
  report.gauss_newton_hessian = 0.5 * (report.gauss_newton_hessian + report.gauss_newton_hessian.transpose()).eval();
  return report;
}

namespace {

// Solves (H + mu I) s = -g/2, the Gauss-Newton step for C with H the GN Hessian of C/2.
Vector damped_step(const CostReport& report, double mu) {
  const int n = static_cast<int>(report.gradient.size());
  const Matrix lhs = report.gauss_newton_hessian + mu * Matrix::Identity(n, n);
  Eigen::LDLT<Matrix> ldlt(lhs);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw LinearSolveFailure("damped normal equations are not positive definite");
  const Vector step = ldlt.solve(-0.5 * report.gradient);
  if (!step.allFinite()) throw LinearSolveFailure("damped Gauss-Newton step is not finite");
  return step;
}

double cost_or_inf(const MeasurementWindow& window, const Vector& p, const EstimatorConfig& cfg,
                   const SystemModel& model) {
  try {
    return eval_cost(window, p, cfg.penalty, model).value;
  } catch (const SingularObservation&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

EstimateState fast_update(const EstimateState& state, const MeasurementWindow& window, const EstimatorConfig& cfg,
                          const SystemModel& model) {
  const ParamSet& params = model.param_set();
  Vector p = state.p_hat;
  for (int it = 0; it < cfg.iters_per_step; ++it) {
    const CostReport report = eval_cost(window, p, cfg.penalty, model);
    if (report.gradient.isZero(0.0)) break;
    p += damped_step(report, cfg.damping);
    if (params.bounded()) p = params.project(p);
  }
  return {p};
}

FullSolveResult full_solve(const MeasurementWindow& window, const Vector& init, const EstimatorConfig& cfg,
                           const SystemModel& model) {
  const ParamSet& params = model.param_set();
  const int np = model.param_dim();

  auto solve_from = [&](Vector p) {
    FullSolveResult res;
    CostReport report = eval_cost(window, p, cfg.penalty, model);
    for (res.iterations = 0; res.iterations < cfg.full_solve_max_iters; ++res.iterations) {
      if (report.gradient.norm() <= cfg.full_solve_tol) break;
      Vector step;
      try {
        step = damped_step(report, cfg.full_solve_damping);
      } catch (const LinearSolveFailure&) {
        break;
      }
      // Backtrack until the cost decreases; a stalled search ends this start.
      bool moved = false;
      for (double alpha = 1.0; alpha > 1e-12; alpha *= 0.5) {
        Vector trial = p + alpha * step;
        if (params.bounded()) trial = params.project(trial);
        if (cost_or_inf(window, trial, cfg, model) < report.value) {
          p = std::move(trial);
          moved = true;
          break;
        }
      }
      if (!moved) break;
      report = eval_cost(window, p, cfg.penalty, model);
    }
    res.p = p;
    res.cost = report.value;
    res.gradient_norm = report.gradient.norm();
    res.converged = res.gradient_norm <= cfg.full_solve_tol;
    return res;
  };

  std::optional<FullSolveResult> best;
  for (int s = 0; s < cfg.multistart_count; ++s) {
    Vector start = init;
    if (s > 0) start += draw_noise({cfg.jitter_radius, 0x5eedULL}, np, static_cast<std::uint64_t>(s));
    if (params.bounded()) start = params.project(start);
    FullSolveResult res;
    try {
      res = solve_from(start);
    } catch (const SingularObservation&) {
      continue;
    }
    // Converged starts beat unconverged ones; then lowest cost; then first found.
    if (!best || (res.converged && !best->converged) ||
        (res.converged == best->converged && res.cost < best->cost)) {
      best = std::move(res);
    }
  }
  if (!best) throw SingularObservation("full_solve: every start hit an observation singularity");
  return *best;
}

}  // namespace dualmpc
