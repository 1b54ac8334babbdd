#pragma once

#include "dualmpc/model.hpp"
#include "dualmpc/types.hpp"
#include "dualmpc/window.hpp"

namespace dualmpc {

/// Penalty theta(p): zero, or weight * squared distance to a box.
struct PenaltyConfig {
  enum class Kind { kZero, kQuadraticBox };

  Kind kind = Kind::kZero;
  Vector lower;
  Vector upper;
  double weight = 1.0;

  double value(const Vector& p) const;
  Vector gradient(const Vector& p) const;
  Matrix hessian(const Vector& p) const;

  static PenaltyConfig zero() { return {}; }
  static PenaltyConfig quadratic_box(Vector lo, Vector hi, double weight);
};

struct EstimatorConfig {
  int window_length = 10;
  int iters_per_step = 10;
  /// Levenberg damping of the fast update, in Grammian units. Directions
  /// observed at level lambda contract by damping / (lambda + damping) per
  /// iteration; directions with lambda << damping are held in place.
  double damping = 1.0;
  /// Damping floor of the full-solve oracle (kept small so it converges).
  double full_solve_damping = 1e-8;
  double full_solve_tol = 1e-9;
  int full_solve_max_iters = 200;
  int multistart_count = 5;
  double jitter_radius = 0.5;
  PenaltyConfig penalty;

  void validate() const;
};

struct EstimateState {
  Vector p_hat;
};

/// Value of C(p) = sum_k |y_k - h(x_k, p)|^2 + theta(p), its gradient, and
/// the Gauss-Newton Hessian of C/2 (sum J_k^T J_k + hess(theta)/2), which at
/// theta = 0 is exactly the window's Observability Grammian.
struct CostReport {
  double value = 0.0;
  Vector gradient;
  Matrix gauss_newton_hessian;
};

CostReport eval_cost(const MeasurementWindow& window, const Vector& p, const PenaltyConfig& penalty,
                     const SystemModel& model);

/// Fixed-budget damped Gauss-Newton update p_hat(t+1) = psi_t(p_hat(t)).
/// Throws LinearSolveFailure when the damped normal equations degenerate.
EstimateState fast_update(const EstimateState& state, const MeasurementWindow& window,
                          const EstimatorConfig& cfg, const SystemModel& model);

struct FullSolveResult {
  Vector p;
  double cost = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  /// False is the NonConvergence outcome: no start reached full_solve_tol.
  bool converged = false;
};

/// Multistart damped Gauss-Newton to convergence; oracle for the window minimiser p*.
FullSolveResult full_solve(const MeasurementWindow& window, const Vector& init, const EstimatorConfig& cfg,
                           const SystemModel& model);

}  // namespace dualmpc
