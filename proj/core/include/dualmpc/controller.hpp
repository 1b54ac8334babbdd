#pragma once

#include "dualmpc/grammian.hpp"
#include "dualmpc/model.hpp"
#include "dualmpc/types.hpp"
#include "dualmpc/window.hpp"

namespace dualmpc {

/// Smoothly saturated linear feedback kappa(x) = -k x s(|x|) for a single
/// integrator x+ = x + delta u, with its ISS-Lyapunov data
///   V(x) = |x|,  alpha(r) = delta k min(r, r_sat),  sigma(r) = delta r.
///
/// The magnitude k r s(r) is linear up to r_sat and then follows
/// a + b tanh(k (r - r_sat) / b) with a = k r_sat, b = u_max - a, so it is
/// C^2, strictly increasing and bounded by u_max.
struct NominalFeedback {
  double gain = 1.0;
  double r_sat = 1.0;
  double u_max = 2.0;
  double delta = 0.1;

  void validate() const;

  /// p_hat is accepted for the general kappa(x, p) signature; unused here.
  Vector control(const Vector& x, const Vector& p_hat = {}) const;
  double magnitude(double r) const;

  double lyapunov(const Vector& x) const { return x.norm(); }
  double alpha(double r) const;
  double sigma(double r) const { return delta * r; }
  double sigma_inverse(double s) const { return s / delta; }
  /// Comparison bounds on V: alpha_lower(|x|) <= V(x) <= alpha_upper(|x|).
  double alpha_lower(double r) const { return r; }
  double alpha_upper(double r) const { return r; }
};

struct MpcConfig {
  double delta_prime = 1.0;
  double mu = 0.5;
  /// c(u) = control_cost_weight * |u|^2 on the total input.
  double control_cost_weight = 0.0;
  int ring_samples = 64;
  int refine_iters = 20;

  void validate() const;
  double control_cost(const Vector& u) const { return control_cost_weight * u.squaredNorm(); }
};

struct MpcDecision {
  Vector u_obs;
  Vector u_total;
  double delta = 0.0;
  /// False is the InfeasibleStep outcome; the best-effort input is still returned.
  bool feasible = false;
  double budget = 0.0;
  /// Objective lambda_min(...) - c(u_total) at the returned candidate.
  double objective = 0.0;
};

Vector nominal_control(const Vector& x, const Vector& p_hat, const NominalFeedback& fb);

/// Radius sigma^-1((mu/2) alpha(|x|/2)) that keeps u_obs from undoing the
/// nominal Lyapunov decrease.
double obs_budget(const Vector& x, const MpcConfig& cfg, const NominalFeedback& fb);

/// Largest r >= 0 with |kappa + r d| <= u_max for a unit direction d.
double admissible_radius(const Vector& kappa, const Vector& direction, double u_max);

/// One-step observability-seeking MPC: maximise
///   g(u_obs) = lambda_min(Gamma + S_f(p_hat, x0_t, kappa + u_obs)) - c(kappa + u_obs)
/// over |u_obs| <= budget and kappa + u_obs in U, by a ring of candidate
/// directions at the largest admissible radius plus the centre, followed by a
/// shrinking pattern search over (radius, angle). Requires n_u = 2.
MpcDecision solve_mpc(const MeasurementWindow& window, const Vector& p_hat, const Vector& x0_t,
                      const MpcConfig& cfg, const NominalFeedback& fb, const SystemModel& model);

}  // namespace dualmpc
