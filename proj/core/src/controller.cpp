#include "dualmpc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dualmpc {

void NominalFeedback::validate() const {
  if (!(gain > 0.0)) throw std::invalid_argument("feedback.gain must be > 0");
  if (!(r_sat > 0.0)) throw std::invalid_argument("feedback.r_sat must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("scenario.delta must be > 0");
  if (!(gain * r_sat < u_max)) throw std::invalid_argument("feedback.u_max must exceed gain * r_sat");
  if (!(delta * gain < 1.0)) throw std::invalid_argument("feedback.gain: delta * gain must be < 1");
}

double NominalFeedback::magnitude(double r) const {
  if (r <= r_sat) return gain * r;
  const double a = gain * r_sat;
  const double b = u_max - a;
  return a + b * std::tanh(gain * (r - r_sat) / b);
}

Vector NominalFeedback::control(const Vector& x, const Vector&) const {
  const double r = x.norm();
  if (r == 0.0) return Vector::Zero(x.size());
  return -(magnitude(r) / r) * x;
}

double NominalFeedback::alpha(double r) const { return delta * gain * std::min(r, r_sat); }

void MpcConfig::validate() const {
  if (!(delta_prime > 0.0)) throw std::invalid_argument("mpc.delta_prime must be > 0");
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("mpc.mu must lie in (0, 1)");
  if (!(control_cost_weight >= 0.0)) throw std::invalid_argument("mpc.control_cost_weight must be >= 0");
  if (ring_samples < 1) throw std::invalid_argument("mpc.ring_samples must be >= 1");
  if (refine_iters < 0) throw std::invalid_argument("mpc.refine_iters must be >= 0");
}

Vector nominal_control(const Vector& x, const Vector& p_hat, const NominalFeedback& fb) {
  return fb.control(x, p_hat);
}

double obs_budget(const Vector& x, const MpcConfig& cfg, const NominalFeedback& fb) {
  return fb.sigma_inverse(0.5 * cfg.mu * fb.alpha(0.5 * x.norm()));
}

double admissible_radius(const Vector& kappa, const Vector& direction, double u_max) {
  const double kd = kappa.dot(direction);
  const double disc = kd * kd - kappa.squaredNorm() + u_max * u_max;
  if (disc < 0.0) return 0.0;
  // Pulled inside by a relative 1e-12 so the total input never rounds out of U.
  return std::max(0.0, (-kd + std::sqrt(disc)) * (1.0 - 1e-12));
}

namespace {

struct Candidate {
  double radius = 0.0;
  double angle = 0.0;
  Vector u_obs;
  double g = -std::numeric_limits<double>::infinity();
};

}  // namespace

MpcDecision solve_mpc(const MeasurementWindow& window, const Vector& p_hat, const Vector& x0_t,
                      const MpcConfig& cfg, const NominalFeedback& fb, const SystemModel& model) {
  if (model.input_dim() != 2) throw std::invalid_argument("solve_mpc: ring search requires a 2-D input");

  const Vector kappa = fb.control(x0_t, p_hat);
  const double budget = obs_budget(x0_t, cfg, fb);
  const double u_max = model.input_radius();
  const GrammianSplit gs = split(p_hat, window, model);

  auto objective = [&](const Vector& u_obs) {
    const Vector u = kappa + u_obs;
    return min_eigenvalue(gs.gamma + gs.predicted(p_hat, x0_t, u)) - cfg.control_cost(u);
  };
  auto max_radius = [&](double angle) {
    const Vector d = Eigen::Vector2d(std::cos(angle), std::sin(angle));
    return std::min(budget, admissible_radius(kappa, d, u_max));
  };
  auto make = [&](double radius, double angle) {
    Candidate c;
    c.radius = std::clamp(radius, 0.0, max_radius(angle));
    c.angle = angle;
    c.u_obs = c.radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    c.g = objective(c.u_obs);
    return c;
  };
  // Higher g wins; equal g goes to the smaller corrective input.
  auto better = [](const Candidate& a, const Candidate& b) {
    return a.g > b.g || (a.g == b.g && a.radius < b.radius);
  };

  Candidate best = make(0.0, 0.0);
  if (budget > 0.0) {
    const double dphi = 2.0 * std::numbers::pi / cfg.ring_samples;
    for (int i = 0; i < cfg.ring_samples; ++i) {
      const double angle = i * dphi;
      Candidate c = make(budget, angle);
      if (better(c, best)) best = std::move(c);
    }

    double step_angle = 0.5 * dphi;
    double step_radius = 0.25 * budget;
    for (int it = 0; it < cfg.refine_iters; ++it) {
      Candidate round_best = best;
      const double r = best.radius;
      const double a = best.angle;
      for (const auto& [dr, da] : {std::pair{0.0, step_angle}, std::pair{0.0, -step_angle},
                                   std::pair{step_radius, 0.0}, std::pair{-step_radius, 0.0}}) {
        // Angular moves ride the boundary when the incumbent sits on it.
        const bool on_boundary = r >= max_radius(a) - 1e-12 * (1.0 + budget);
        const double radius = (da != 0.0 && on_boundary) ? budget : r + dr;
        Candidate c = make(radius, a + da);
        if (better(c, round_best)) round_best = std::move(c);
      }
      if (round_best.g > best.g) {
        best = std::move(round_best);
      } else {
        step_angle *= 0.5;
        step_radius *= 0.5;
      }
    }
  }

  MpcDecision d;
  d.u_obs = best.u_obs;
  d.u_total = kappa + best.u_obs;
  d.budget = budget;
  d.objective = best.g;
  d.delta = min_eigenvalue(gs.gamma + gs.predicted(p_hat, x0_t, d.u_total));
  d.feasible = d.delta >= cfg.delta_prime;
  return d;
}

}  // namespace dualmpc
