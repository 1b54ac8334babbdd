#include "support.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "dualmpc/grammian.hpp"

namespace testsupport {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

dualmpc::MeasurementWindow make_window(const std::vector<Vector>& states, const Vector& p, double delta,
                                       double nu, std::uint64_t seed) {
  dualmpc::MeasurementWindow w(static_cast<int>(states.size()));
  const dualmpc::NoiseSpec noise{nu, seed};
  for (std::size_t k = 0; k < states.size(); ++k) {
    Vector y = dualmpc::bearing_observe(states[k], p) + dualmpc::draw_noise(noise, 2, k);
    if (k == 0) {
      w.reset(0, states[k], y);
    } else {
      w.push(states[k], y, (states[k] - states[k - 1]) / delta);
    }
  }
  return w;
}

std::vector<Vector> random_states(std::mt19937_64& rng, const Vector& p, int n, double min_dist) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Vector> out;
  while (static_cast<int>(out.size()) < n) {
    Vector x = p + v2(u(rng), u(rng));
    if ((x - p).norm() >= min_dist) out.push_back(x);
  }
  return out;
}

std::vector<Vector> random_observable_states(std::mt19937_64& rng, const Vector& p, int n, double level) {
  // Tight clusters near the landmark are what make a window this observable.
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> rad(0.5, 2.0);
  for (;;) {
    std::vector<Vector> xs;
    for (int k = 0; k < n; ++k) {
      double a = ang(rng), r = rad(rng);
      xs.push_back(p + v2(r * std::cos(a), r * std::sin(a)));
    }
    auto g = oracle::grammian(p, xs);
    dualmpc::Matrix m(2, 2);
    m << g[0], g[1], g[2], g[3];
    if (oracle::min_eigenvalue(m) >= level) return xs;
  }
}

namespace oracle {

std::array<double, 2> sensitivity(const Vector& x, const Vector& p) {
  const double dx = x[0] - p[0];
  const double dy = x[1] - p[1];
  const double r2 = dx * dx + dy * dy;
  return {dy / r2, -dx / r2};
}

std::array<double, 4> grammian(const Vector& p, const std::vector<Vector>& states) {
  std::array<double, 4> g{0, 0, 0, 0};
  for (const auto& x : states) {
    auto h = sensitivity(x, p);
    g[0] += h[0] * h[0];
    g[1] += h[0] * h[1];
    g[2] += h[1] * h[0];
    g[3] += h[1] * h[1];
  }
  return g;
}

double min_eigenvalue(const dualmpc::Matrix& m) {
  Eigen::EigenSolver<dualmpc::Matrix> es(m, false);
  return es.eigenvalues().real().minCoeff();
}

double bearing_cost(const Vector& p, const std::vector<Vector>& states, const std::vector<Vector>& ys) {
  double c = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double dx = p[0] - states[k][0];
    const double dy = p[1] - states[k][1];
    const double r = std::sqrt(dx * dx + dy * dy);
    const double ex = ys[k][0] - dx / r;
    const double ey = ys[k][1] - dy / r;
    c += ex * ex + ey * ey;
  }
  return c;
}

double brute_force_mpc(const dualmpc::MeasurementWindow& window, const Vector& p_hat, const Vector& x0,
                       const dualmpc::MpcConfig& cfg, const dualmpc::NominalFeedback& fb,
                       const dualmpc::SystemModel& model, int directions) {
  const Vector kappa = fb.control(x0);
  const double budget = dualmpc::obs_budget(x0, cfg, fb);
  // gamma over the L-1 newest entries, rebuilt from the raw states
  std::vector<Vector> kept;
  for (int i = 1; i < window.size(); ++i) kept.push_back(window.state(i));
  auto g = grammian(p_hat, kept);

  auto objective = [&](const Vector& u_obs) {
    const Vector u = kappa + u_obs;
    const Vector next = x0 + fb.delta * u;
    auto h = sensitivity(next, p_hat);
    dualmpc::Matrix m(2, 2);
    m << g[0] + h[0] * h[0], g[1] + h[0] * h[1], g[2] + h[1] * h[0], g[3] + h[1] * h[1];
    return min_eigenvalue(m) - cfg.control_cost(u);
  };

  double best = objective(v2(0.0, 0.0));
  const double umax = model.input_radius();
  for (int i = 0; i < directions; ++i) {
    const double a = 2.0 * std::numbers::pi * i / directions;
    const Vector d = v2(std::cos(a), std::sin(a));
    // largest r with |kappa + r d| <= umax
    const double b = kappa.dot(d);
    const double disc = b * b - (kappa.squaredNorm() - umax * umax);
    const double r_adm = disc > 0.0 ? std::max(0.0, -b + std::sqrt(disc)) : 0.0;
    const double r = std::min(budget, r_adm) * (1.0 - 1e-12);
    best = std::max(best, objective(r * d));
  }
  return best;
}

}  // namespace oracle
}  // namespace testsupport
