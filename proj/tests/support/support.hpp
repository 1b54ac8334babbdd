#pragma once

#include <array>
#include <random>
#include <vector>

#include "dualmpc/controller.hpp"
#include "dualmpc/model.hpp"
#include "dualmpc/window.hpp"

namespace testsupport {

using dualmpc::Vector;

Vector v2(double a, double b);

/// Window holding `states` in order, with bearings to `p` (plus noise of
/// radius nu drawn with `seed`) and the controls that the single integrator
/// would need between consecutive states.
dualmpc::MeasurementWindow make_window(const std::vector<Vector>& states, const Vector& p, double delta = 0.1,
                                       double nu = 0.0, std::uint64_t seed = 0);

/// n states uniform in [-5, 5]^2 around p, each at least min_dist away from it.
std::vector<Vector> random_states(std::mt19937_64& rng, const Vector& p, int n, double min_dist = 0.5);

/// Random window whose Grammian at p has lambda_min >= level.
std::vector<Vector> random_observable_states(std::mt19937_64& rng, const Vector& p, int n, double level);

namespace oracle {

/// Tangential sensitivity written out component-wise from its definition.
std::array<double, 2> sensitivity(const Vector& x, const Vector& p);

/// Sum of outer products of `sensitivity` over states, plain doubles.
std::array<double, 4> grammian(const Vector& p, const std::vector<Vector>& states);

/// Smallest real eigenvalue via Eigen's general (non-symmetric) solver.
double min_eigenvalue(const dualmpc::Matrix& m);

/// Noise-free bearing cost sum |y_k - (p - x_k)/|p - x_k||^2 written out by hand.
double bearing_cost(const Vector& p, const std::vector<Vector>& states, const std::vector<Vector>& ys);

/// Objective lambda_min(Gamma + S_f(kappa + u_obs)) - c over the center and
/// `directions` evenly spaced directions at the largest admissible radius.
double brute_force_mpc(const dualmpc::MeasurementWindow& window, const Vector& p_hat, const Vector& x0,
                       const dualmpc::MpcConfig& cfg, const dualmpc::NominalFeedback& fb,
                       const dualmpc::SystemModel& model, int directions = 3600);

}  // namespace oracle
}  // namespace testsupport
