#pragma once

#include <functional>
#include <span>

#include "dualmpc/model.hpp"
#include "dualmpc/types.hpp"
#include "dualmpc/window.hpp"

namespace dualmpc {

/// O = sum_k N(x_k, p) N(x_k, p)^T over the given measured states.
Matrix grammian_full(const Vector& p, std::span<const Vector> states, const SystemModel& model);
Matrix grammian_full(const Vector& p, const MeasurementWindow& window, const SystemModel& model);

/// One-step-ahead Grammian split O(t+1) = gamma + predicted(p, x0_t, u).
///
/// gamma holds the L-1 newest realized contributions of the window (the
/// oldest entry leaves the shifted horizon); predicted adds the state that
/// the candidate input would reach from x0_t.
struct GrammianSplit {
  Matrix gamma;
  std::function<Matrix(const Vector& p, const Vector& x0, const Vector& u)> predicted;
};

GrammianSplit split(const Vector& p, const MeasurementWindow& window, const SystemModel& model);

/// N(f(x0, u, p), p) N(f(x0, u, p), p)^T.
Matrix predicted_term(const Vector& p, const Vector& x0, const Vector& u, const SystemModel& model);

/// Smallest eigenvalue of a symmetric matrix; 2x2 uses the closed form.
/// Values in [-1e-10, 0] are clamped to 0. Throws NotSymmetric if any
/// |m - m^T| entry exceeds 1e-9.
double min_eigenvalue(const Matrix& m);

struct ObservabilityReport {
  double lambda_min = 0.0;
  Matrix matrix;
  bool level_ok = false;
};

ObservabilityReport observability_report(const Matrix& grammian, double level);

}  // namespace dualmpc
