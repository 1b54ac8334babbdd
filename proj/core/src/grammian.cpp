#include "dualmpc/grammian.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "dualmpc/errors.hpp"

namespace dualmpc {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kPsdClamp = 1e-10;

void accumulate(Matrix& out, const Vector& p, const Vector& x, const SystemModel& model) {
  const Matrix n = model.sensitivity(x, p);
  out.noalias() += n * n.transpose();
}

}  // namespace

Matrix grammian_full(const Vector& p, std::span<const Vector> states, const SystemModel& model) {
  Matrix o = Matrix::Zero(model.param_dim(), model.param_dim());
  for (const Vector& x : states) accumulate(o, p, x, model);
  return o;
}

Matrix grammian_full(const Vector& p, const MeasurementWindow& window, const SystemModel& model) {
  Matrix o = Matrix::Zero(model.param_dim(), model.param_dim());
  for (int k = 0; k < window.size(); ++k) accumulate(o, p, window.state(k), model);
  return o;
}

Matrix predicted_term(const Vector& p, const Vector& x0, const Vector& u, const SystemModel& model) {
  Matrix o = Matrix::Zero(model.param_dim(), model.param_dim());
  accumulate(o, p, model.dynamics(x0, u, p), model);
  return o;
}

GrammianSplit split(const Vector& p, const MeasurementWindow& window, const SystemModel& model) {
  if (!window.full()) throw std::invalid_argument("split: window not full");
  GrammianSplit out;
  out.gamma = Matrix::Zero(model.param_dim(), model.param_dim());
  for (int k = 1; k < window.size(); ++k) accumulate(out.gamma, p, window.state(k), model);
  out.predicted = [&model](const Vector& pp, const Vector& x0, const Vector& u) {
    return predicted_term(pp, x0, u, model);
  };
  return out;
}

double min_eigenvalue(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw std::invalid_argument("min_eigenvalue: matrix must be square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) throw NotSymmetric("min_eigenvalue: matrix not symmetric");

  double lambda;
  if (m.rows() == 1) {
    lambda = m(0, 0);
  } else if (m.rows() == 2) {
    const double half_trace = 0.5 * (m(0, 0) + m(1, 1));
    const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
    const double off = 0.5 * (m(0, 1) + m(1, 0));
    // trace/2 - sqrt((trace/2)^2 - det), written in the cancellation-free form.
    lambda = half_trace - std::hypot(half_diff, off);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    lambda = solver.eigenvalues().minCoeff();
  }
  if (lambda < 0.0 && lambda >= -kPsdClamp) lambda = 0.0;
  return lambda;
}

ObservabilityReport observability_report(const Matrix& grammian, double level) {
  ObservabilityReport r;
  r.matrix = grammian;
  r.lambda_min = min_eigenvalue(grammian);
  r.level_ok = r.lambda_min >= level;
  return r;
}

}  // namespace dualmpc
