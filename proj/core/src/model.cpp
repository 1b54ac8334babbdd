#include "dualmpc/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "dualmpc/errors.hpp"

namespace dualmpc {

bool ParamSet::contains(const Vector& p) const {
  if (lower && (p.array() < lower->array()).any()) return false;
  if (upper && (p.array() > upper->array()).any()) return false;
  return true;
}

Vector ParamSet::project(const Vector& p) const {
  Vector out = p;
  if (lower) out = out.cwiseMax(*lower);
  if (upper) out = out.cwiseMin(*upper);
  return out;
}

namespace {

// Central-difference step scaled to the magnitude of the coordinate.
double fd_step(double v) { return 1e-6 * std::max(1.0, std::abs(v)); }

}  // namespace

Matrix SystemModel::sensitivity(const Vector& x, const Vector& p) const {
  return jac_obs_p(x, p).transpose();
}

Matrix SystemModel::jac_obs_x(const Vector& x, const Vector& p) const {
  Matrix jac(obs_dim(), state_dim());
  for (int i = 0; i < state_dim(); ++i) {
    const double h = fd_step(x[i]);
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    jac.col(i) = (observe(xp, p) - observe(xm, p)) / (2.0 * h);
  }
  return jac;
}

Matrix SystemModel::jac_dyn_x(const Vector& x, const Vector& u, const Vector& p) const {
  Matrix jac(state_dim(), state_dim());
  for (int i = 0; i < state_dim(); ++i) {
    const double h = fd_step(x[i]);
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    jac.col(i) = (dynamics(xp, u, p) - dynamics(xm, u, p)) / (2.0 * h);
  }
  return jac;
}

Matrix SystemModel::jac_dyn_p(const Vector& x, const Vector& u, const Vector& p) const {
  Matrix jac(state_dim(), param_dim());
  for (int i = 0; i < param_dim(); ++i) {
    const double h = fd_step(p[i]);
    Vector pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    jac.col(i) = (dynamics(x, u, pp) - dynamics(x, u, pm)) / (2.0 * h);
  }
  return jac;
}

Vector draw_noise(const NoiseSpec& spec, int dim, std::uint64_t index) {
  if (dim < 1) throw std::invalid_argument("draw_noise: dim must be >= 1");
  Vector v = Vector::Zero(dim);
  if (spec.nu <= 0.0) return v;

  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
    norm = v.norm();
  } while (norm == 0.0);

  // Radius law r = nu * U^(1/dim) gives a uniform density on the ball.
  const double radius = spec.nu * std::pow(unif(rng), 1.0 / dim);
  v *= radius / norm;
  const double n = v.norm();
  if (n > spec.nu) v *= spec.nu / n;
  return v;
}

Eigen::Vector2d bearing_dynamics(const Eigen::Vector2d& x, const Eigen::Vector2d& u, double delta) {
  return x + delta * u;
}

Eigen::Vector2d bearing_observe(const Eigen::Vector2d& x, const Eigen::Vector2d& p) {
  const Eigen::Vector2d d = p - x;
  const double r = d.norm();
  if (r < kSingularDistance) throw SingularObservation("bearing observed at the landmark position");
  return d / r;
}

Eigen::Matrix2d bearing_jac_p(const Eigen::Vector2d& x, const Eigen::Vector2d& p) {
  const Eigen::Vector2d d = p - x;
  const double r = d.norm();
  if (r < kSingularDistance) throw SingularObservation("bearing Jacobian at the landmark position");
  const Eigen::Vector2d h = d / r;
  return (Eigen::Matrix2d::Identity() - h * h.transpose()) / r;
}

Eigen::Vector2d bearing_sensitivity(const Eigen::Vector2d& x, const Eigen::Vector2d& p) {
  const Eigen::Vector2d d = x - p;
  const double r2 = d.squaredNorm();
  if (std::sqrt(r2) < kSingularDistance) throw SingularObservation("bearing sensitivity at the landmark position");
  return Eigen::Vector2d(d[1], -d[0]) / r2;
}

BearingModel::BearingModel(BearingScenario scenario, double u_max, ParamSet params)
    : scenario_(std::move(scenario)), u_max_(u_max), params_(std::move(params)) {
  if (!(scenario_.delta > 0.0)) throw std::invalid_argument("BearingModel: delta must be > 0");
  if (!(u_max_ > 0.0)) throw std::invalid_argument("BearingModel: u_max must be > 0");
}

Vector BearingModel::dynamics(const Vector& x, const Vector& u, const Vector&) const {
  return bearing_dynamics(x.head<2>(), u.head<2>(), scenario_.delta);
}

Vector BearingModel::observe(const Vector& x, const Vector& p) const {
  return bearing_observe(x.head<2>(), p.head<2>());
}

Matrix BearingModel::jac_obs_p(const Vector& x, const Vector& p) const {
  return bearing_jac_p(x.head<2>(), p.head<2>());
}

Matrix BearingModel::sensitivity(const Vector& x, const Vector& p) const {
  return bearing_sensitivity(x.head<2>(), p.head<2>());
}

Matrix BearingModel::jac_obs_x(const Vector& x, const Vector& p) const {
  // h depends on p - x only.
  return -bearing_jac_p(x.head<2>(), p.head<2>());
}

Matrix BearingModel::jac_dyn_x(const Vector&, const Vector&, const Vector&) const {
  return Matrix::Identity(2, 2);
}

Matrix BearingModel::jac_dyn_p(const Vector&, const Vector&, const Vector&) const {
  return Matrix::Zero(2, 2);
}

}  // namespace dualmpc
