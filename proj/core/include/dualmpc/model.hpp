#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "dualmpc/types.hpp"

namespace dualmpc {

/// Closed convex parameter set P: either all of R^n_p or an axis-aligned box.
struct ParamSet {
  std::optional<Vector> lower;
  std::optional<Vector> upper;

  bool bounded() const { return lower.has_value() || upper.has_value(); }
  bool contains(const Vector& p) const;
  Vector project(const Vector& p) const;

  static ParamSet unbounded() { return {}; }
  static ParamSet box(Vector lo, Vector hi) { return {std::move(lo), std::move(hi)}; }
};

/// Parametrised discrete-time system x+ = f(x, u, p), y = h(x, p).
///
/// Models whose dynamics do not depend on p only need the four pure maps
/// below. Models with p-dependent dynamics should override
/// dynamics_depend_on_parameter() and, if they can, the state Jacobians
/// (the defaults fall back to central differences).
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual int param_dim() const = 0;
  virtual int obs_dim() const = 0;

  virtual Vector dynamics(const Vector& x, const Vector& u, const Vector& p) const = 0;
  virtual Vector observe(const Vector& x, const Vector& p) const = 0;
  /// n_y x n_p Jacobian of observe() with respect to p.
  virtual Matrix jac_obs_p(const Vector& x, const Vector& p) const = 0;

  /// Sensitivity block N(x, p), n_p x r, with N N^T the one-step Grammian
  /// contribution. Defaults to jac_obs_p^T.
  virtual Matrix sensitivity(const Vector& x, const Vector& p) const;

  virtual bool dynamics_depend_on_parameter() const { return false; }
  virtual Matrix jac_obs_x(const Vector& x, const Vector& p) const;
  virtual Matrix jac_dyn_x(const Vector& x, const Vector& u, const Vector& p) const;
  virtual Matrix jac_dyn_p(const Vector& x, const Vector& u, const Vector& p) const;

  /// Radius u_max of the admissible input ball U.
  virtual double input_radius() const = 0;
  virtual const ParamSet& param_set() const = 0;
};

/// Bound and seed for the bounded measurement disturbances v_t, v0_t.
struct NoiseSpec {
  double nu = 0.0;
  std::uint64_t seed = 0;
};

/// Vector drawn uniformly from the closed ball of radius spec.nu in R^dim.
/// Pure in (spec.seed, index).
Vector draw_noise(const NoiseSpec& spec, int dim, std::uint64_t index);

/// Single-integrator robot observing one landmark through unit bearings.
struct BearingScenario {
  Eigen::Vector2d p_true{5.0, 8.0};
  double delta = 0.1;
  Eigen::Vector2d x0{5.0, 10.0};
};

inline constexpr double kSingularDistance = 1e-9;

Eigen::Vector2d bearing_dynamics(const Eigen::Vector2d& x, const Eigen::Vector2d& u, double delta);
/// (p - x) / |p - x|. Throws SingularObservation when |p - x| < 1e-9.
Eigen::Vector2d bearing_observe(const Eigen::Vector2d& x, const Eigen::Vector2d& p);
/// Analytic d(bearing)/dp = (I - h h^T) / |p - x|.
Eigen::Matrix2d bearing_jac_p(const Eigen::Vector2d& x, const Eigen::Vector2d& p);
/// Tangential sensitivity H(x, p) = [x2 - p2, -(x1 - p1)] / |x - p|^2.
Eigen::Vector2d bearing_sensitivity(const Eigen::Vector2d& x, const Eigen::Vector2d& p);

class BearingModel final : public SystemModel {
 public:
  explicit BearingModel(BearingScenario scenario, double u_max = 2.0,
                        ParamSet params = ParamSet::unbounded());

  int state_dim() const override { return 2; }
  int input_dim() const override { return 2; }
  int param_dim() const override { return 2; }
  int obs_dim() const override { return 2; }

  Vector dynamics(const Vector& x, const Vector& u, const Vector& p) const override;
  Vector observe(const Vector& x, const Vector& p) const override;
  Matrix jac_obs_p(const Vector& x, const Vector& p) const override;
  Matrix sensitivity(const Vector& x, const Vector& p) const override;
  Matrix jac_obs_x(const Vector& x, const Vector& p) const override;
  Matrix jac_dyn_x(const Vector& x, const Vector& u, const Vector& p) const override;
  Matrix jac_dyn_p(const Vector& x, const Vector& u, const Vector& p) const override;

  double input_radius() const override { return u_max_; }
  const ParamSet& param_set() const override { return params_; }

  const BearingScenario& scenario() const { return scenario_; }

 private:
  BearingScenario scenario_;
  double u_max_;
  ParamSet params_;
};

}  // namespace dualmpc
