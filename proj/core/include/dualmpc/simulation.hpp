#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualmpc/controller.hpp"
#include "dualmpc/estimator.hpp"
#include "dualmpc/model.hpp"
#include "dualmpc/types.hpp"

namespace dualmpc {

enum class Mode { kNominalOnly, kObservabilitySeeking };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/// Weight lambda of W(chi) = V(x) + lambda sigma(|e|).
struct LyapunovConfig {
  double lambda = 1.0;
};

/// Input policy while the window fills (t < L-1). kKappa applies the nominal
/// feedback; kArc adds a tangential component of magnitude obs_budget(x0).
enum class WarmupKind { kKappa, kArc };

struct SimConfig {
  BearingScenario scenario;
  Eigen::Vector2d p_hat_init{3.0, 10.0};
  NoiseSpec noise{0.03, 0};
  EstimatorConfig estimator;
  NominalFeedback feedback;
  MpcConfig mpc;
  LyapunovConfig lyapunov;
  int steps = 300;
  Mode mode = Mode::kObservabilitySeeking;
  bool oracle = false;
  /// Defaults to 3 L when unset.
  std::optional<int> burn_in;
  WarmupKind warmup = WarmupKind::kKappa;

  int effective_burn_in() const { return burn_in.value_or(3 * estimator.window_length); }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TraceRow {
  long t = 0;
  Vector x, x0, y;
  Vector u, u_obs;
  Vector p_hat;
  double err = 0.0;
  /// lambda_min of the realized window Grammian at the true parameter (NaN in warmup).
  double lammin = 0.0;
  /// Certified lambda_min of Gamma(p_hat) + S_f(p_hat, x0, u) (NaN in warmup).
  double delta = 0.0;
  bool feasible = false;
  double V = 0.0;
  double W = 0.0;
  double budget = 0.0;
  /// Full-solve minimiser of the window ending at t (the window psi_t consumes).
  std::optional<Vector> p_star;
  bool warmup = false;
};

struct SimTrace {
  std::vector<TraceRow> rows;
  Vector p_true;
  std::uint64_t seed = 0;
  std::string config_hash;
  Mode mode = Mode::kObservabilitySeeking;
  double nu = 0.0;
  int window_length = 0;
  double delta = 0.0;
  int infeasible_steps = 0;
  int linear_solve_failures = 0;
  int oracle_nonconverged = 0;
  /// Set when the run aborted (e.g. SingularObservation); rows hold the partial trace.
  std::optional<std::string> error;

  bool has_oracle() const;
};

/// Closed loop of the true single integrator, the fast MHPE and either the
/// nominal feedback or the observability-seeking MPC.
///
/// Per step t: measure x0_t and y_t with fresh bounded noise; choose u_t with
/// p_hat_t; advance the true state with p_true; then p_hat_{t+1} =
/// fast_update(p_hat_t) on the window ending at t.
SimTrace run(const SimConfig& cfg);
SimTrace run(const SimConfig& cfg, const SystemModel& model, const Vector& p_true, const Vector& x0,
             const Vector& p_hat_init);

struct ErrorRecursionReport {
  int steps = 0;
  /// Fraction of steps with |e_{t+1}| <= g |e_t| + (1 + g) |p*_t - p_true| at the supplied g.
  double fraction = 0.0;
  /// Smallest gamma in [0, 1) for which every step holds; empty if none exists.
  std::optional<double> gamma_all;
  /// Smallest gamma in [0, 1) for which at least 95% of the steps hold.
  std::optional<double> gamma_95;
};

/// Throws MissingOracle when the trace was recorded without p*.
ErrorRecursionReport check_error_recursion(const SimTrace& trace, double gamma);

struct UltimateBoundReport {
  double max_error = 0.0;
  double bound = 0.0;
  bool holds = false;
};

UltimateBoundReport check_ultimate_bound(const SimTrace& trace, double gamma, double nu, int burn_in);

struct LyapunovReport {
  /// W(chi_{t+1}) - W(chi_t) for consecutive rows.
  std::vector<double> margins;
  int increases = 0;
  /// Steps where W increases although the disturbance proxy is below
  /// `small_ratio` times |chi_t|.
  std::vector<long> flagged;
  int sandwich_lower_violations = 0;
  int sandwich_upper_violations = 0;
};

LyapunovReport check_lyapunov(const SimTrace& trace, const NominalFeedback& fb, const LyapunovConfig& lyconf,
                              double small_ratio = 0.1);

/// W(chi) for chi = (x, e).
double lyapunov_w(const Vector& x, const Vector& e, const NominalFeedback& fb, const LyapunovConfig& lyconf);
/// Lower and upper comparison functions of W evaluated at r = |chi|. The
/// upper one is 2 max(alpha_upper, lambda sigma)(r): V(x) + lambda sigma(|e|)
/// can exceed max(alpha_upper, lambda sigma)(|chi|) when both terms are active.
double lyapunov_w_lower(double r, const NominalFeedback& fb, const LyapunovConfig& lyconf);
double lyapunov_w_upper(double r, const NominalFeedback& fb, const LyapunovConfig& lyconf);

struct RunSummary {
  std::string mode;
  std::uint64_t seed = 0;
  std::string config_hash;
  int steps = 0;
  int burn_in = 0;
  double nu = 0.0;
  double final_error = 0.0;
  double max_post_burn_in_error = 0.0;
  double feasibility_rate = 0.0;
  double lammin_min = 0.0;
  double lammin_max = 0.0;
  double lammin_below_1e3_rate = 0.0;
  int constraint_violations = 0;
  int infeasible_steps = 0;
  int linear_solve_failures = 0;
  int oracle_nonconverged = 0;
  std::optional<double> gamma_hat;
  std::optional<double> gamma_all;
  std::optional<double> gamma_95;
  std::optional<double> recursion_fraction;
  std::optional<double> ultimate_bound;
  std::optional<bool> ultimate_bound_ok;
  int lyapunov_increases = 0;
  std::optional<std::string> error;
};

/// Per-row constraint check: |u_obs| <= budget, u in U, and feasible rows
/// have lambda_min >= delta' on recomputation from the trace.
int count_constraint_violations(const SimTrace& trace, const SimConfig& cfg);

RunSummary summarize(const SimTrace& trace, const SimConfig& cfg);

}  // namespace dualmpc
