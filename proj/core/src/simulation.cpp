#include "dualmpc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dualmpc/errors.hpp"
#include "dualmpc/grammian.hpp"

namespace dualmpc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

const char* to_string(Mode mode) {
  return mode == Mode::kNominalOnly ? "nominal-only" : "observability-seeking";
}

Mode mode_from_string(const std::string& name) {
  if (name == "nominal-only" || name == "nominal") return Mode::kNominalOnly;
  if (name == "observability-seeking" || name == "active") return Mode::kObservabilitySeeking;
  throw std::invalid_argument("unknown mode '" + name + "' (expected nominal-only or observability-seeking)");
}

void SimConfig::validate() const {
  if (!(scenario.delta > 0.0)) throw std::invalid_argument("scenario.delta must be > 0");
  if (!(noise.nu >= 0.0)) throw std::invalid_argument("noise.nu must be >= 0");
  estimator.validate();
  feedback.validate();
  if (std::abs(feedback.delta - scenario.delta) > 0.0)
    throw std::invalid_argument("feedback.delta must equal scenario.delta");
  mpc.validate();
  if (!(lyapunov.lambda > 0.0)) throw std::invalid_argument("lyapunov.lambda must be > 0");
  if (steps <= estimator.window_length) throw std::invalid_argument("run.steps must exceed estimator.window_length");
  if (burn_in && (*burn_in < 0 || *burn_in >= steps))
    throw std::invalid_argument("run.burn_in must lie in [0, steps)");
}

bool SimTrace::has_oracle() const {
  return std::any_of(rows.begin(), rows.end(), [](const TraceRow& r) { return r.p_star.has_value(); });
}

double lyapunov_w(const Vector& x, const Vector& e, const NominalFeedback& fb, const LyapunovConfig& lyconf) {
  return fb.lyapunov(x) + lyconf.lambda * fb.sigma(e.norm());
}

double lyapunov_w_lower(double r, const NominalFeedback& fb, const LyapunovConfig& lyconf) {
  return std::min(fb.alpha_lower(0.5 * r), lyconf.lambda * fb.sigma(0.5 * r));
}

double lyapunov_w_upper(double r, const NominalFeedback& fb, const LyapunovConfig& lyconf) {
  return 2.0 * std::max(fb.alpha_upper(r), lyconf.lambda * fb.sigma(r));
}

SimTrace run(const SimConfig& cfg) {
  const BearingModel model(cfg.scenario, cfg.feedback.u_max);
  return run(cfg, model, cfg.scenario.p_true, cfg.scenario.x0, cfg.p_hat_init);
}

SimTrace run(const SimConfig& cfg, const SystemModel& model, const Vector& p_true, const Vector& x0,
             const Vector& p_hat_init) {
  cfg.validate();
  const int L = cfg.estimator.window_length;

  SimTrace trace;
  trace.p_true = p_true;
  trace.seed = cfg.noise.seed;
  trace.mode = cfg.mode;
  trace.nu = cfg.noise.nu;
  trace.window_length = L;
  trace.delta = cfg.scenario.delta;
  trace.rows.reserve(cfg.steps);

  MeasurementWindow window(L);
  Vector x = x0;
  EstimateState est{p_hat_init};
  Vector u_prev;

  try {
    for (long t = 0; t < cfg.steps; ++t) {
      const auto index = static_cast<std::uint64_t>(t);
      const Vector v = draw_noise(cfg.noise, model.obs_dim(), 2 * index);
      const Vector v0 = draw_noise(cfg.noise, model.state_dim(), 2 * index + 1);
      const Vector x0m = x + v0;
      const Vector y = model.observe(x, p_true) + v;
      if (t == 0) {
        window.reset(t, x0m, y);
      } else {
        window.push(x0m, y, u_prev);
      }

      TraceRow row;
      row.t = t;
      row.x = x;
      row.x0 = x0m;
      row.y = y;
      row.p_hat = est.p_hat;
      const Vector e = est.p_hat - p_true;
      row.err = e.norm();
      row.V = cfg.feedback.lyapunov(x);
      row.W = lyapunov_w(x, e, cfg.feedback, cfg.lyapunov);
      row.budget = obs_budget(x0m, cfg.mpc, cfg.feedback);

      const Vector kappa = nominal_control(x0m, est.p_hat, cfg.feedback);
      if (!window.full()) {
        row.warmup = true;
        row.u_obs = Vector::Zero(model.input_dim());
        if (cfg.warmup == WarmupKind::kArc && x0m.norm() > 0.0) {
          const Vector tangent = Eigen::Vector2d(-x0m[1], x0m[0]).normalized();
          const double r = std::min(row.budget, admissible_radius(kappa, tangent, model.input_radius()));
          row.u_obs = r * tangent;
        }
        row.u = kappa + row.u_obs;
        row.lammin = kNaN;
        row.delta = kNaN;
        row.feasible = false;
      } else {
        if (cfg.mode == Mode::kObservabilitySeeking) {
          const MpcDecision d = solve_mpc(window, est.p_hat, x0m, cfg.mpc, cfg.feedback, model);
          row.u = d.u_total;
          row.u_obs = d.u_obs;
          row.delta = d.delta;
          row.feasible = d.feasible;
        } else {
          const GrammianSplit gs = split(est.p_hat, window, model);
          row.u = kappa;
          row.u_obs = Vector::Zero(model.input_dim());
          row.delta = min_eigenvalue(gs.gamma + gs.predicted(est.p_hat, x0m, kappa));
          row.feasible = row.delta >= cfg.mpc.delta_prime;
        }
        if (!row.feasible) ++trace.infeasible_steps;
        row.lammin = min_eigenvalue(grammian_full(p_true, window, model));
        if (cfg.oracle) {
          const FullSolveResult star = full_solve(window, p_true, cfg.estimator, model);
          if (!star.converged) ++trace.oracle_nonconverged;
          row.p_star = star.p;
        }
      }

      trace.rows.push_back(row);
      x = model.dynamics(x, row.u, p_true);
      u_prev = row.u;

      if (window.full()) {
        try {
          est = fast_update(est, window, cfg.estimator, model);
        } catch (const LinearSolveFailure&) {
          ++trace.linear_solve_failures;
        }
      }
    }
  } catch (const SingularObservation& ex) {
    trace.error = std::string("SingularObservation: ") + ex.what();
  }
  return trace;
}

ErrorRecursionReport check_error_recursion(const SimTrace& trace, double gamma) {
  if (!trace.has_oracle()) throw MissingOracle("check_error_recursion needs a trace recorded with the oracle");

  std::vector<double> thresholds;
  int holds = 0;
  for (std::size_t i = 0; i + 1 < trace.rows.size(); ++i) {
    const TraceRow& row = trace.rows[i];
    if (!row.p_star) continue;
    const double e_now = row.err;
    const double e_next = trace.rows[i + 1].err;
    const double drift = (*row.p_star - trace.p_true).norm();
    const double slack = 1e-12 * (1.0 + e_now + drift);
    if (e_next <= gamma * e_now + (1.0 + gamma) * drift + slack) ++holds;

    // The right-hand side is increasing in gamma; solve for the step's threshold.
    const double denom = e_now + drift;
    double g;
    if (e_next <= drift + slack) {
      g = 0.0;
    } else if (denom <= 0.0) {
      g = std::numeric_limits<double>::infinity();
    } else {
      g = (e_next - drift) / denom;
    }
    thresholds.push_back(g);
  }

  ErrorRecursionReport report;
  report.steps = static_cast<int>(thresholds.size());
  if (thresholds.empty()) return report;
  report.fraction = static_cast<double>(holds) / report.steps;

  std::sort(thresholds.begin(), thresholds.end());
  const double all = thresholds.back();
  if (all < 1.0) report.gamma_all = all;
  const auto k = static_cast<std::size_t>(std::ceil(0.95 * report.steps));
  const double q = thresholds[std::max<std::size_t>(k, 1) - 1];
  if (q < 1.0) report.gamma_95 = q;
  return report;
}

UltimateBoundReport check_ultimate_bound(const SimTrace& trace, double gamma, double nu, int burn_in) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("check_ultimate_bound: gamma must lie in [0, 1)");
  UltimateBoundReport r;
  for (const TraceRow& row : trace.rows) {
    if (row.t > burn_in) r.max_error = std::max(r.max_error, row.err);
  }
  r.bound = (1.0 + gamma) / (1.0 - gamma) * nu;
  r.holds = r.max_error <= r.bound;
  return r;
}

LyapunovReport check_lyapunov(const SimTrace& trace, const NominalFeedback& fb, const LyapunovConfig& lyconf,
                              double small_ratio) {
  LyapunovReport r;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& row = trace.rows[i];
    const Vector e = row.p_hat - trace.p_true;
    const double w = lyapunov_w(row.x, e, fb, lyconf);
    const double chi = std::sqrt(row.x.squaredNorm() + e.squaredNorm());
    if (w < lyapunov_w_lower(chi, fb, lyconf) - 1e-12) ++r.sandwich_lower_violations;
    if (w > lyapunov_w_upper(chi, fb, lyconf) + 1e-12) ++r.sandwich_upper_violations;

    if (i + 1 == trace.rows.size()) break;
    const TraceRow& next = trace.rows[i + 1];
    const double margin = lyapunov_w(next.x, next.p_hat - trace.p_true, fb, lyconf) - w;
    r.margins.push_back(margin);
    if (margin > 0.0) {
      ++r.increases;
      const double proxy = trace.nu + (next.p_star ? (*next.p_star - trace.p_true).norm() : 0.0);
      if (proxy < small_ratio * chi) r.flagged.push_back(row.t);
    }
  }
  return r;
}

int count_constraint_violations(const SimTrace& trace, const SimConfig& cfg) {
  const BearingModel model(cfg.scenario, cfg.feedback.u_max);
  const int L = trace.window_length;
  int violations = 0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& row = trace.rows[i];
    const double budget = obs_budget(row.x0, cfg.mpc, cfg.feedback);
    if (row.u_obs.norm() > budget + 1e-12) ++violations;
    if (row.u.norm() > cfg.feedback.u_max + 1e-12) ++violations;
    if (row.warmup || !row.feasible) continue;
    // Gamma over the L-1 newest measured states plus the predicted next state.
    Matrix o = predicted_term(row.p_hat, row.x0, row.u, model);
    for (std::size_t k = i + 2 - static_cast<std::size_t>(L); k <= i; ++k) {
      const Vector h = model.sensitivity(trace.rows[k].x0, row.p_hat);
      o += h * h.transpose();
    }
    if (min_eigenvalue(o) < cfg.mpc.delta_prime - 1e-10) ++violations;
  }
  return violations;
}

RunSummary summarize(const SimTrace& trace, const SimConfig& cfg) {
  RunSummary s;
  s.mode = to_string(trace.mode);
  s.seed = trace.seed;
  s.config_hash = trace.config_hash;
  s.steps = static_cast<int>(trace.rows.size());
  s.burn_in = cfg.effective_burn_in();
  s.nu = trace.nu;
  s.error = trace.error;
  s.infeasible_steps = trace.infeasible_steps;
  s.linear_solve_failures = trace.linear_solve_failures;
  s.oracle_nonconverged = trace.oracle_nonconverged;
  if (trace.rows.empty()) return s;

  s.final_error = trace.rows.back().err;
  int post = 0, feasible = 0, low = 0;
  s.lammin_min = std::numeric_limits<double>::infinity();
  s.lammin_max = -std::numeric_limits<double>::infinity();
  for (const TraceRow& row : trace.rows) {
    if (row.t > s.burn_in) s.max_post_burn_in_error = std::max(s.max_post_burn_in_error, row.err);
    if (row.warmup) continue;
    ++post;
    if (row.feasible) ++feasible;
    if (row.lammin < 1e-3) ++low;
    s.lammin_min = std::min(s.lammin_min, row.lammin);
    s.lammin_max = std::max(s.lammin_max, row.lammin);
  }
  if (post > 0) {
    s.feasibility_rate = static_cast<double>(feasible) / post;
    s.lammin_below_1e3_rate = static_cast<double>(low) / post;
  }
  s.constraint_violations = count_constraint_violations(trace, cfg);
  s.lyapunov_increases = check_lyapunov(trace, cfg.feedback, cfg.lyapunov).increases;

  if (trace.has_oracle()) {
    const ErrorRecursionReport rec = check_error_recursion(trace, 0.99);
    s.gamma_all = rec.gamma_all;
    s.gamma_95 = rec.gamma_95;
    s.gamma_hat = rec.gamma_all ? rec.gamma_all : rec.gamma_95;
    if (s.gamma_hat) {
      s.recursion_fraction = check_error_recursion(trace, *s.gamma_hat).fraction;
      const UltimateBoundReport ub = check_ultimate_bound(trace, *s.gamma_hat, trace.nu, s.burn_in);
      s.ultimate_bound = ub.bound;
      s.ultimate_bound_ok = ub.holds;
    }
  }
  return s;
}

}  // namespace dualmpc
