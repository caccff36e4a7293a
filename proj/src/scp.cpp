#include "rendopt/scp.hpp"

#include <cmath>
#include <stdexcept>

namespace rendopt {

namespace {

std::vector<Mat6> covariance_history(const std::vector<RoeState>& states,
                                     const std::vector<ControlImpulse>& controls,
                                     const TimeGrid& grid, const OrbitalElementsQNS& oe,
                                     const UncertaintyModels& models) {
  if (models.is_zero()) return std::vector<Mat6>(states.size(), Mat6::Zero());
  return propagate_covariance(states, controls, grid, oe, models);
}

double total_dv(const std::vector<ControlImpulse>& controls) {
  double j = 0.0;
  for (const auto& u : controls) j += u.norm();
  return j;
}

/// Penalized merit in the linearization's scale: sum ||u|| plus w times the
/// positive part of b_ps * (true constraint value) per node.
double merit(const std::vector<ControlImpulse>& controls, const std::vector<double>& values,
             const std::vector<LinearizedConstraint>& lin, double weight) {
  double m = total_dv(controls);
  for (size_t i = 0; i < values.size(); ++i) {
    m += weight * std::max(0.0, lin[i].b_ps * values[i]);
  }
  return m;
}

}  // namespace

NonlinearEval evaluate_nonlinear(const std::vector<RoeState>& states,
                                 const std::vector<Mat6>& covariances, const TimeGrid& grid,
                                 const SafetyConfig& safety_cfg, const OrbitalElementsQNS& oe,
                                 const Mat6& process_noise) {
  NonlinearEval out;
  const int n = static_cast<int>(states.size());
  out.values.resize(n);
  out.max_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    out.values[i] = nonlinear_constraint_value(states[i], covariances[i], i + 1, grid[i],
                                               safety_cfg, oe, process_noise);
    out.max_violation = std::max(out.max_violation, out.values[i]);
  }
  return out;
}

ScpResult scp_solve(const RoeState& x0, const RoeState& xf, const TimeGrid& grid,
                    const OrbitalElementsQNS& oe, const ScpConfig& cfg,
                    const SafetyConfig& safety_cfg, const UncertaintyModels& models,
                    const std::vector<RoeState>& warm_states,
                    const std::vector<ControlImpulse>& warm_controls) {
  const int n = grid.size();
  if (static_cast<int>(warm_states.size()) != n)
    throw std::invalid_argument("scp_solve: warm start node count mismatch");
  std::vector<ControlImpulse> ref_controls(warm_controls.begin(),
                                           warm_controls.begin() + std::min<size_t>(n - 1, warm_controls.size()));
  ref_controls.resize(n - 1, ControlImpulse::Zero());
  std::vector<RoeState> ref_states = warm_states;

  // The terminal condition is a hard equality; the initial radius must admit
  // a reference whose endpoint misses it (warm starts are not required to hit
  // the target exactly).
  double radius = cfg.r0;
  const double terminal_miss = (xf - ref_states.back()).lpNorm<Eigen::Infinity>() +
                               (x0 - ref_states.front()).lpNorm<Eigen::Infinity>();
  if (terminal_miss > radius * cfg.radius_x_unit)
    radius = std::min(cfg.r_max, 1.05 * terminal_miss / cfg.radius_x_unit);

  double weight = cfg.w0;
  ScpResult result;
  result.states = ref_states;
  result.controls = ref_controls;

  std::vector<Mat6> ref_cov = covariance_history(ref_states, ref_controls, grid, oe, models);
  NonlinearEval ref_eval =
      evaluate_nonlinear(ref_states, ref_cov, grid, safety_cfg, oe, models.process_noise);
  double ref_objective = total_dv(ref_controls);

  ConicSolver solver;
  ConicResult warm_iterate;
  bool have_warm_iterate = false;
  int consecutive_failures = 0;

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    result.iterations = iter;
    ScpIteration rec;
    rec.iter = iter;
    rec.radius = radius;
    rec.weight = weight;

    // Linearize the passive-safety constraint about the reference.
    std::vector<LinearizedConstraint> lin(n);
    bool lin_ok = true;
    for (int i = 0; i < n; ++i) {
      const SafetyEllipsoid& ell = active_ellipsoid(i + 1, safety_cfg);
      const MinSeparation sep = min_separation_instant(ref_states[i], grid[i], ell, safety_cfg, oe);
      const Mat6 cov_star =
          drift_covariance(ref_cov[i], grid[i], sep, safety_cfg, oe, models.process_noise);
      try {
        lin[i] = linearize_passive_safety(ref_states[i], cov_star, grid[i], sep.t_star, ell, oe,
                                          safety_cfg.q);
      } catch (const std::domain_error&) {
        lin_ok = false;
        break;
      }
      lin[i].node_index = i + 1;
    }

    SubproblemSolution cand;
    bool usable = false;
    if (lin_ok) {
      const ConvexSubproblem sp = build_subproblem(
          ref_states, ref_controls, lin, grid, oe, x0, xf, radius * cfg.radius_x_unit,
          radius * cfg.radius_u_unit, weight);
      cand = solve_subproblem(solver, sp, cfg.solver,
                              have_warm_iterate ? &warm_iterate : nullptr);
      usable = cand.status == SolveStatus::kOptimal ||
               (cand.status == SolveStatus::kMaxIters && cand.kkt_residual() <= 1e-5);
    }
    if (!usable) {
      rec.accepted = false;
      rec.status = lin_ok ? std::string("solver-") + to_string(cand.status) : "degenerate-reference";
      rec.objective = ref_objective;
      rec.max_violation = ref_eval.max_violation;
      result.log.push_back(rec);
      radius = std::max(radius / cfg.beta_sc, cfg.r_min);
      have_warm_iterate = false;
      if (++consecutive_failures > cfg.max_consecutive_failures) break;
      continue;
    }
    consecutive_failures = 0;
    warm_iterate = cand.raw;
    have_warm_iterate = true;

    std::vector<Mat6> cand_cov = covariance_history(cand.states, cand.controls, grid, oe, models);
    NonlinearEval cand_eval =
        evaluate_nonlinear(cand.states, cand_cov, grid, safety_cfg, oe, models.process_noise);
    const double cand_objective = total_dv(cand.controls);
    rec.objective = cand_objective;
    rec.max_violation = cand_eval.max_violation;

    const double merit_ref = merit(ref_controls, ref_eval.values, lin, weight);
    const double merit_cand = merit(cand.controls, cand_eval.values, lin, weight);
    const double predicted = std::max(0.0, merit_ref - cand.objective);
    const double actual = merit_ref - merit_cand;

    const double pred_floor = 1e-12 * std::max(1.0, std::abs(merit_ref));
    if (predicted <= pred_floor) {
      // The convexified model cannot improve on the reference.
      rec.accepted = true;
      rec.status = "stationary";
      result.log.push_back(rec);
      const double dj = std::abs(cand_objective - ref_objective);
      ref_states = cand.states;
      ref_controls = cand.controls;
      ref_cov = std::move(cand_cov);
      ref_eval = std::move(cand_eval);
      ref_objective = cand_objective;
      if (ref_eval.max_violation <= cfg.eps_feas && dj <= cfg.eps_opt) {
        result.converged = true;
        break;
      }
      weight = std::min(weight / cfg.gamma, cfg.w_max);
      continue;
    }

    const double ratio = actual / predicted;
    if (ratio >= cfg.accept_ratio) {
      rec.accepted = true;
      rec.status = "accepted";
      const double dj = std::abs(cand_objective - ref_objective);
      ref_states = cand.states;
      ref_controls = cand.controls;
      ref_cov = std::move(cand_cov);
      ref_eval = std::move(cand_eval);
      ref_objective = cand_objective;
      if (ratio >= cfg.expand_ratio)
        radius = std::min(radius * cfg.alpha2, cfg.r_max);
      else if (ratio < cfg.contract_ratio)
        radius = std::max(radius / cfg.alpha1, cfg.r_min);
      if (ref_eval.max_violation > cfg.eps_feas) weight = std::min(weight / cfg.gamma, cfg.w_max);
      result.log.push_back(rec);
      if (dj <= cfg.eps_opt && ref_eval.max_violation <= cfg.eps_feas) {
        result.converged = true;
        break;
      }
    } else {
      rec.accepted = false;
      rec.status = "rejected";
      result.log.push_back(rec);
      radius = std::max(radius / cfg.beta_sc, cfg.r_min);
    }
  }

  result.states = ref_states;
  result.controls = ref_controls;
  result.objective = ref_objective;
  result.max_violation = ref_eval.max_violation;
  result.feasible = ref_eval.max_violation <= cfg.eps_feas &&
                    (ref_states.front() - x0).lpNorm<Eigen::Infinity>() <= 1e-6 &&
                    (ref_states.back() - xf).lpNorm<Eigen::Infinity>() <= 1e-6;
  return result;
}

}  // namespace rendopt
