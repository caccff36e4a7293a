#pragma once

#include <string>
#include <vector>

#include "rendopt/linalg.hpp"
#include "rendopt/orbit.hpp"
#include "rendopt/safety.hpp"
#include "rendopt/socp.hpp"
#include "rendopt/uncertainty.hpp"

namespace rendopt {

struct ScpConfig {
  double eps_opt = 1e-3;
  double eps_feas = 1e-3;
  double alpha1 = 2.0;   // trust-region contraction on weak agreement
  double alpha2 = 3.0;   // trust-region expansion on strong agreement
  double beta_sc = 2.0;  // shrink factor when a step is rejected
  double gamma = 0.9;    // penalty weight divisor on feasibility stagnation
  double r_min = 1e-6;
  double r_max = 5e3;
  double r0 = 100.0;
  double w0 = 10.0;
  double w_max = 1e6;
  int max_iter = 20;
  double accept_ratio = 0.1;
  double contract_ratio = 0.25;
  double expand_ratio = 0.7;
  double radius_x_unit = 1.0;    // rho_x = r * 1 m
  double radius_u_unit = 0.01;   // rho_u = r * 0.01 m/s
  int max_consecutive_failures = 3;
  SolverSettings solver;
};

struct ScpIteration {
  int iter = 0;
  double objective = 0.0;      // candidate total delta-v [m/s]
  double max_violation = 0.0;  // candidate nonlinear constraint value
  double radius = 0.0;
  double weight = 0.0;
  bool accepted = false;
  std::string status;
};

struct ScpResult {
  std::vector<RoeState> states;
  std::vector<ControlImpulse> controls;  // N-1 impulses
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  bool feasible = false;
  double max_violation = 0.0;
  std::vector<ScpIteration> log;
};

struct NonlinearEval {
  double max_violation = 0.0;
  std::vector<double> values;  // per-node true chance-constraint values
};

/// True (non-linearized) per-node chance-constraint values of a trajectory,
/// evaluated with the supplied covariance history.
NonlinearEval evaluate_nonlinear(const std::vector<RoeState>& states,
                                 const std::vector<Mat6>& covariances, const TimeGrid& grid,
                                 const SafetyConfig& safety_cfg, const OrbitalElementsQNS& oe,
                                 const Mat6& process_noise);

/// Sequential convex programming driver: linearize, solve the convex
/// subproblem, accept/reject on the ratio of actual-to-predicted merit
/// improvement, and adapt trust region and penalty weight. Pass zero
/// uncertainty models for the deterministic problem.
ScpResult scp_solve(const RoeState& x0, const RoeState& xf, const TimeGrid& grid,
                    const OrbitalElementsQNS& oe, const ScpConfig& cfg,
                    const SafetyConfig& safety_cfg, const UncertaintyModels& models,
                    const std::vector<RoeState>& warm_states,
                    const std::vector<ControlImpulse>& warm_controls);

}  // namespace rendopt
