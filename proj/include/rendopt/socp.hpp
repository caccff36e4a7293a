#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "rendopt/linalg.hpp"
#include "rendopt/orbit.hpp"
#include "rendopt/safety.hpp"

namespace rendopt {

using SpMat = Eigen::SparseMatrix<double>;

/// Generic cone program
///   minimize c'z  subject to  (Az)_eq = rhs, (Az)_box in [lo, hi],
///   (Az)_soc in second-order cones,
/// with rows grouped as [equalities | boxes | cones].
struct ConeProblem {
  int num_vars = 0;
  SpMat a;                      // m x n constraint matrix
  Eigen::VectorXd cost;         // c
  Eigen::VectorXd eq_rhs;       // equality right-hand sides
  Eigen::VectorXd box_lo;       // box lower bounds (-inf allowed)
  Eigen::VectorXd box_hi;       // box upper bounds (+inf allowed)
  std::vector<int> soc_dims;    // cone sizes, rows [t; v]

  int num_eq() const { return static_cast<int>(eq_rhs.size()); }
  int num_box() const { return static_cast<int>(box_lo.size()); }
  int num_rows() const { return static_cast<int>(a.rows()); }
  void validate() const;

  /// Writes the problem in a matrix-market-style text format.
  void dump(const std::string& path) const;
  static ConeProblem restore(const std::string& path);
};

enum class SolveStatus { kOptimal, kMaxIters, kInfeasible };

const char* to_string(SolveStatus s);

struct ConicResult {
  Eigen::VectorXd z;       // primal variables
  Eigen::VectorXd y;       // constraint copies, y in C exactly
  Eigen::VectorXd lambda;  // dual multipliers
  SolveStatus status = SolveStatus::kMaxIters;
  int iterations = 0;
  double objective = 0.0;
  double r_prim = 0.0;  // normalized primal residual
  double r_dual = 0.0;  // normalized dual (stationarity) residual
  double r_gap = 0.0;   // normalized duality gap

  double kkt_residual() const { return std::max({r_prim, r_dual, r_gap}); }
};

struct SolverSettings {
  double eps = 1e-9;          // normalized KKT tolerance
  int max_iter = 50000;       // fixed iteration cap
  int check_interval = 25;
  double alpha = 1.6;         // over-relaxation
  double sigma = 1e-6;
  double rho = 0.1;
  double rho_eq_scale = 1e3;  // extra penalty on equality rows
  bool adaptive_rho = true;
  double eps_infeasible = 1e-9;
};

/// First-order operator-splitting (ADMM) conic solver with Ruiz diagonal
/// preconditioning and cached symbolic factorization across solves that share
/// a sparsity pattern.
class ConicSolver {
 public:
  ConicResult solve(const ConeProblem& p, const SolverSettings& settings,
                    const ConicResult* warm = nullptr);

 private:
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  uint64_t pattern_sig_ = 0;
  bool analyzed_ = false;
};

/// One iteration's convex subproblem: impulsive transfer with linearized
/// passive-safety rows, slack penalty and infinity-norm trust regions.
struct ConvexSubproblem {
  int n_nodes = 0;
  std::vector<Mat6> stm;        // Phi(t_{i+1}, t_i), N-1 entries
  std::vector<Mat63> stm_b;     // Phi(t_{i+1}, t_i) * B(t_i), N-1 entries
  RoeState x0 = RoeState::Zero();
  RoeState xf = RoeState::Zero();
  std::vector<LinearizedConstraint> constraints;  // empty or N entries
  std::vector<RoeState> ref_states;               // trust-region centers
  std::vector<ControlImpulse> ref_controls;
  double radius_x = 0.0;        // state trust-region radius [m]; <=0 disables
  double radius_u = 0.0;        // control trust-region radius [m/s]; <=0 disables
  double penalty_weight = 0.0;  // w, must be > 0 when constraints are present

  void validate() const;
  ConeProblem to_cone_problem() const;
};

struct SubproblemSolution {
  std::vector<RoeState> states;
  std::vector<ControlImpulse> controls;  // N-1 impulses
  std::vector<double> slacks;            // xi_i >= 0 (empty when unconstrained)
  double objective = 0.0;                // sum ||u|| + w * sum xi
  double control_cost = 0.0;             // sum ||u||
  SolveStatus status = SolveStatus::kMaxIters;
  int iterations = 0;
  double r_prim = 0.0;
  double r_dual = 0.0;
  double r_gap = 0.0;
  ConicResult raw;  // solver iterates, reusable as warm start

  double kkt_residual() const { return std::max({r_prim, r_dual, r_gap}); }
  /// Largest dynamics/boundary equation violation of the returned iterate.
  double dynamics_residual(const ConvexSubproblem& sp) const;
};

/// Assembles the subproblem from a reference trajectory and its per-node
/// linearizations. Throws std::invalid_argument on dimension mismatch.
ConvexSubproblem build_subproblem(const std::vector<RoeState>& ref_states,
                                  const std::vector<ControlImpulse>& ref_controls,
                                  const std::vector<LinearizedConstraint>& constraints,
                                  const TimeGrid& grid, const OrbitalElementsQNS& oe,
                                  const RoeState& x0, const RoeState& xf, double radius_x,
                                  double radius_u, double penalty_weight);

SubproblemSolution solve_subproblem(ConicSolver& solver, const ConvexSubproblem& sp,
                                    const SolverSettings& settings,
                                    const ConicResult* warm = nullptr);

struct TpbvpResult {
  std::vector<RoeState> states;
  std::vector<ControlImpulse> controls;
  double objective = 0.0;  // J_CVX, the convex lower bound [m/s]
  SolveStatus status = SolveStatus::kMaxIters;
  int iterations = 0;
};

/// Convex two-point boundary value problem: minimize total delta-v subject to
/// dynamics and boundary conditions only. The objective is the CVX baseline
/// and lower bound.
TpbvpResult solve_tpbvp(const RoeState& x0, const RoeState& xf, const TimeGrid& grid,
                        const OrbitalElementsQNS& oe, const SolverSettings& settings = {});

}  // namespace rendopt
