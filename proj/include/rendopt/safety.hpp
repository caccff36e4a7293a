#pragma once

#include <utility>
#include <vector>

#include "rendopt/linalg.hpp"
#include "rendopt/orbit.hpp"
#include "rendopt/uncertainty.hpp"

namespace rendopt {

/// Axis-aligned keep-out ellipsoid in RTN, encoded by its inverse-square
/// shape matrix P = Diag{1/r_r^2, 1/r_t^2, 1/r_n^2}.
struct SafetyEllipsoid {
  Vec3 radii = Vec3::Zero();  // [m]

  void validate() const;
  Mat3 shape() const;       // P
  Mat3 shape_sqrt() const;  // P^(1/2)
};

struct SafetyConfig {
  double t_safety = 0.0;   // free-drift horizon [s]
  int n_safety = 1;        // scan intervals over the drift horizon
  int n_ae_to_koz = 1;     // first 1-based node index using the KOZ
  int n_nodes = 2;         // trajectory node count N
  double q = 0.0;          // confidence multiplier (PPF at 1 - Delta)
  SafetyEllipsoid ae;
  SafetyEllipsoid koz;
  double violation_tol = 1e-3;  // feasibility tolerance for the binary metric

  void validate() const;
};

/// AE before the switch node, KOZ from it onwards. node_index is 1-based.
const SafetyEllipsoid& active_ellipsoid(int node_index, const SafetyConfig& cfg);

struct MinSeparation {
  double t_star = 0.0;   // epoch of minimum P-weighted separation
  int scan_index = 0;    // sample index on the drift grid (0 = contingency)
  Mat6 stm;              // Phi(t_star, t_i)
  double distance = 0.0; // P-weighted RTN distance at t_star
};

/// Scans n_safety + 1 uniform samples of [t_i, t_i + t_safety] and returns
/// the first sample minimizing the P-weighted RTN position distance of the
/// free-drifting state.
MinSeparation min_separation_instant(const RoeState& x_i, double t_i,
                                     const SafetyEllipsoid& ellipsoid, const SafetyConfig& cfg,
                                     const OrbitalElementsQNS& oe);

/// Reference covariance carried to the minimum-separation instant: STM
/// conjugation plus process noise accumulated per drift sub-step; no new
/// navigation or actuation terms after contingency.
Mat6 drift_covariance(const Mat6& x_cov, double t_i, const MinSeparation& sep,
                      const SafetyConfig& cfg, const OrbitalElementsQNS& oe, const Mat6& process_noise);

/// One linearized passive-safety chance constraint -a'x + b + beta <= 0.
struct LinearizedConstraint {
  Vec6 a_ps = Vec6::Zero();
  double b_ps = 0.0;
  double beta = 0.0;
  int node_index = 0;   // 1-based
  double t_star = 0.0;
};

/// Linearizes the passive-safety constraint about x_ref with the reference
/// covariance already propagated to t_star. Throws std::domain_error when the
/// reference sits at the ellipsoid center (b_ps = 0).
LinearizedConstraint linearize_passive_safety(const RoeState& x_ref, const Mat6& cov_at_tstar,
                                              double t_i, double t_star,
                                              const SafetyEllipsoid& ellipsoid,
                                              const OrbitalElementsQNS& oe, double q);

/// Left-hand side of the linearized constraint; <= 0 means satisfied.
inline double constraint_value(const RoeState& x, const LinearizedConstraint& lc) {
  return -lc.a_ps.dot(x) + lc.b_ps + lc.beta;
}

/// True (non-linearized) chance-constraint value at one node:
/// 1 - g + q*||X(t*)^(1/2) grad g||, g the P-weighted distance at the node's
/// own minimum-separation instant; <= 0 means satisfied.
double nonlinear_constraint_value(const RoeState& x, const Mat6& x_cov, int node_index, double t_i,
                                  const SafetyConfig& cfg, const OrbitalElementsQNS& oe,
                                  const Mat6& process_noise);

struct ViolationSeries {
  std::vector<int> per_node;   // binary indicator, 1 = node violates
  std::vector<int> budget;     // suffix sums C(t_i)

  int total() const { return budget.empty() ? 0 : budget.front(); }
};

/// Binary violation indicator per node (Eq. of the constraint metric) and its
/// suffix-sum budget series.
ViolationSeries violation_metric(const std::vector<RoeState>& states,
                                 const std::vector<Mat6>& covariances, const TimeGrid& grid,
                                 const SafetyConfig& cfg, const OrbitalElementsQNS& oe,
                                 const Mat6& process_noise);

}  // namespace rendopt
