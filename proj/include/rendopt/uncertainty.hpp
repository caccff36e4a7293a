#pragma once

#include <vector>

#include "rendopt/linalg.hpp"
#include "rendopt/orbit.hpp"

namespace rendopt {

/// Range-dependent navigation accuracy model. s1 applies beyond rho1, s2
/// within rho2, linear interpolation in between.
struct NavModel {
  Vec6 s1 = Vec6::Zero();
  Vec6 s2 = Vec6::Zero();
  double rho1 = 0.0;
  double rho2 = 0.0;

  void validate() const;
  Vec6 accuracy(double range) const;
};

/// Gates impulsive-maneuver execution error model: fixed plus proportional
/// magnitude (sigma_r, sigma_s) and pointing (sigma_a, sigma_p) terms.
struct GatesModel {
  double sigma_s = 0.0;
  double sigma_p = 0.0;
  double sigma_r = 0.0;
  double sigma_a = 0.0;

  void validate() const;
};

struct UncertaintyModels {
  NavModel nav;
  GatesModel gates;
  Mat6 process_noise = Mat6::Zero();  // Q [m^2]

  bool is_zero() const;
  static UncertaintyModels zero() { return {}; }
};

/// Navigation covariance (rho/a^2) * s s^T evaluated at the state's RTN range.
Mat6 nav_covariance(const RoeState& x, const OrbitalElementsQNS& oe, double t,
                    const NavModel& model);

/// Diagonal Gates covariance in the burn-aligned frame.
Mat3 gates_covariance(const ControlImpulse& dv, const GatesModel& model);

/// Deterministic rotation taking the burn-aligned frame to RTN; identity when
/// the impulse is zero.
Mat3 burn_frame_rotation(const ControlImpulse& dv);

/// Execution-error covariance of a maneuver expressed in RTN coordinates.
Mat3 control_covariance(const ControlImpulse& u, const GatesModel& model);

/// Covariance history along a controlled trajectory, recovered from the
/// state/control history alone: each node adds fresh navigation, actuation
/// and process-noise terms to the propagated covariance.
/// controls may be one shorter than states (no burn at the final node).
std::vector<Mat6> propagate_covariance(const std::vector<RoeState>& states,
                                       const std::vector<ControlImpulse>& controls,
                                       const TimeGrid& grid, const OrbitalElementsQNS& oe,
                                       const UncertaintyModels& models);

/// Symmetric PSD square root via eigendecomposition; negative eigenvalues are
/// clamped to zero.
Mat6 psd_sqrt(const Mat6& x);

/// Enforces exact symmetry: (x + x^T)/2.
inline Mat6 symmetrize(const Mat6& x) { return 0.5 * (x + x.transpose()); }

}  // namespace rendopt
