#pragma once

#include "rendopt/linalg.hpp"
#include "rendopt/orbit.hpp"

namespace rendopt {

/// Inertial Cartesian state of one spacecraft.
struct EciState {
  Vec3 r;  // [m]
  Vec3 v;  // [m/s]
};

/// Converts quasi non-singular elements to an inertial two-body state.
EciState oe_to_eci(const OrbitalElementsQNS& oe);

/// Converts an inertial two-body state to quasi non-singular elements.
OrbitalElementsQNS eci_to_oe(const EciState& s);

/// Exact quasi non-singular ROE of a servicer relative to a target,
/// dimensionalized by the target semi-major axis (meters).
RoeState roe_from_elements(const OrbitalElementsQNS& servicer, const OrbitalElementsQNS& target);

/// RTN basis of a target state, columns {R, T, N}.
Mat3 rtn_basis(const EciState& target);

/// Builds the servicer inertial state from the target state and an RTN
/// relative state (rotating-frame relative velocity convention).
EciState apply_rtn_offset(const EciState& target, const RtnState& x_rtn);

/// RTN relative state of a servicer w.r.t. a target (rotating-frame velocity).
RtnState relative_rtn(const EciState& target, const EciState& servicer);

/// Adaptive Dormand-Prince 5(4) two-body propagation. rel_tol applies to the
/// mixed position/velocity error norm. Throws std::runtime_error when the
/// step size underflows before reaching dt.
EciState propagate_two_body(const EciState& s0, double dt, double rel_tol = 1e-13);

/// Numerical truth reference: propagates target and servicer through the
/// two-body problem and returns the servicer state relative to the drifted
/// target, in the drifted target's RTN frame.
RtnState nonlinear_oracle(const OrbitalElementsQNS& oe_target, const RtnState& x0_rtn, double dt,
                          double rel_tol = 1e-13);

}  // namespace rendopt
