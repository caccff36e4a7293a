#pragma once

#include <vector>

#include "rendopt/linalg.hpp"

namespace rendopt {

/// Earth gravitational parameter [m^3/s^2].
inline constexpr double kMuEarth = 3.986004418e14;
inline constexpr double kTwoPi = 6.283185307179586476925287;

/// Wraps an angle to [0, 2*pi).
double wrap_angle(double a);

/// Quasi non-singular orbital elements of the target:
/// {a, nu, e_x, e_y, i, raan} with nu = M + omega the mean argument of
/// latitude. Angles in radians, a in meters.
struct OrbitalElementsQNS {
  double a = 0.0;
  double nu = 0.0;
  double ex = 0.0;
  double ey = 0.0;
  double inc = 0.0;
  double raan = 0.0;

  double eccentricity() const { return std::sqrt(ex * ex + ey * ey); }

  /// Throws std::domain_error when a <= 0, e >= 1 or i outside [0, pi].
  void validate() const;

  /// Elements advanced by dt of two-body motion: nu += n*dt (wrapped).
  OrbitalElementsQNS at_time(double dt) const;
};

/// Mean motion n = sqrt(mu/a^3) [rad/s]. Throws std::domain_error if a <= 0.
double mean_motion(const OrbitalElementsQNS& oe);

/// Orbit period 2*pi/n [s].
double orbit_period(const OrbitalElementsQNS& oe);

/// Uniform discretization t_1..t_N of an optimization horizon.
struct TimeGrid {
  std::vector<double> epochs;

  static TimeGrid uniform(double t0, double horizon, int n_nodes);

  int size() const { return static_cast<int>(epochs.size()); }
  double operator[](int i) const { return epochs[i]; }
  double dt(int i) const { return epochs[i + 1] - epochs[i]; }
};

/// Keplerian ROE state transition matrix Phi(t_to, t_from): identity plus the
/// delta-lambda / delta-a drift coupling. Throws std::domain_error when
/// t_to < t_from.
Mat6 stm_roe(const OrbitalElementsQNS& oe, double t_from, double t_to);

/// Near-circular impulsive control input matrix B(t): maps an RTN delta-v
/// [m/s] to a dimensional-ROE increment [m]. Columns ordered (R, T, N),
/// evaluated at mean argument of latitude u = nu(t).
Mat63 control_input_matrix(const OrbitalElementsQNS& oe, double t);

/// First-order instantaneous map Psi(t): dimensional ROE [m] -> RTN [m, m/s].
Mat6 roe_to_rtn_map(const OrbitalElementsQNS& oe, double t);

/// Inverse of the linear map at t (RTN -> dimensional ROE).
Mat6 rtn_to_roe_map(const OrbitalElementsQNS& oe, double t);

inline RtnState roe_to_rtn(const OrbitalElementsQNS& oe, double t, const RoeState& x) {
  return roe_to_rtn_map(oe, t) * x;
}

inline RoeState rtn_to_roe(const OrbitalElementsQNS& oe, double t, const RtnState& x) {
  return rtn_to_roe_map(oe, t) * x;
}

/// One step of the discrete dynamics: x+ = Phi * (x + B*u).
inline RoeState propagate_state(const RoeState& x, const ControlImpulse& u,
                                const Mat6& stm, const Mat63& control_matrix) {
  return stm * (x + control_matrix * u);
}

}  // namespace rendopt
