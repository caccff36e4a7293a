#include "rendopt/orbit.hpp"

#include <cmath>
#include <stdexcept>

namespace rendopt {

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

void OrbitalElementsQNS::validate() const {
  if (!(a > 0.0)) throw std::domain_error("orbital elements: a must be > 0");
  if (!(eccentricity() < 1.0)) throw std::domain_error("orbital elements: e must be < 1");
  if (inc < 0.0 || inc > M_PI) throw std::domain_error("orbital elements: i outside [0, pi]");
}

OrbitalElementsQNS OrbitalElementsQNS::at_time(double dt) const {
  OrbitalElementsQNS out = *this;
  out.nu = wrap_angle(nu + mean_motion(*this) * dt);
  return out;
}

double mean_motion(const OrbitalElementsQNS& oe) {
  if (!(oe.a > 0.0)) throw std::domain_error("mean_motion: a must be > 0");
  return std::sqrt(kMuEarth / (oe.a * oe.a * oe.a));
}

double orbit_period(const OrbitalElementsQNS& oe) { return kTwoPi / mean_motion(oe); }

TimeGrid TimeGrid::uniform(double t0, double horizon, int n_nodes) {
  if (n_nodes < 2) throw std::domain_error("TimeGrid: need at least 2 nodes");
  TimeGrid g;
  g.epochs.resize(n_nodes);
  const double dt = horizon / (n_nodes - 1);
  for (int i = 0; i < n_nodes; ++i) g.epochs[i] = t0 + dt * i;
  g.epochs.back() = t0 + horizon;
  return g;
}

Mat6 stm_roe(const OrbitalElementsQNS& oe, double t_from, double t_to) {
  if (t_to < t_from) throw std::domain_error("stm_roe: t_to < t_from");
  Mat6 phi = Mat6::Identity();
  phi(1, 0) = -1.5 * mean_motion(oe) * (t_to - t_from);
  return phi;
}

Mat63 control_input_matrix(const OrbitalElementsQNS& oe, double t) {
  const double n = mean_motion(oe);
  const double u = wrap_angle(oe.nu + n * t);
  const double su = std::sin(u);
  const double cu = std::cos(u);
  Mat63 b = Mat63::Zero();
  b(0, 1) = 2.0 / n;
  b(1, 0) = -2.0 / n;
  b(2, 0) = su / n;
  b(2, 1) = 2.0 * cu / n;
  b(3, 0) = -cu / n;
  b(3, 1) = 2.0 * su / n;
  b(4, 2) = cu / n;
  b(5, 2) = su / n;
  return b;
}

Mat6 roe_to_rtn_map(const OrbitalElementsQNS& oe, double t) {
  const double n = mean_motion(oe);
  const double u = wrap_angle(oe.nu + n * t);
  const double su = std::sin(u);
  const double cu = std::cos(u);
  Mat6 psi = Mat6::Zero();
  // Position rows.
  psi(0, 0) = 1.0;
  psi(0, 2) = -cu;
  psi(0, 3) = -su;
  psi(1, 1) = 1.0;
  psi(1, 2) = 2.0 * su;
  psi(1, 3) = -2.0 * cu;
  psi(2, 4) = su;
  psi(2, 5) = -cu;
  // Rotating-frame velocity rows.
  psi(3, 2) = n * su;
  psi(3, 3) = -n * cu;
  psi(4, 0) = -1.5 * n;
  psi(4, 2) = 2.0 * n * cu;
  psi(4, 3) = 2.0 * n * su;
  psi(5, 4) = n * cu;
  psi(5, 5) = n * su;
  return psi;
}

Mat6 rtn_to_roe_map(const OrbitalElementsQNS& oe, double t) {
  return roe_to_rtn_map(oe, t).inverse();
}

}  // namespace rendopt
