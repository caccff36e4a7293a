#include "rendopt/two_body.hpp"

#include <cmath>
#include <stdexcept>

namespace rendopt {

namespace {

/// Solves Kepler's equation M = E - e*sin(E) by Newton iteration.
double eccentric_anomaly(double mean_anomaly, double e) {
  double E = mean_anomaly;
  for (int k = 0; k < 64; ++k) {
    const double f = E - e * std::sin(E) - mean_anomaly;
    const double df = 1.0 - e * std::cos(E);
    const double step = f / df;
    E -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return E;
}

Mat3 rot_z(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
  return m;
}

Mat3 rot_x(double a) {
  Mat3 m;
  m << 1.0, 0.0, 0.0, 0.0, std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a);
  return m;
}

}  // namespace

EciState oe_to_eci(const OrbitalElementsQNS& oe) {
  oe.validate();
  const double e = oe.eccentricity();
  const double omega = (e > 0.0) ? std::atan2(oe.ey, oe.ex) : 0.0;
  const double mean_anom = wrap_angle(oe.nu - omega);
  const double E = eccentric_anomaly(mean_anom, e);
  const double cE = std::cos(E);
  const double sE = std::sin(E);
  const double r_mag = oe.a * (1.0 - e * cE);
  // Perifocal position/velocity.
  const double b_fac = std::sqrt(1.0 - e * e);
  Vec3 r_pf(oe.a * (cE - e), oe.a * b_fac * sE, 0.0);
  const double edot = std::sqrt(kMuEarth * oe.a) / r_mag;
  Vec3 v_pf(-edot * sE, edot * b_fac * cE, 0.0);
  const Mat3 to_eci = rot_z(oe.raan) * rot_x(oe.inc) * rot_z(omega);
  return {to_eci * r_pf, to_eci * v_pf};
}

OrbitalElementsQNS eci_to_oe(const EciState& s) {
  const double r = s.r.norm();
  const double v2 = s.v.squaredNorm();
  const double energy = 0.5 * v2 - kMuEarth / r;
  if (energy >= 0.0) throw std::domain_error("eci_to_oe: orbit not elliptical");
  const double a = -kMuEarth / (2.0 * energy);
  const Vec3 h = s.r.cross(s.v);
  const Vec3 e_vec = s.v.cross(h) / kMuEarth - s.r / r;
  const double e = e_vec.norm();
  const double inc = std::acos(std::clamp(h.z() / h.norm(), -1.0, 1.0));
  const Vec3 node(-h.y(), h.x(), 0.0);
  const double node_norm = node.norm();
  double raan = 0.0;
  double arg_lat = 0.0;  // true argument of latitude omega + true anomaly
  if (node_norm > 1e-12 * h.norm()) {
    raan = std::atan2(node.y(), node.x());
    const Vec3 n_hat = node / node_norm;
    const Vec3 m_hat = h.cross(node).normalized();
    arg_lat = std::atan2(s.r.dot(m_hat), s.r.dot(n_hat));
  } else {
    arg_lat = std::atan2(s.r.y(), s.r.x());
  }
  double true_anom = 0.0;
  double omega = 0.0;
  if (e > 1e-14) {
    const double cos_ta = std::clamp(e_vec.dot(s.r) / (e * r), -1.0, 1.0);
    true_anom = std::acos(cos_ta);
    if (s.r.dot(s.v) < 0.0) true_anom = kTwoPi - true_anom;
    omega = wrap_angle(arg_lat - true_anom);
  } else {
    true_anom = wrap_angle(arg_lat);
  }
  const double E = 2.0 * std::atan2(std::sqrt(1.0 - e) * std::sin(0.5 * true_anom),
                                    std::sqrt(1.0 + e) * std::cos(0.5 * true_anom));
  const double mean_anom = E - e * std::sin(E);
  OrbitalElementsQNS oe;
  oe.a = a;
  oe.nu = wrap_angle(mean_anom + omega);
  oe.ex = e * std::cos(omega);
  oe.ey = e * std::sin(omega);
  oe.inc = inc;
  oe.raan = wrap_angle(raan);
  return oe;
}

RoeState roe_from_elements(const OrbitalElementsQNS& s, const OrbitalElementsQNS& t) {
  // Relative angles evaluated on the shortest arc.
  auto wrap_pm = [](double a) {
    double w = std::fmod(a + M_PI, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w - M_PI;
  };
  RoeState x;
  const double draan = wrap_pm(s.raan - t.raan);
  x(0) = (s.a - t.a) / t.a;
  x(1) = wrap_pm(s.nu - t.nu) + draan * std::cos(t.inc);
  x(2) = s.ex - t.ex;
  x(3) = s.ey - t.ey;
  x(4) = s.inc - t.inc;
  x(5) = draan * std::sin(t.inc);
  return t.a * x;
}

Mat3 rtn_basis(const EciState& target) {
  const Vec3 r_hat = target.r.normalized();
  const Vec3 n_hat = target.r.cross(target.v).normalized();
  const Vec3 t_hat = n_hat.cross(r_hat);
  Mat3 basis;
  basis.col(0) = r_hat;
  basis.col(1) = t_hat;
  basis.col(2) = n_hat;
  return basis;
}

EciState apply_rtn_offset(const EciState& target, const RtnState& x_rtn) {
  const Mat3 basis = rtn_basis(target);
  const Vec3 omega = target.r.cross(target.v) / target.r.squaredNorm();
  const Vec3 dr = basis * x_rtn.head<3>();
  const Vec3 dv = basis * x_rtn.tail<3>();
  return {target.r + dr, target.v + dv + omega.cross(dr)};
}

RtnState relative_rtn(const EciState& target, const EciState& servicer) {
  const Mat3 basis = rtn_basis(target);
  const Vec3 omega = target.r.cross(target.v) / target.r.squaredNorm();
  const Vec3 dr = servicer.r - target.r;
  const Vec3 dv = servicer.v - target.v - omega.cross(dr);
  RtnState x;
  x.head<3>() = basis.transpose() * dr;
  x.tail<3>() = basis.transpose() * dv;
  return x;
}

namespace {

using State6 = Eigen::Matrix<double, 6, 1>;

State6 two_body_rhs(const State6& y) {
  State6 dy;
  const Vec3 r = y.head<3>();
  const double rn = r.norm();
  dy.head<3>() = y.tail<3>();
  dy.tail<3>() = -kMuEarth / (rn * rn * rn) * r;
  return dy;
}

// Dormand-Prince 5(4) coefficients.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace

EciState propagate_two_body(const EciState& s0, double dt, double rel_tol) {
  State6 y;
  y << s0.r, s0.v;
  const double dir = (dt >= 0.0) ? 1.0 : -1.0;
  double t = 0.0;
  const double t_end = dt;
  const double r_scale = s0.r.norm();
  const double v_scale = std::max(s0.v.norm(), 1e-3);
  double h = dir * std::min(60.0, std::max(1e-3, std::abs(dt) / 100.0));
  int rejected_underflow = 0;
  while (dir * (t_end - t) > 0.0) {
    if (dir * (t + h) > dir * t_end) h = t_end - t;
    State6 k[7];
    k[0] = two_body_rhs(y);
    for (int s = 1; s < 7; ++s) {
      State6 ys = y;
      for (int j = 0; j < s; ++j) ys += h * kA[s][j] * k[j];
      k[s] = two_body_rhs(ys);
    }
    State6 y5 = y;
    State6 y4 = y;
    for (int s = 0; s < 7; ++s) {
      y5 += h * kB5[s] * k[s];
      y4 += h * kB4[s] * k[s];
    }
    const State6 diff = y5 - y4;
    double err = 0.0;
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(diff(i)) / r_scale);
    for (int i = 3; i < 6; ++i) err = std::max(err, std::abs(diff(i)) / v_scale);
    if (err <= rel_tol) {
      t += h;
      y = y5;
    } else if (++rejected_underflow > 100000) {
      throw std::runtime_error("propagate_two_body: integrator failed to converge");
    }
    const double safety = 0.9 * std::pow(std::max(err, 1e-18) / rel_tol, -0.2);
    h *= std::clamp(safety, 0.2, 5.0);
    if (std::abs(h) < 1e-9 && dir * (t_end - t) > 1e-9) {
      throw std::runtime_error("propagate_two_body: step size underflow");
    }
  }
  return {y.head<3>(), y.tail<3>()};
}

RtnState nonlinear_oracle(const OrbitalElementsQNS& oe_target, const RtnState& x0_rtn, double dt,
                          double rel_tol) {
  const EciState target0 = oe_to_eci(oe_target);
  const EciState servicer0 = apply_rtn_offset(target0, x0_rtn);
  if (dt == 0.0) return relative_rtn(target0, servicer0);
  const EciState target1 = propagate_two_body(target0, dt, rel_tol);
  const EciState servicer1 = propagate_two_body(servicer0, dt, rel_tol);
  return relative_rtn(target1, servicer1);
}

}  // namespace rendopt
