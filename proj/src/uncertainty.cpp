#include "rendopt/uncertainty.hpp"

#include <cmath>
#include <stdexcept>

namespace rendopt {

void NavModel::validate() const {
  if (!(rho1 > rho2 && rho2 > 0.0)) throw std::domain_error("NavModel: need rho1 > rho2 > 0");
  if ((s1.array() < 0.0).any() || (s2.array() < 0.0).any())
    throw std::domain_error("NavModel: accuracy parameters must be >= 0");
}

Vec6 NavModel::accuracy(double range) const {
  if (range >= rho1) return s1;
  if (range <= rho2) return s2;
  return (s1 * (range - rho2) + s2 * (rho1 - range)) / (rho1 - rho2);
}

void GatesModel::validate() const {
  if (sigma_s < 0.0 || sigma_p < 0.0 || sigma_r < 0.0 || sigma_a < 0.0)
    throw std::domain_error("GatesModel: parameters must be >= 0");
}

bool UncertaintyModels::is_zero() const {
  return nav.s1.isZero() && nav.s2.isZero() && gates.sigma_s == 0.0 && gates.sigma_p == 0.0 &&
         gates.sigma_r == 0.0 && gates.sigma_a == 0.0 && process_noise.isZero();
}

Mat6 nav_covariance(const RoeState& x, const OrbitalElementsQNS& oe, double t,
                    const NavModel& model) {
  const RtnState x_rtn = roe_to_rtn(oe, t, x);
  const double range = x_rtn.head<3>().norm();
  const Vec6 s = model.accuracy(range);
  return (range / (oe.a * oe.a)) * (s * s.transpose());
}

Mat3 gates_covariance(const ControlImpulse& dv, const GatesModel& model) {
  const double dv2 = dv.squaredNorm();
  Mat3 v = Mat3::Zero();
  v(0, 0) = model.sigma_r * model.sigma_r + dv2 * model.sigma_s * model.sigma_s;
  v(1, 1) = model.sigma_a * model.sigma_a + dv2 * model.sigma_p * model.sigma_p;
  v(2, 2) = v(1, 1);
  return v;
}

Mat3 burn_frame_rotation(const ControlImpulse& dv) {
  const double mag = dv.norm();
  if (mag == 0.0) return Mat3::Identity();
  const Vec3 e1 = dv / mag;
  const Vec3 normal_axis(0.0, 0.0, 1.0);
  Vec3 e2 = e1.cross(normal_axis);
  if (e2.norm() < 1e-12) e2 = e1.cross(Vec3(1.0, 0.0, 0.0));
  e2.normalize();
  const Vec3 e3 = e1.cross(e2);
  Mat3 rot;
  rot.col(0) = e1;
  rot.col(1) = e2;
  rot.col(2) = e3;
  return rot;
}

Mat3 control_covariance(const ControlImpulse& u, const GatesModel& model) {
  const Mat3 rot = burn_frame_rotation(u);
  const Mat3 v = gates_covariance(u, model);
  return rot * v * rot.transpose();
}

std::vector<Mat6> propagate_covariance(const std::vector<RoeState>& states,
                                       const std::vector<ControlImpulse>& controls,
                                       const TimeGrid& grid, const OrbitalElementsQNS& oe,
                                       const UncertaintyModels& models) {
  const int n = static_cast<int>(states.size());
  if (grid.size() != n) throw std::invalid_argument("propagate_covariance: grid/state mismatch");
  if (static_cast<int>(controls.size()) != n && static_cast<int>(controls.size()) != n - 1)
    throw std::invalid_argument("propagate_covariance: control count mismatch");
  std::vector<Mat6> cov(n);
  Mat6 carried = Mat6::Zero();
  for (int i = 0; i < n; ++i) {
    Mat6 x_i = carried + nav_covariance(states[i], oe, grid[i], models.nav) + models.process_noise;
    if (i < static_cast<int>(controls.size())) {
      const Mat63 b = control_input_matrix(oe, grid[i]);
      const Mat3 u_cov = control_covariance(controls[i], models.gates);
      x_i += b * u_cov * b.transpose();
    }
    cov[i] = symmetrize(x_i);
    if (i + 1 < n) {
      const Mat6 phi = stm_roe(oe, grid[i], grid[i + 1]);
      carried = symmetrize(phi * cov[i] * phi.transpose());
    }
  }
  return cov;
}

Mat6 psd_sqrt(const Mat6& x) {
  Eigen::SelfAdjointEigenSolver<Mat6> eig(symmetrize(x));
  Vec6 vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace rendopt
