#include "rendopt/safety.hpp"

#include <cmath>
#include <stdexcept>

namespace rendopt {

namespace {

const Mat36 kPositionSelector = [] {
  Mat36 d = Mat36::Zero();
  d(0, 0) = d(1, 1) = d(2, 2) = 1.0;
  return d;
}();

/// P-weighted RTN position distance of a ROE state at epoch t.
double weighted_distance(const RoeState& x, double t, const Mat3& p_sqrt,
                         const OrbitalElementsQNS& oe) {
  const RtnState rtn = roe_to_rtn(oe, t, x);
  return (p_sqrt * rtn.head<3>()).norm();
}

/// M = Phi' Psi' D' P D Psi Phi for the ellipsoid metric at t_star.
Mat6 constraint_metric(const SafetyEllipsoid& ellipsoid, double t_i, double t_star,
                       const OrbitalElementsQNS& oe) {
  const Mat6 phi = stm_roe(oe, t_i, t_star);
  const Mat36 dpsi = kPositionSelector * roe_to_rtn_map(oe, t_star);
  const Eigen::Matrix<double, 3, 6> g = ellipsoid.shape_sqrt() * dpsi * phi;
  return g.transpose() * g;
}

}  // namespace

void SafetyEllipsoid::validate() const {
  if (!(radii.array() > 0.0).all()) throw std::domain_error("SafetyEllipsoid: radii must be > 0");
}

Mat3 SafetyEllipsoid::shape() const {
  return Vec3(1.0 / (radii.array() * radii.array())).asDiagonal();
}

Mat3 SafetyEllipsoid::shape_sqrt() const {
  return Vec3(1.0 / radii.array()).asDiagonal();
}

void SafetyConfig::validate() const {
  if (t_safety < 0.0) throw std::domain_error("SafetyConfig: t_safety must be >= 0");
  if (n_safety < 1) throw std::domain_error("SafetyConfig: n_safety must be >= 1");
  if (n_ae_to_koz < 1 || n_ae_to_koz > n_nodes)
    throw std::domain_error("SafetyConfig: n_ae_to_koz outside [1, N]");
  if (!(q >= 0.0)) throw std::domain_error("SafetyConfig: q must be >= 0");
  ae.validate();
  koz.validate();
}

const SafetyEllipsoid& active_ellipsoid(int node_index, const SafetyConfig& cfg) {
  if (node_index < 1 || node_index > cfg.n_nodes)
    throw std::out_of_range("active_ellipsoid: node index outside [1, N]");
  return node_index < cfg.n_ae_to_koz ? cfg.ae : cfg.koz;
}

MinSeparation min_separation_instant(const RoeState& x_i, double t_i,
                                     const SafetyEllipsoid& ellipsoid, const SafetyConfig& cfg,
                                     const OrbitalElementsQNS& oe) {
  const Mat3 p_sqrt = ellipsoid.shape_sqrt();
  MinSeparation best;
  best.t_star = t_i;
  best.scan_index = 0;
  best.distance = weighted_distance(x_i, t_i, p_sqrt, oe);
  if (cfg.t_safety > 0.0) {
    const double dt = cfg.t_safety / cfg.n_safety;
    for (int k = 1; k <= cfg.n_safety; ++k) {
      const double t_k = t_i + dt * k;
      const RoeState drifted = stm_roe(oe, t_i, t_k) * x_i;
      const double d = weighted_distance(drifted, t_k, p_sqrt, oe);
      if (d < best.distance) {
        best.distance = d;
        best.t_star = t_k;
        best.scan_index = k;
      }
    }
  }
  best.stm = stm_roe(oe, t_i, best.t_star);
  return best;
}

Mat6 drift_covariance(const Mat6& x_cov, double t_i, const MinSeparation& sep,
                      const SafetyConfig& cfg, const OrbitalElementsQNS& oe,
                      const Mat6& process_noise) {
  if (sep.scan_index == 0) return x_cov;
  const double dt = cfg.t_safety / cfg.n_safety;
  Mat6 cov = x_cov;
  for (int k = 0; k < sep.scan_index; ++k) {
    const Mat6 phi = stm_roe(oe, t_i + dt * k, t_i + dt * (k + 1));
    cov = symmetrize(phi * cov * phi.transpose()) + process_noise;
  }
  return cov;
}

LinearizedConstraint linearize_passive_safety(const RoeState& x_ref, const Mat6& cov_at_tstar,
                                              double t_i, double t_star,
                                              const SafetyEllipsoid& ellipsoid,
                                              const OrbitalElementsQNS& oe, double q) {
  const Mat6 metric = constraint_metric(ellipsoid, t_i, t_star, oe);
  LinearizedConstraint lc;
  lc.t_star = t_star;
  lc.a_ps = metric * x_ref;
  const double b_sq = x_ref.dot(lc.a_ps);
  if (b_sq <= 0.0)
    throw std::domain_error("linearize_passive_safety: reference at ellipsoid center");
  lc.b_ps = std::sqrt(b_sq);
  lc.beta = cov_at_tstar.isZero() ? 0.0 : q * (psd_sqrt(cov_at_tstar) * lc.a_ps).norm();
  return lc;
}

double nonlinear_constraint_value(const RoeState& x, const Mat6& x_cov, int node_index, double t_i,
                                  const SafetyConfig& cfg, const OrbitalElementsQNS& oe,
                                  const Mat6& process_noise) {
  const SafetyEllipsoid& ellipsoid = active_ellipsoid(node_index, cfg);
  const MinSeparation sep = min_separation_instant(x, t_i, ellipsoid, cfg, oe);
  const double g = sep.distance;
  if (g == 0.0) return 1.0;  // at the center: maximally violated, gradient undefined
  double margin = 0.0;
  if (!x_cov.isZero()) {
    const Mat6 metric = constraint_metric(ellipsoid, t_i, sep.t_star, oe);
    const Vec6 grad = metric * x / g;
    const Mat6 cov_star = drift_covariance(x_cov, t_i, sep, cfg, oe, process_noise);
    margin = cfg.q * (psd_sqrt(cov_star) * grad).norm();
  }
  return 1.0 - g + margin;
}

ViolationSeries violation_metric(const std::vector<RoeState>& states,
                                 const std::vector<Mat6>& covariances, const TimeGrid& grid,
                                 const SafetyConfig& cfg, const OrbitalElementsQNS& oe,
                                 const Mat6& process_noise) {
  const int n = static_cast<int>(states.size());
  if (grid.size() != n || static_cast<int>(covariances.size()) != n)
    throw std::invalid_argument("violation_metric: inconsistent history lengths");
  ViolationSeries out;
  out.per_node.resize(n);
  out.budget.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v =
        nonlinear_constraint_value(states[i], covariances[i], i + 1, grid[i], cfg, oe, process_noise);
    out.per_node[i] = v > cfg.violation_tol ? 1 : 0;
  }
  int acc = 0;
  for (int i = n - 1; i >= 0; --i) {
    acc += out.per_node[i];
    out.budget[i] = acc;
  }
  return out;
}

}  // namespace rendopt
