#include "rendopt/socp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rendopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

uint64_t fnv64(const void* data, size_t len, uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t pattern_signature(const SpMat& a) {
  uint64_t h = fnv64(a.outerIndexPtr(), sizeof(int) * (a.outerSize() + 1));
  h = fnv64(a.innerIndexPtr(), sizeof(int) * a.nonZeros(), h);
  const int dims[2] = {static_cast<int>(a.rows()), static_cast<int>(a.cols())};
  return fnv64(dims, sizeof(dims), h);
}

/// Projects one second-order-cone block [t; v] in place.
void project_soc(double* block, int dim) {
  Eigen::Map<Eigen::VectorXd> v(block + 1, dim - 1);
  const double t = block[0];
  const double vn = v.norm();
  if (vn <= t) return;
  if (vn <= -t) {
    block[0] = 0.0;
    v.setZero();
    return;
  }
  const double scale = 0.5 * (1.0 + t / vn);
  block[0] = scale * vn;
  v *= scale;
}

struct ScaledData {
  SpMat a;                  // D * A * E
  Eigen::VectorXd col;      // E diagonal
  Eigen::VectorXd row;      // D diagonal
  Eigen::VectorXd cost;     // gamma * E * c
  Eigen::VectorXd eq_rhs;   // D_eq * rhs
  Eigen::VectorXd box_lo;
  Eigen::VectorXd box_hi;
  double gamma = 1.0;
};

/// Ruiz equilibration; rows of one cone share a common scaling so the cone is
/// preserved.
ScaledData equilibrate(const ConeProblem& p) {
  const int m = p.num_rows();
  const int n = p.num_vars;
  ScaledData s;
  s.a = p.a;
  s.row = Eigen::VectorXd::Ones(m);
  s.col = Eigen::VectorXd::Ones(n);
  const int cone_start = p.num_eq() + p.num_box();
  for (int pass = 0; pass < 10; ++pass) {
    Eigen::VectorXd rnorm = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd cnorm = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < s.a.outerSize(); ++k) {
      for (SpMat::InnerIterator it(s.a, k); it; ++it) {
        const double v = std::abs(it.value());
        rnorm(it.row()) = std::max(rnorm(it.row()), v);
        cnorm(it.col()) = std::max(cnorm(it.col()), v);
      }
    }
    // Uniform scaling per cone block.
    int r = cone_start;
    for (int dim : p.soc_dims) {
      const double blk = rnorm.segment(r, dim).maxCoeff();
      rnorm.segment(r, dim).setConstant(blk);
      r += dim;
    }
    Eigen::VectorXd dr(m), dc(n);
    for (int i = 0; i < m; ++i) dr(i) = rnorm(i) > 1e-12 ? 1.0 / std::sqrt(rnorm(i)) : 1.0;
    for (int j = 0; j < n; ++j) dc(j) = cnorm(j) > 1e-12 ? 1.0 / std::sqrt(cnorm(j)) : 1.0;
    for (int k = 0; k < s.a.outerSize(); ++k) {
      for (SpMat::InnerIterator it(s.a, k); it; ++it) {
        it.valueRef() *= dr(it.row()) * dc(it.col());
      }
    }
    s.row.array() *= dr.array();
    s.col.array() *= dc.array();
  }
  Eigen::VectorXd ec = s.col.asDiagonal() * p.cost;
  s.gamma = 1.0 / std::max(1.0, ec.lpNorm<Eigen::Infinity>());
  s.cost = s.gamma * ec;
  s.eq_rhs = s.row.head(p.num_eq()).asDiagonal() * p.eq_rhs;
  s.box_lo.resize(p.num_box());
  s.box_hi.resize(p.num_box());
  for (int i = 0; i < p.num_box(); ++i) {
    const double d = s.row(p.num_eq() + i);
    s.box_lo(i) = std::isfinite(p.box_lo(i)) ? p.box_lo(i) * d : p.box_lo(i);
    s.box_hi(i) = std::isfinite(p.box_hi(i)) ? p.box_hi(i) * d : p.box_hi(i);
  }
  return s;
}

/// Support function of the scaled constraint set at lambda. Returns +inf when
/// lambda pushes on an unbounded side.
double support_function(const ConeProblem& p, const ScaledData& s, const Eigen::VectorXd& lam,
                        bool clamp_infeasible) {
  double sup = 0.0;
  const int ne = p.num_eq();
  const int nb = p.num_box();
  for (int i = 0; i < ne; ++i) sup += s.eq_rhs(i) * lam(i);
  for (int i = 0; i < nb; ++i) {
    const double l = lam(ne + i);
    if (l > 0.0) {
      if (std::isfinite(s.box_hi(i)))
        sup += s.box_hi(i) * l;
      else if (!clamp_infeasible)
        return kInf;
    } else if (l < 0.0) {
      if (std::isfinite(s.box_lo(i)))
        sup += s.box_lo(i) * l;
      else if (!clamp_infeasible)
        return kInf;
    }
  }
  // Cone rows contribute zero for polar-cone multipliers; membership holds by
  // construction of the projection residual.
  return sup;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kMaxIters:
      return "max-iters";
    case SolveStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

void ConeProblem::validate() const {
  int cone_rows = 0;
  for (int d : soc_dims) {
    if (d < 2) throw std::invalid_argument("ConeProblem: cone dimension must be >= 2");
    cone_rows += d;
  }
  if (num_eq() + num_box() + cone_rows != num_rows())
    throw std::invalid_argument("ConeProblem: row sections do not cover the matrix");
  if (cost.size() != num_vars || a.cols() != num_vars)
    throw std::invalid_argument("ConeProblem: variable count mismatch");
  if (box_lo.size() != box_hi.size())
    throw std::invalid_argument("ConeProblem: box bound size mismatch");
}

ConicResult ConicSolver::solve(const ConeProblem& p, const SolverSettings& settings,
                               const ConicResult* warm) {
  p.validate();
  const int m = p.num_rows();
  const int n = p.num_vars;
  const int ne = p.num_eq();
  const int nb = p.num_box();
  const int cone_start = ne + nb;

  ScaledData sd = equilibrate(p);

  double rho = settings.rho;
  auto rho_row = [&](int i) { return i < ne ? rho * settings.rho_eq_scale : rho; };

  Eigen::VectorXd rho_vec(m);
  auto build_kkt = [&]() {
    for (int i = 0; i < m; ++i) rho_vec(i) = rho_row(i);
    SpMat at = sd.a.transpose();
    SpMat k = at * rho_vec.asDiagonal() * sd.a;
    SpMat eye(n, n);
    eye.setIdentity();
    k += settings.sigma * eye;
    const uint64_t sig = pattern_signature(k);
    if (!analyzed_ || sig != pattern_sig_) {
      ldlt_.analyzePattern(k);
      pattern_sig_ = sig;
      analyzed_ = true;
    }
    ldlt_.factorize(k);
    if (ldlt_.info() != Eigen::Success)
      throw std::runtime_error("ConicSolver: KKT factorization failed");
  };
  build_kkt();

  Eigen::VectorXd zh = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd yh = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
  if (warm && warm->z.size() == n && warm->y.size() == m && warm->lambda.size() == m) {
    zh = sd.col.cwiseInverse().asDiagonal() * warm->z;
    yh = sd.row.asDiagonal() * warm->y;
    lam = sd.gamma * (sd.row.cwiseInverse().asDiagonal() * warm->lambda);
  }

  auto project = [&](Eigen::VectorXd& v) {
    v.head(ne) = sd.eq_rhs;
    for (int i = 0; i < nb; ++i) {
      double& x = v(ne + i);
      x = std::min(std::max(x, sd.box_lo(i)), sd.box_hi(i));
    }
    int r = cone_start;
    for (int dim : p.soc_dims) {
      project_soc(v.data() + r, dim);
      r += dim;
    }
  };

  ConicResult best;
  double best_metric = kInf;
  Eigen::VectorXd lam_prev_check = lam;
  int refactor_count = 0;

  auto unscale = [&](const Eigen::VectorXd& zh_, const Eigen::VectorXd& yh_,
                     const Eigen::VectorXd& lam_, ConicResult& out) {
    out.z = sd.col.asDiagonal() * zh_;
    out.y = sd.row.cwiseInverse().asDiagonal() * yh_;
    out.lambda = (1.0 / sd.gamma) * (sd.row.asDiagonal() * lam_);
  };

  auto residuals = [&](ConicResult& out) {
    const Eigen::VectorXd az = p.a * out.z;
    const double pr_num = (az - out.y).lpNorm<Eigen::Infinity>();
    const double pr_den = std::max(
        {1.0, az.lpNorm<Eigen::Infinity>(), out.y.lpNorm<Eigen::Infinity>()});
    out.r_prim = pr_num / pr_den;
    const Eigen::VectorXd atl = p.a.transpose() * out.lambda;
    out.r_dual = (p.cost + atl).lpNorm<Eigen::Infinity>() /
                 std::max({1.0, p.cost.lpNorm<Eigen::Infinity>(), atl.lpNorm<Eigen::Infinity>()});
    const double pobj = p.cost.dot(out.z);
    // Support of the unscaled set: evaluate through the scaled data with the
    // scaled multiplier (the bilinear form is scale-invariant).
    Eigen::VectorXd lam_scaled = sd.gamma * (sd.row.cwiseInverse().asDiagonal() * out.lambda);
    const double dobj = -support_function(p, sd, lam_scaled, true) / sd.gamma;
    out.r_gap = std::abs(pobj - dobj) / std::max({1.0, std::abs(pobj), std::abs(dobj)});
    out.objective = pobj;
  };

  const int check = std::max(1, settings.check_interval);
  int iter = 0;
  SolveStatus status = SolveStatus::kMaxIters;
  Eigen::VectorXd rhs(n), az(m), v(m);
  while (iter < settings.max_iter) {
    ++iter;
    rhs = settings.sigma * zh - sd.cost + sd.a.transpose() * (rho_vec.cwiseProduct(yh) - lam);
    zh = ldlt_.solve(rhs);
    az.noalias() = sd.a * zh;
    v = settings.alpha * az + (1.0 - settings.alpha) * yh + rho_vec.cwiseInverse().cwiseProduct(lam);
    Eigen::VectorXd y_new = v;
    project(y_new);
    lam += rho_vec.cwiseProduct(settings.alpha * az + (1.0 - settings.alpha) * yh - y_new);
    yh = y_new;

    if (iter % check == 0 || iter == settings.max_iter) {
      ConicResult cur;
      unscale(zh, yh, lam, cur);
      residuals(cur);
      const double metric = cur.kkt_residual();
      if (metric < best_metric) {
        best_metric = metric;
        best = cur;
        best.iterations = iter;
      }
      if (metric <= settings.eps) {
        status = SolveStatus::kOptimal;
        best = cur;
        best.iterations = iter;
        break;
      }
      // Primal infeasibility certificate from the multiplier drift.
      Eigen::VectorXd dlam = lam - lam_prev_check;
      lam_prev_check = lam;
      const double dln = dlam.lpNorm<Eigen::Infinity>();
      if (dln > 1e-12) {
        Eigen::VectorXd dlam_u = (1.0 / sd.gamma) * (sd.row.asDiagonal() * dlam);
        const double dlu = dlam_u.lpNorm<Eigen::Infinity>();
        const double at_dl =
            (p.a.transpose() * dlam_u).lpNorm<Eigen::Infinity>();
        Eigen::VectorXd dls = sd.gamma * (sd.row.cwiseInverse().asDiagonal() * dlam_u);
        const double sup = support_function(p, sd, dls, false) / sd.gamma;
        if (at_dl <= settings.eps_infeasible * dlu * std::max(1.0, p.a.coeffs().abs().maxCoeff()) &&
            std::isfinite(sup) && sup < -settings.eps_infeasible * dlu) {
          status = SolveStatus::kInfeasible;
          best = cur;
          best.iterations = iter;
          break;
        }
      }
      if (settings.adaptive_rho && refactor_count < 20 && iter < settings.max_iter) {
        const double ratio = std::sqrt(std::max(cur.r_prim, 1e-16) / std::max(cur.r_dual, 1e-16));
        if (ratio > 5.0 || ratio < 0.2) {
          rho = std::clamp(rho * ratio, 1e-6, 1e6);
          build_kkt();
          ++refactor_count;
        }
      }
    }
  }
  best.status = status;
  if (best.z.size() == 0) {
    unscale(zh, yh, lam, best);
    residuals(best);
    best.iterations = iter;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Problem dump / restore
// ---------------------------------------------------------------------------

void ConeProblem::dump(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("ConeProblem::dump: cannot open " + path);
  f.precision(17);
  f << "%%RendoptConeProblem 1\n";
  f << "vars " << num_vars << "\n";
  f << "cost " << cost.size() << "\n";
  for (int i = 0; i < cost.size(); ++i) f << cost(i) << "\n";
  f << "matrix " << a.rows() << " " << a.cols() << " " << a.nonZeros() << "\n";
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      f << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
  f << "eq " << num_eq() << "\n";
  for (int i = 0; i < num_eq(); ++i) f << eq_rhs(i) << "\n";
  f << "box " << num_box() << "\n";
  for (int i = 0; i < num_box(); ++i) f << box_lo(i) << " " << box_hi(i) << "\n";
  f << "soc " << soc_dims.size() << "\n";
  for (int d : soc_dims) f << d << "\n";
}

ConeProblem ConeProblem::restore(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("ConeProblem::restore: cannot open " + path);
  std::string tag;
  int version = 0;
  f >> tag >> version;
  if (tag != "%%RendoptConeProblem" || version != 1)
    throw std::runtime_error("ConeProblem::restore: unsupported format");
  ConeProblem p;
  std::string section;
  int count = 0;
  f >> section >> p.num_vars;
  f >> section >> count;
  p.cost.resize(count);
  for (int i = 0; i < count; ++i) f >> p.cost(i);
  int rows = 0, cols = 0, nnz = 0;
  f >> section >> rows >> cols >> nnz;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nnz);
  for (int k = 0; k < nnz; ++k) {
    int i = 0, j = 0;
    double v = 0.0;
    f >> i >> j >> v;
    trip.emplace_back(i - 1, j - 1, v);
  }
  p.a.resize(rows, cols);
  p.a.setFromTriplets(trip.begin(), trip.end());
  f >> section >> count;
  p.eq_rhs.resize(count);
  for (int i = 0; i < count; ++i) f >> p.eq_rhs(i);
  f >> section >> count;
  p.box_lo.resize(count);
  p.box_hi.resize(count);
  for (int i = 0; i < count; ++i) f >> p.box_lo(i) >> p.box_hi(i);
  f >> section >> count;
  p.soc_dims.resize(count);
  for (int i = 0; i < count; ++i) f >> p.soc_dims[i];
  if (!f) throw std::runtime_error("ConeProblem::restore: truncated file");
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Trajectory subproblem
// ---------------------------------------------------------------------------

namespace {

/// Variable layout: per mid node [x(6) u(3) s(1) xi?], final node [x(6) xi?].
struct VarLayout {
  int n_nodes;
  bool slack;

  int stride() const { return slack ? 11 : 10; }
  int x(int i) const { return i * stride(); }
  int u(int i) const { return x(i) + 6; }
  int s(int i) const { return x(i) + 9; }
  int xi(int i) const { return i + 1 < n_nodes ? x(i) + 10 : x(i) + 6; }
  int total() const { return (n_nodes - 1) * stride() + 6 + (slack ? 1 : 0); }
};

}  // namespace

void ConvexSubproblem::validate() const {
  const int n = n_nodes;
  if (n < 2) throw std::invalid_argument("ConvexSubproblem: need at least 2 nodes");
  if (static_cast<int>(stm.size()) != n - 1 || static_cast<int>(stm_b.size()) != n - 1)
    throw std::invalid_argument("ConvexSubproblem: dynamics matrix count mismatch");
  if (!constraints.empty()) {
    if (static_cast<int>(constraints.size()) != n)
      throw std::invalid_argument("ConvexSubproblem: need one linearized constraint per node");
    if (!(penalty_weight > 0.0))
      throw std::invalid_argument("ConvexSubproblem: penalty weight must be > 0");
  }
  const bool tr = radius_x > 0.0 || radius_u > 0.0;
  if (tr) {
    if (static_cast<int>(ref_states.size()) != n ||
        static_cast<int>(ref_controls.size()) != n - 1)
      throw std::invalid_argument("ConvexSubproblem: trust region requires a reference");
    if (!(radius_x > 0.0 && radius_u > 0.0))
      throw std::invalid_argument("ConvexSubproblem: both trust-region radii must be > 0");
  }
}

ConeProblem ConvexSubproblem::to_cone_problem() const {
  validate();
  const int n = n_nodes;
  const bool slack = !constraints.empty();
  const bool tr = radius_x > 0.0;
  const VarLayout vl{n, slack};

  ConeProblem p;
  p.num_vars = vl.total();
  p.cost = Eigen::VectorXd::Zero(p.num_vars);
  for (int i = 0; i + 1 < n; ++i) p.cost(vl.s(i)) = 1.0;
  if (slack)
    for (int i = 0; i < n; ++i) p.cost(vl.xi(i)) = penalty_weight;

  const int n_eq = 6 * (n - 1) + 12;
  const int n_box = (slack ? 2 * n : 0) + (tr ? 6 * n + 3 * (n - 1) : 0);
  const int n_cone_rows = 4 * (n - 1);
  const int m = n_eq + n_box + n_cone_rows;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(40 * n);
  p.eq_rhs = Eigen::VectorXd::Zero(n_eq);
  p.box_lo = Eigen::VectorXd::Zero(n_box);
  p.box_hi = Eigen::VectorXd::Zero(n_box);

  int row = 0;
  // Dynamics: x_{i+1} - Phi_i x_i - (Phi B)_i u_i = 0.
  for (int i = 0; i + 1 < n; ++i) {
    for (int r = 0; r < 6; ++r) {
      trip.emplace_back(row + r, vl.x(i + 1) + r, 1.0);
      for (int c = 0; c < 6; ++c) {
        const double v = stm[i](r, c);
        if (v != 0.0) trip.emplace_back(row + r, vl.x(i) + c, -v);
      }
      for (int c = 0; c < 3; ++c) {
        const double v = stm_b[i](r, c);
        if (v != 0.0) trip.emplace_back(row + r, vl.u(i) + c, -v);
      }
    }
    row += 6;
  }
  // Boundary conditions.
  for (int r = 0; r < 6; ++r) {
    trip.emplace_back(row + r, vl.x(0) + r, 1.0);
    p.eq_rhs(row + r) = x0(r);
  }
  row += 6;
  for (int r = 0; r < 6; ++r) {
    trip.emplace_back(row + r, vl.x(n - 1) + r, 1.0);
    p.eq_rhs(row + r) = xf(r);
  }
  row += 6;

  int box = 0;
  if (slack) {
    // -a'x_i - xi_i <= -(b + beta).
    for (int i = 0; i < n; ++i) {
      const LinearizedConstraint& lc = constraints[i];
      for (int c = 0; c < 6; ++c) {
        const double v = -lc.a_ps(c);
        if (v != 0.0) trip.emplace_back(row, vl.x(i) + c, v);
      }
      trip.emplace_back(row, vl.xi(i), -1.0);
      p.box_lo(box) = -kInf;
      p.box_hi(box) = -(lc.b_ps + lc.beta);
      ++row;
      ++box;
    }
    // xi_i >= 0.
    for (int i = 0; i < n; ++i) {
      trip.emplace_back(row, vl.xi(i), 1.0);
      p.box_lo(box) = 0.0;
      p.box_hi(box) = kInf;
      ++row;
      ++box;
    }
  }
  if (tr) {
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 6; ++c) {
        trip.emplace_back(row, vl.x(i) + c, 1.0);
        p.box_lo(box) = ref_states[i](c) - radius_x;
        p.box_hi(box) = ref_states[i](c) + radius_x;
        ++row;
        ++box;
      }
    }
    for (int i = 0; i + 1 < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        trip.emplace_back(row, vl.u(i) + c, 1.0);
        p.box_lo(box) = ref_controls[i](c) - radius_u;
        p.box_hi(box) = ref_controls[i](c) + radius_u;
        ++row;
        ++box;
      }
    }
  }
  // Epigraph cones s_i >= ||u_i||.
  for (int i = 0; i + 1 < n; ++i) {
    trip.emplace_back(row, vl.s(i), 1.0);
    for (int c = 0; c < 3; ++c) trip.emplace_back(row + 1 + c, vl.u(i) + c, 1.0);
    p.soc_dims.push_back(4);
    row += 4;
  }

  p.a.resize(m, p.num_vars);
  p.a.setFromTriplets(trip.begin(), trip.end());
  return p;
}

double SubproblemSolution::dynamics_residual(const ConvexSubproblem& sp) const {
  double res = 0.0;
  for (int i = 0; i + 1 < sp.n_nodes; ++i) {
    const RoeState pred = sp.stm[i] * states[i] + sp.stm_b[i] * controls[i];
    res = std::max(res, (states[i + 1] - pred).lpNorm<Eigen::Infinity>());
  }
  res = std::max(res, (states.front() - sp.x0).lpNorm<Eigen::Infinity>());
  res = std::max(res, (states.back() - sp.xf).lpNorm<Eigen::Infinity>());
  return res;
}

ConvexSubproblem build_subproblem(const std::vector<RoeState>& ref_states,
                                  const std::vector<ControlImpulse>& ref_controls,
                                  const std::vector<LinearizedConstraint>& constraints,
                                  const TimeGrid& grid, const OrbitalElementsQNS& oe,
                                  const RoeState& x0, const RoeState& xf, double radius_x,
                                  double radius_u, double penalty_weight) {
  const int n = grid.size();
  if (static_cast<int>(ref_states.size()) != n)
    throw std::invalid_argument("build_subproblem: reference node count mismatch");
  if (static_cast<int>(ref_controls.size()) != n - 1)
    throw std::invalid_argument("build_subproblem: reference control count mismatch");
  ConvexSubproblem sp;
  sp.n_nodes = n;
  sp.stm.reserve(n - 1);
  sp.stm_b.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    const Mat6 phi = stm_roe(oe, grid[i], grid[i + 1]);
    sp.stm.push_back(phi);
    sp.stm_b.push_back(phi * control_input_matrix(oe, grid[i]));
  }
  sp.x0 = x0;
  sp.xf = xf;
  sp.constraints = constraints;
  sp.ref_states = ref_states;
  sp.ref_controls = ref_controls;
  sp.radius_x = radius_x;
  sp.radius_u = radius_u;
  sp.penalty_weight = penalty_weight;
  sp.validate();
  return sp;
}

SubproblemSolution solve_subproblem(ConicSolver& solver, const ConvexSubproblem& sp,
                                    const SolverSettings& settings, const ConicResult* warm) {
  const ConeProblem p = sp.to_cone_problem();
  ConicResult res = solver.solve(p, settings, warm);

  const int n = sp.n_nodes;
  const bool slack = !sp.constraints.empty();
  const VarLayout vl{n, slack};
  SubproblemSolution out;
  out.states.resize(n);
  out.controls.resize(n - 1);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 6; ++c) out.states[i](c) = res.z(vl.x(i) + c);
  for (int i = 0; i + 1 < n; ++i)
    for (int c = 0; c < 3; ++c) out.controls[i](c) = res.z(vl.u(i) + c);
  // Exact cleanup of the auxiliary variables: the epigraph is tight at any
  // optimum and the slack is determined by the safety rows, so both moves are
  // feasibility-preserving and never increase the objective.
  out.control_cost = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double s = out.controls[i].norm();
    res.z(vl.s(i)) = s;
    out.control_cost += s;
  }
  out.objective = out.control_cost;
  if (slack) {
    out.slacks.resize(n);
    for (int i = 0; i < n; ++i) {
      const double viol = constraint_value(out.states[i], sp.constraints[i]);
      out.slacks[i] = std::max(0.0, viol);
      res.z(vl.xi(i)) = out.slacks[i];
      out.objective += sp.penalty_weight * out.slacks[i];
    }
  }
  out.status = res.status;
  out.iterations = res.iterations;
  out.r_prim = res.r_prim;
  out.r_dual = res.r_dual;
  out.r_gap = res.r_gap;
  out.raw = std::move(res);
  return out;
}

TpbvpResult solve_tpbvp(const RoeState& x0, const RoeState& xf, const TimeGrid& grid,
                        const OrbitalElementsQNS& oe, const SolverSettings& settings) {
  const int n = grid.size();
  const std::vector<RoeState> ref_states(n, RoeState::Zero());
  const std::vector<ControlImpulse> ref_controls(n - 1, ControlImpulse::Zero());
  const ConvexSubproblem sp = build_subproblem(ref_states, ref_controls, {}, grid, oe, x0, xf,
                                               0.0, 0.0, 0.0);
  ConicSolver solver;
  const SubproblemSolution sol = solve_subproblem(solver, sp, settings);
  TpbvpResult out;
  out.states = sol.states;
  out.controls = sol.controls;
  out.objective = sol.control_cost;
  out.status = sol.status;
  out.iterations = sol.iterations;
  return out;
}

}  // namespace rendopt
