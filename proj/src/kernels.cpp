#include "rendopt/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace rendopt::kern {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

// Row-block partition so each thread owns a disjoint slice of the output;
// summation order per element is unchanged by the partition, which keeps
// results identical across thread counts.
template <typename F>
void for_row_blocks(int m, const F& f) {
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (int r = 0; r < m; ++r) f(r);
  }
}

}  // namespace

void matmul(const double* a, const double* b, double* c, int m, int k, int n) {
  CMap bm(b, k, n);
  constexpr int kBlock = 64;
  const int blocks = (m + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < blocks; ++blk) {
    const int r0 = blk * kBlock;
    const int rows = std::min(kBlock, m - r0);
    Map(c + static_cast<int64_t>(r0) * n, rows, n).noalias() =
        CMap(a + static_cast<int64_t>(r0) * k, rows, k) * bm;
  }
}

void matmul_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  CMap bm(b, k, n);
  constexpr int kBlock = 64;
  const int blocks = (m + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < blocks; ++blk) {
    const int r0 = blk * kBlock;
    const int rows = std::min(kBlock, m - r0);
    Map(c + static_cast<int64_t>(r0) * n, rows, n).noalias() +=
        CMap(a + static_cast<int64_t>(r0) * k, rows, k) * bm;
  }
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  CMap bm(b, n, k);
  constexpr int kBlock = 64;
  const int blocks = (m + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < blocks; ++blk) {
    const int r0 = blk * kBlock;
    const int rows = std::min(kBlock, m - r0);
    Map(c + static_cast<int64_t>(r0) * n, rows, n).noalias() =
        CMap(a + static_cast<int64_t>(r0) * k, rows, k) * bm.transpose();
  }
}

void matmul_tn_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  // c[k,n] += a[m,k]' * b[m,n]; parallel over output rows (columns of a).
  CMap am(a, m, k);
  CMap bm(b, m, n);
  constexpr int kBlock = 16;
  const int blocks = (k + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static)
  for (int blk = 0; blk < blocks; ++blk) {
    const int r0 = blk * kBlock;
    const int rows = std::min(kBlock, k - r0);
    Map(c + static_cast<int64_t>(r0) * n, rows, n).noalias() +=
        am.middleCols(r0, rows).transpose() * bm;
  }
}

void add_bias(double* y, const double* bias, int m, int n) {
  for_row_blocks(m, [&](int r) {
    double* row = y + static_cast<int64_t>(r) * n;
    for (int j = 0; j < n; ++j) row[j] += bias[j];
  });
}

void bias_grad_acc(const double* dy, double* db, int m, int n) {
  // Serial over rows: db is shared, and fixed order keeps runs bit-identical.
  for (int r = 0; r < m; ++r) {
    const double* row = dy + static_cast<int64_t>(r) * n;
    for (int j = 0; j < n; ++j) db[j] += row[j];
  }
}

void relu(const double* x, double* y, int64_t count) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < count; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_acc(const double* x, const double* dy, double* dx, int64_t count) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < count; ++i) dx[i] += x[i] > 0.0 ? dy[i] : 0.0;
}

void layernorm(const double* x, const double* gain, const double* bias, double* y, double* mean,
               double* rstd, int m, int n) {
  for_row_blocks(m, [&](int r) {
    const double* xr = x + static_cast<int64_t>(r) * n;
    double* yr = y + static_cast<int64_t>(r) * n;
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += xr[j];
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= n;
    const double rs = 1.0 / std::sqrt(var + 1e-5);
    mean[r] = mu;
    rstd[r] = rs;
    for (int j = 0; j < n; ++j) yr[j] = (xr[j] - mu) * rs * gain[j] + bias[j];
  });
}

void layernorm_grad(const double* x, const double* gain, const double* mean, const double* rstd,
                    const double* dy, double* dx, double* dgain, double* dbias, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < m; ++r) {
    const double* xr = x + static_cast<int64_t>(r) * n;
    const double* dyr = dy + static_cast<int64_t>(r) * n;
    double* dxr = dx + static_cast<int64_t>(r) * n;
    const double mu = mean[r];
    const double rs = rstd[r];
    double sum_dyg = 0.0;
    double sum_dyg_xhat = 0.0;
    for (int j = 0; j < n; ++j) {
      const double xhat = (xr[j] - mu) * rs;
      const double dyg = dyr[j] * gain[j];
      sum_dyg += dyg;
      sum_dyg_xhat += dyg * xhat;
    }
    for (int j = 0; j < n; ++j) {
      const double xhat = (xr[j] - mu) * rs;
      const double dyg = dyr[j] * gain[j];
      dxr[j] += rs * (dyg - sum_dyg / n - xhat * sum_dyg_xhat / n);
    }
  }
  // Parameter gradients in fixed row order (shared accumulators).
  for (int r = 0; r < m; ++r) {
    const double* xr = x + static_cast<int64_t>(r) * n;
    const double* dyr = dy + static_cast<int64_t>(r) * n;
    for (int j = 0; j < n; ++j) {
      dgain[j] += dyr[j] * (xr[j] - mean[r]) * rstd[r];
      dbias[j] += dyr[j];
    }
  }
}

void softmax_causal(double* scores, int t) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < t; ++r) {
    double* row = scores + static_cast<int64_t>(r) * t;
    double mx = row[0];
    for (int j = 1; j <= r; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j <= r; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    const double inv = 1.0 / sum;
    for (int j = 0; j <= r; ++j) row[j] *= inv;
    for (int j = r + 1; j < t; ++j) row[j] = 0.0;
  }
}

void softmax_causal_grad(const double* p, const double* dp, double* dscores, int t) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < t; ++r) {
    const double* pr = p + static_cast<int64_t>(r) * t;
    const double* dpr = dp + static_cast<int64_t>(r) * t;
    double* dsr = dscores + static_cast<int64_t>(r) * t;
    double dot = 0.0;
    for (int j = 0; j <= r; ++j) dot += pr[j] * dpr[j];
    for (int j = 0; j <= r; ++j) dsr[j] = pr[j] * (dpr[j] - dot);
    for (int j = r + 1; j < t; ++j) dsr[j] = 0.0;
  }
}

void adam_step(double* params, const double* grads, double* m_state, double* v_state, int64_t n,
               double lr, double beta1, double beta2, double eps, int t) {
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    m_state[i] = beta1 * m_state[i] + (1.0 - beta1) * grads[i];
    v_state[i] = beta2 * v_state[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double mhat = m_state[i] / bc1;
    const double vhat = v_state[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

// ---------------------------------------------------------------------------
// Serial reference implementations: straight loops, no blocking.
// ---------------------------------------------------------------------------

namespace ref {

void matmul(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += a[i * k + l] * b[l * n + j];
      c[i * n + j] = acc;
    }
  }
}

void matmul_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += a[i * k + l] * b[l * n + j];
      c[i * n + j] += acc;
    }
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += a[i * k + l] * b[j * k + l];
      c[i * n + j] = acc;
    }
}

void matmul_tn_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < m; ++l) acc += a[l * k + i] * b[l * n + j];
      c[i * n + j] += acc;
    }
}

void add_bias(double* y, const double* bias, int m, int n) {
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < n; ++j) y[r * n + j] += bias[j];
}

void bias_grad_acc(const double* dy, double* db, int m, int n) {
  kern::bias_grad_acc(dy, db, m, n);
}

void relu(const double* x, double* y, int64_t count) {
  for (int64_t i = 0; i < count; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_acc(const double* x, const double* dy, double* dx, int64_t count) {
  for (int64_t i = 0; i < count; ++i) dx[i] += x[i] > 0.0 ? dy[i] : 0.0;
}

void layernorm(const double* x, const double* gain, const double* bias, double* y, double* mean,
               double* rstd, int m, int n) {
  for (int r = 0; r < m; ++r) {
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += x[r * n + j];
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (x[r * n + j] - mu) * (x[r * n + j] - mu);
    var /= n;
    const double rs = 1.0 / std::sqrt(var + 1e-5);
    mean[r] = mu;
    rstd[r] = rs;
    for (int j = 0; j < n; ++j) y[r * n + j] = (x[r * n + j] - mu) * rs * gain[j] + bias[j];
  }
}

void layernorm_grad(const double* x, const double* gain, const double* mean, const double* rstd,
                    const double* dy, double* dx, double* dgain, double* dbias, int m, int n) {
  for (int r = 0; r < m; ++r) {
    double sum_dyg = 0.0;
    double sum_dyg_xhat = 0.0;
    for (int j = 0; j < n; ++j) {
      const double xhat = (x[r * n + j] - mean[r]) * rstd[r];
      const double dyg = dy[r * n + j] * gain[j];
      sum_dyg += dyg;
      sum_dyg_xhat += dyg * xhat;
    }
    for (int j = 0; j < n; ++j) {
      const double xhat = (x[r * n + j] - mean[r]) * rstd[r];
      const double dyg = dy[r * n + j] * gain[j];
      dx[r * n + j] += rstd[r] * (dyg - sum_dyg / n - xhat * sum_dyg_xhat / n);
      dgain[j] += dy[r * n + j] * xhat;
      dbias[j] += dy[r * n + j];
    }
  }
}

void softmax_causal(double* scores, int t) {
  for (int r = 0; r < t; ++r) {
    double* row = scores + r * t;
    double mx = row[0];
    for (int j = 1; j <= r; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j <= r; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (int j = 0; j <= r; ++j) row[j] /= sum;
    for (int j = r + 1; j < t; ++j) row[j] = 0.0;
  }
}

void softmax_causal_grad(const double* p, const double* dp, double* dscores, int t) {
  for (int r = 0; r < t; ++r) {
    double dot = 0.0;
    for (int j = 0; j <= r; ++j) dot += p[r * t + j] * dp[r * t + j];
    for (int j = 0; j <= r; ++j) dscores[r * t + j] = p[r * t + j] * (dp[r * t + j] - dot);
    for (int j = r + 1; j < t; ++j) dscores[r * t + j] = 0.0;
  }
}

void adam_step(double* params, const double* grads, double* m_state, double* v_state, int64_t n,
               double lr, double beta1, double beta2, double eps, int t) {
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (int64_t i = 0; i < n; ++i) {
    m_state[i] = beta1 * m_state[i] + (1.0 - beta1) * grads[i];
    v_state[i] = beta2 * v_state[i] + (1.0 - beta2) * grads[i] * grads[i];
    params[i] -= lr * (m_state[i] / bc1) / (std::sqrt(v_state[i] / bc2) + eps);
  }
}

}  // namespace ref

}  // namespace rendopt::kern
