#pragma once

#include <cstdint>

namespace rendopt::kern {

// Dense double-precision kernels used by the sequence model. All matrices are
// row-major and contiguous. The primary implementations parallelize over
// independent output rows with OpenMP; the kern::ref namespace keeps plain
// serial loops as the reference the unit tests and the kernel benchmark
// compare against.

/// c = a[m,k] * b[k,n]
void matmul(const double* a, const double* b, double* c, int m, int k, int n);
/// c += a[m,k] * b[k,n]
void matmul_acc(const double* a, const double* b, double* c, int m, int k, int n);
/// c = a[m,k] * b[n,k]^T
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
/// c += a[m,k]^T * b[m,n]  (a transposed, accumulate: weight gradients)
void matmul_tn_acc(const double* a, const double* b, double* c, int m, int k, int n);

/// y[m,n] += bias[n] per row
void add_bias(double* y, const double* bias, int m, int n);
/// db[n] += column sums of dy[m,n]
void bias_grad_acc(const double* dy, double* db, int m, int n);

void relu(const double* x, double* y, int64_t count);
/// dx = dy where x > 0 else 0 (accumulates into dx)
void relu_grad_acc(const double* x, const double* dy, double* dx, int64_t count);

/// Per-row layer normalization with learned gain/bias; saves mean and
/// reciprocal standard deviation for the backward pass.
void layernorm(const double* x, const double* gain, const double* bias, double* y, double* mean,
               double* rstd, int m, int n);
void layernorm_grad(const double* x, const double* gain, const double* mean, const double* rstd,
                    const double* dy, double* dx, double* dgain, double* dbias, int m, int n);

/// Causal row softmax over scores[t, t]: entries with column > row are masked.
void softmax_causal(double* scores, int t);
/// Backward through the causal softmax given probabilities p and upstream dp.
void softmax_causal_grad(const double* p, const double* dp, double* dscores, int t);

/// Fused Adam update step (element count n).
void adam_step(double* params, const double* grads, double* m_state, double* v_state, int64_t n,
               double lr, double beta1, double beta2, double eps, int t);

namespace ref {
void matmul(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_acc(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_tn_acc(const double* a, const double* b, double* c, int m, int k, int n);
void add_bias(double* y, const double* bias, int m, int n);
void bias_grad_acc(const double* dy, double* db, int m, int n);
void relu(const double* x, double* y, int64_t count);
void relu_grad_acc(const double* x, const double* dy, double* dx, int64_t count);
void layernorm(const double* x, const double* gain, const double* bias, double* y, double* mean,
               double* rstd, int m, int n);
void layernorm_grad(const double* x, const double* gain, const double* mean, const double* rstd,
                    const double* dy, double* dx, double* dgain, double* dbias, int m, int n);
void softmax_causal(double* scores, int t);
void softmax_causal_grad(const double* p, const double* dp, double* dscores, int t);
void adam_step(double* params, const double* grads, double* m_state, double* v_state, int64_t n,
               double lr, double beta1, double beta2, double eps, int t);
}  // namespace ref

}  // namespace rendopt::kern
