// NEON kernels for aarch64 (float64x2). Structure mirrors the AVX2 TU.

#include "agrignn/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace agrignn::kernels {
namespace {

void gemm_nn_neon(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const float64x2_t aik = vdupq_n_f64(arow[p]);
      const double* brow = b + static_cast<std::size_t>(p) * n;
      int j = 0;
      for (; j + 2 <= n; j += 2)
        vst1q_f64(crow + j, vfmaq_f64(vld1q_f64(crow + j), aik, vld1q_f64(brow + j)));
      for (; j < n; ++j) crow[j] += arow[p] * brow[j];
    }
  }
}

double dot_neon(const double* x, const double* y, int n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  int i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void gemm_nt_neon(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] += dot_neon(arow, b + static_cast<std::size_t>(j) * k, k);
  }
}

void gemm_tn_neon(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int p = 0; p < k; ++p) {
    const double* arow = a + static_cast<std::size_t>(p) * m;
    const double* brow = b + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const float64x2_t api = vdupq_n_f64(arow[i]);
      double* crow = c + static_cast<std::size_t>(i) * n;
      int j = 0;
      for (; j + 2 <= n; j += 2)
        vst1q_f64(crow + j, vfmaq_f64(vld1q_f64(crow + j), api, vld1q_f64(brow + j)));
      for (; j < n; ++j) crow[j] += arow[i] * brow[j];
    }
  }
}

void axpy_neon(double alpha, const double* x, double* y, int n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  int i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_neon(const double* x, int n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  int i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double sqdist_neon(const double* x, const double* y, int n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

void hadamard_neon(const double* x, const double* y, double* z, int n) {
  int i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(z + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) z[i] = x[i] * y[i];
}

void hadamard_acc_neon(const double* x, const double* y, double* z, int n) {
  int i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(z + i, vfmaq_f64(vld1q_f64(z + i), vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) z[i] += x[i] * y[i];
}

void relu_neon(const double* x, double* y, int n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  int i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmaxq_f64(zero, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_neon(const double* x, const double* g, double* gx, int n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t mask = vcgtq_f64(vld1q_f64(x + i), zero);
    const float64x2_t gm =
        vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(vld1q_f64(g + i))));
    vst1q_f64(gx + i, vaddq_f64(vld1q_f64(gx + i), gm));
  }
  for (; i < n; ++i)
    if (x[i] > 0.0) gx[i] += g[i];
}

void acc_sq_diff_neon(const double* x, const double* mean, double* acc, int n) {
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(mean + i));
    vst1q_f64(acc + i, vfmaq_f64(vld1q_f64(acc + i), d, d));
  }
  for (; i < n; ++i) {
    const double d = x[i] - mean[i];
    acc[i] += d * d;
  }
}

void bn_apply_neon(const double* x, const double* mean, const double* invstd, const double* gamma,
                   const double* beta, double* y, int n) {
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t xhat =
        vmulq_f64(vsubq_f64(vld1q_f64(x + i), vld1q_f64(mean + i)), vld1q_f64(invstd + i));
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(beta + i), vld1q_f64(gamma + i), xhat));
  }
  for (; i < n; ++i) y[i] = gamma[i] * ((x[i] - mean[i]) * invstd[i]) + beta[i];
}

void adam_update_neon(double* param, double* m, double* v, const double* g, int n, double lr,
                      double beta1, double beta2, double eps, double bc1, double bc2) {
  for (int i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    param[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
  }
}

}  // namespace

const Backend* neon_backend_impl() {
  static const Backend table = {
      .name = "neon",
      .gemm_nn = gemm_nn_neon,
      .gemm_nt = gemm_nt_neon,
      .gemm_tn = gemm_tn_neon,
      .dot = dot_neon,
      .axpy = axpy_neon,
      .sum = sum_neon,
      .sqdist = sqdist_neon,
      .hadamard = hadamard_neon,
      .hadamard_acc = hadamard_acc_neon,
      .relu = relu_neon,
      .relu_backward = relu_backward_neon,
      .acc_sq_diff = acc_sq_diff_neon,
      .bn_apply = bn_apply_neon,
      .adam_update = adam_update_neon,
  };
  return &table;
}

}  // namespace agrignn::kernels

#else

namespace agrignn::kernels {
const Backend* neon_backend_impl() { return nullptr; }
}  // namespace agrignn::kernels

#endif
