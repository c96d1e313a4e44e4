// AVX2/FMA kernels, 4 doubles per lane. This TU is compiled with
// -mavx2 -mfma on x86-64 and must only be entered after the dispatcher
// has confirmed CPU support.

#include "agrignn/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace agrignn::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

void gemm_nn_avx2(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const __m256d aik = _mm256_set1_pd(arow[p]);
      const double* brow = b + static_cast<std::size_t>(p) * n;
      int j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d cj = _mm256_loadu_pd(crow + j);
        cj = _mm256_fmadd_pd(aik, _mm256_loadu_pd(brow + j), cj);
        _mm256_storeu_pd(crow + j, cj);
      }
      for (; j < n; ++j) crow[j] += arow[p] * brow[j];
    }
  }
}

double dot_avx2(const double* x, const double* y, int n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void gemm_nt_avx2(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] += dot_avx2(arow, b + static_cast<std::size_t>(j) * k, k);
  }
}

void gemm_tn_avx2(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int p = 0; p < k; ++p) {
    const double* arow = a + static_cast<std::size_t>(p) * m;
    const double* brow = b + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const __m256d api = _mm256_set1_pd(arow[i]);
      double* crow = c + static_cast<std::size_t>(i) * n;
      int j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d cj = _mm256_loadu_pd(crow + j);
        cj = _mm256_fmadd_pd(api, _mm256_loadu_pd(brow + j), cj);
        _mm256_storeu_pd(crow + j, cj);
      }
      for (; j < n; ++j) crow[j] += arow[i] * brow[j];
    }
  }
}

void axpy_avx2(double alpha, const double* x, double* y, int n) {
  const __m256d va = _mm256_set1_pd(alpha);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yi = _mm256_loadu_pd(y + i);
    yi = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), yi);
    _mm256_storeu_pd(y + i, yi);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_avx2(const double* x, int n) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double sqdist_avx2(const double* x, const double* y, int n) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

void hadamard_avx2(const double* x, const double* y, double* z, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(z + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) z[i] = x[i] * y[i];
}

void hadamard_acc_avx2(const double* x, const double* y, double* z, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d zi = _mm256_loadu_pd(z + i);
    zi = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), zi);
    _mm256_storeu_pd(z + i, zi);
  }
  for (; i < n; ++i) z[i] += x[i] * y[i];
}

void relu_avx2(const double* x, double* y, int n) {
  const __m256d zero = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_max_pd(zero, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_avx2(const double* x, const double* g, double* gx, int n) {
  const __m256d zero = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    const __m256d gmasked = _mm256_and_pd(mask, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), gmasked));
  }
  for (; i < n; ++i)
    if (x[i] > 0.0) gx[i] += g[i];
}

void acc_sq_diff_avx2(const double* x, const double* mean, double* acc, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(mean + i));
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(d, d, _mm256_loadu_pd(acc + i)));
  }
  for (; i < n; ++i) {
    const double d = x[i] - mean[i];
    acc[i] += d * d;
  }
}

void bn_apply_avx2(const double* x, const double* mean, const double* invstd, const double* gamma,
                   const double* beta, double* y, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xhat =
        _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(mean + i)), _mm256_loadu_pd(invstd + i));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(_mm256_loadu_pd(gamma + i), xhat, _mm256_loadu_pd(beta + i)));
  }
  for (; i < n; ++i) y[i] = gamma[i] * ((x[i] - mean[i]) * invstd[i]) + beta[i];
}

void adam_update_avx2(double* param, double* m, double* v, const double* g, int n, double lr,
                      double beta1, double beta2, double eps, double bc1, double bc2) {
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb1c = _mm256_set1_pd(1.0 - beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vb2c = _mm256_set1_pd(1.0 - beta2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vbc1 = _mm256_set1_pd(bc1);
  const __m256d vbc2 = _mm256_set1_pd(bc2);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_loadu_pd(m + i);
    __m256d vi = _mm256_loadu_pd(v + i);
    mi = _mm256_fmadd_pd(vb1c, gi, _mm256_mul_pd(vb1, mi));
    vi = _mm256_fmadd_pd(vb2c, _mm256_mul_pd(gi, gi), _mm256_mul_pd(vb2, vi));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_mul_pd(mi, vbc1);
    const __m256d vhat = _mm256_mul_pd(vi, vbc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    param[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
  }
}

}  // namespace

const Backend* avx2_backend_impl() {
  static const Backend table = {
      .name = "avx2",
      .gemm_nn = gemm_nn_avx2,
      .gemm_nt = gemm_nt_avx2,
      .gemm_tn = gemm_tn_avx2,
      .dot = dot_avx2,
      .axpy = axpy_avx2,
      .sum = sum_avx2,
      .sqdist = sqdist_avx2,
      .hadamard = hadamard_avx2,
      .hadamard_acc = hadamard_acc_avx2,
      .relu = relu_avx2,
      .relu_backward = relu_backward_avx2,
      .acc_sq_diff = acc_sq_diff_avx2,
      .bn_apply = bn_apply_avx2,
      .adam_update = adam_update_avx2,
  };
  return &table;
}

}  // namespace agrignn::kernels

#else

namespace agrignn::kernels {
const Backend* avx2_backend_impl() { return nullptr; }
}  // namespace agrignn::kernels

#endif
