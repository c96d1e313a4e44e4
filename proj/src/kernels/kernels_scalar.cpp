// Scalar reference kernels. Every SIMD backend must match these up to
// floating-point reduction order.

#include <cmath>

#include "agrignn/kernels.hpp"

namespace agrignn::kernels {
namespace {

void gemm_nn_scalar(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double aik = arow[p];
      const double* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

void gemm_nt_scalar(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

void gemm_tn_scalar(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int p = 0; p < k; ++p) {
    const double* arow = a + static_cast<std::size_t>(p) * m;
    const double* brow = b + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double api = arow[i];
      double* crow = c + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += api * brow[j];
    }
  }
}

double dot_scalar(const double* x, const double* y, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_scalar(const double* x, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sqdist_scalar(const double* x, const double* y, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

void hadamard_scalar(const double* x, const double* y, double* z, int n) {
  for (int i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void hadamard_acc_scalar(const double* x, const double* y, double* z, int n) {
  for (int i = 0; i < n; ++i) z[i] += x[i] * y[i];
}

void relu_scalar(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_scalar(const double* x, const double* g, double* gx, int n) {
  for (int i = 0; i < n; ++i)
    if (x[i] > 0.0) gx[i] += g[i];
}

void acc_sq_diff_scalar(const double* x, const double* mean, double* acc, int n) {
  for (int i = 0; i < n; ++i) {
    const double d = x[i] - mean[i];
    acc[i] += d * d;
  }
}

void bn_apply_scalar(const double* x, const double* mean, const double* invstd, const double* gamma,
                     const double* beta, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = gamma[i] * ((x[i] - mean[i]) * invstd[i]) + beta[i];
}

void adam_update_scalar(double* param, double* m, double* v, const double* g, int n, double lr,
                        double beta1, double beta2, double eps, double bc1, double bc2) {
  for (int i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = m[i] * bc1;
    const double vhat = v[i] * bc2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend table = {
      .name = "scalar",
      .gemm_nn = gemm_nn_scalar,
      .gemm_nt = gemm_nt_scalar,
      .gemm_tn = gemm_tn_scalar,
      .dot = dot_scalar,
      .axpy = axpy_scalar,
      .sum = sum_scalar,
      .sqdist = sqdist_scalar,
      .hadamard = hadamard_scalar,
      .hadamard_acc = hadamard_acc_scalar,
      .relu = relu_scalar,
      .relu_backward = relu_backward_scalar,
      .acc_sq_diff = acc_sq_diff_scalar,
      .bn_apply = bn_apply_scalar,
      .adam_update = adam_update_scalar,
  };
  return table;
}

}  // namespace agrignn::kernels
