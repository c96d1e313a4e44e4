#pragma once
// Hot arithmetic kernels behind a runtime-dispatched backend table.
//
// The scalar backend is the reference semantics; SIMD backends (AVX2 on
// x86-64, NEON on aarch64) are drop-in variants selected once per process.
// SIMD results may differ from scalar by reduction-order rounding only;
// the equivalence tests pin that down.
//
// Selection order: AGRIGNN_KERNELS env var ("scalar", "avx2", "neon"),
// else the widest backend the CPU supports, else scalar.

#include <string>
#include <vector>

namespace agrignn::kernels {

struct Backend {
  const char* name;

  // c[m x n] += a * b with the given storage:
  //   gemm_nn: a is m x k,  b is k x n
  //   gemm_nt: a is m x k,  b is n x k   (c += a * b^T)
  //   gemm_tn: a is k x m,  b is k x n   (c += a^T * b)
  void (*gemm_nn)(const double* a, const double* b, double* c, int m, int k, int n);
  void (*gemm_nt)(const double* a, const double* b, double* c, int m, int k, int n);
  void (*gemm_tn)(const double* a, const double* b, double* c, int m, int k, int n);

  double (*dot)(const double* x, const double* y, int n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, int n);
  double (*sum)(const double* x, int n);
  // squared Euclidean distance between two n-vectors
  double (*sqdist)(const double* x, const double* y, int n);

  // z = x .* y  /  z += x .* y
  void (*hadamard)(const double* x, const double* y, double* z, int n);
  void (*hadamard_acc)(const double* x, const double* y, double* z, int n);

  // y = max(0, x);  gx += g where x > 0 (subgradient at 0 is 0)
  void (*relu)(const double* x, double* y, int n);
  void (*relu_backward)(const double* x, const double* g, double* gx, int n);

  // acc += (x - mean).^2, used by batch-norm variance accumulation
  void (*acc_sq_diff)(const double* x, const double* mean, double* acc, int n);
  // y = gamma .* (x - mean) .* invstd + beta
  void (*bn_apply)(const double* x, const double* mean, const double* invstd, const double* gamma,
                   const double* beta, double* y, int n);

  // Fused Adam update. bc1/bc2 are the bias-correction factors 1/(1-beta^t).
  void (*adam_update)(double* param, double* m, double* v, const double* g, int n, double lr,
                      double beta1, double beta2, double eps, double bc1, double bc2);
};

/// Backend selected for this process (cached after first call).
const Backend& backend();

/// Reference backend, always available.
const Backend& scalar_backend();

/// Every backend this binary can run on the current CPU (scalar first).
std::vector<const Backend*> available_backends();

/// Override the process-wide selection ("auto" restores detection).
/// Throws config_error for names this build/CPU cannot honor.
void force_backend(const std::string& name);

}  // namespace agrignn::kernels
