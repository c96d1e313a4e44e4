// Scalar kernels are the reference; every runnable SIMD backend must agree
// up to reduction-order rounding, including the remainder lanes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "agrignn/kernels.hpp"
#include "agrignn/rng.hpp"
#include "doctest.h"

using namespace agrignn;
using kernels::Backend;

namespace {

std::vector<double> random_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max(1.0, std::fabs(a[i]));
    CHECK(std::fabs(a[i] - b[i]) <= tol * scale);
  }
}

}  // namespace

TEST_CASE("backend dispatch lists scalar first and honors force_backend") {
  const auto backends = kernels::available_backends();
  REQUIRE(!backends.empty());
  CHECK(std::string(backends[0]->name) == "scalar");
  kernels::force_backend("scalar");
  CHECK(std::string(kernels::backend().name) == "scalar");
  kernels::force_backend("auto");
}

TEST_CASE("gemm variants match scalar reference across backends") {
  Rng rng(11);
  const Backend& ref = kernels::scalar_backend();
  for (const Backend* b : kernels::available_backends()) {
    // Sizes straddle the SIMD widths to exercise remainder handling.
    for (auto [m, k, n] : {std::tuple{1, 1, 1}, {3, 5, 7}, {8, 8, 8}, {13, 31, 9}, {20, 64, 33}}) {
      const auto a = random_vec(rng, m * k);
      const auto bm = random_vec(rng, k * n);
      const auto bt = random_vec(rng, n * k);
      const auto at = random_vec(rng, k * m);

      std::vector<double> c_ref(m * n, 0.5), c_got(m * n, 0.5);
      ref.gemm_nn(a.data(), bm.data(), c_ref.data(), m, k, n);
      b->gemm_nn(a.data(), bm.data(), c_got.data(), m, k, n);
      check_close(c_ref, c_got, 1e-12);

      std::fill(c_ref.begin(), c_ref.end(), 0.0);
      std::fill(c_got.begin(), c_got.end(), 0.0);
      ref.gemm_nt(a.data(), bt.data(), c_ref.data(), m, k, n);
      b->gemm_nt(a.data(), bt.data(), c_got.data(), m, k, n);
      check_close(c_ref, c_got, 1e-12);

      std::fill(c_ref.begin(), c_ref.end(), 0.0);
      std::fill(c_got.begin(), c_got.end(), 0.0);
      ref.gemm_tn(at.data(), bm.data(), c_ref.data(), m, k, n);
      b->gemm_tn(at.data(), bm.data(), c_got.data(), m, k, n);
      check_close(c_ref, c_got, 1e-12);
    }
  }
}

TEST_CASE("elementwise and reduction kernels match scalar reference") {
  Rng rng(23);
  const Backend& ref = kernels::scalar_backend();
  for (const Backend* b : kernels::available_backends()) {
    for (int n : {1, 2, 3, 4, 5, 7, 8, 9, 16, 17, 64, 129, 1000}) {
      const auto x = random_vec(rng, n);
      const auto y = random_vec(rng, n);

      CHECK(std::fabs(ref.dot(x.data(), y.data(), n) - b->dot(x.data(), y.data(), n)) <=
            1e-12 * n);
      CHECK(std::fabs(ref.sum(x.data(), n) - b->sum(x.data(), n)) <= 1e-12 * n);
      CHECK(std::fabs(ref.sqdist(x.data(), y.data(), n) - b->sqdist(x.data(), y.data(), n)) <=
            1e-12 * n);

      auto y_ref = y, y_got = y;
      ref.axpy(0.37, x.data(), y_ref.data(), n);
      b->axpy(0.37, x.data(), y_got.data(), n);
      check_close(y_ref, y_got, 1e-13);

      std::vector<double> z_ref(n), z_got(n);
      ref.hadamard(x.data(), y.data(), z_ref.data(), n);
      b->hadamard(x.data(), y.data(), z_got.data(), n);
      check_close(z_ref, z_got, 0.0);  // single multiply: bit-exact

      auto acc_ref = random_vec(rng, n);
      auto acc_got = acc_ref;
      ref.hadamard_acc(x.data(), y.data(), acc_ref.data(), n);
      b->hadamard_acc(x.data(), y.data(), acc_got.data(), n);
      check_close(acc_ref, acc_got, 1e-13);

      ref.relu(x.data(), z_ref.data(), n);
      b->relu(x.data(), z_got.data(), n);
      check_close(z_ref, z_got, 0.0);  // bit-exact

      auto gx_ref = random_vec(rng, n);
      auto gx_got = gx_ref;
      ref.relu_backward(x.data(), y.data(), gx_ref.data(), n);
      b->relu_backward(x.data(), y.data(), gx_got.data(), n);
      check_close(gx_ref, gx_got, 0.0);

      auto v_ref = random_vec(rng, n, 0.0, 1.0);
      auto v_got = v_ref;
      ref.acc_sq_diff(x.data(), y.data(), v_ref.data(), n);
      b->acc_sq_diff(x.data(), y.data(), v_got.data(), n);
      check_close(v_ref, v_got, 1e-13);

      const auto mean = random_vec(rng, n);
      const auto invstd = random_vec(rng, n, 0.5, 2.0);
      const auto gamma = random_vec(rng, n);
      const auto beta = random_vec(rng, n);
      ref.bn_apply(x.data(), mean.data(), invstd.data(), gamma.data(), beta.data(), z_ref.data(),
                   n);
      b->bn_apply(x.data(), mean.data(), invstd.data(), gamma.data(), beta.data(), z_got.data(),
                  n);
      check_close(z_ref, z_got, 1e-13);
    }
  }
}

TEST_CASE("adam kernel matches scalar reference") {
  Rng rng(31);
  const Backend& ref = kernels::scalar_backend();
  for (const Backend* b : kernels::available_backends()) {
    for (int n : {1, 3, 4, 7, 8, 33, 100}) {
      const auto g = random_vec(rng, n);
      auto p_ref = random_vec(rng, n), m_ref = random_vec(rng, n, 0.0, 0.1),
           v_ref = random_vec(rng, n, 0.0, 0.1);
      auto p_got = p_ref, m_got = m_ref, v_got = v_ref;
      ref.adam_update(p_ref.data(), m_ref.data(), v_ref.data(), g.data(), n, 0.02, 0.9, 0.999,
                      1e-8, 1.0 / (1.0 - 0.9), 1.0 / (1.0 - 0.999));
      b->adam_update(p_got.data(), m_got.data(), v_got.data(), g.data(), n, 0.02, 0.9, 0.999, 1e-8,
                     1.0 / (1.0 - 0.9), 1.0 / (1.0 - 0.999));
      check_close(p_ref, p_got, 1e-13);
      check_close(m_ref, m_got, 1e-13);
      check_close(v_ref, v_got, 1e-13);
    }
  }
}
