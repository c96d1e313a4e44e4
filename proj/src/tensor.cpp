#include "agrignn/tensor.hpp"

#include <cmath>
#include <string>

#include "agrignn/errors.hpp"
#include "agrignn/kernels.hpp"

namespace agrignn {

using kernels::backend;

namespace {

void check_shape(bool ok, const std::string& what, const Matrix& a, const Matrix& b) {
  if (!ok)
    throw input_error(what + ": incompatible shapes " + a.shape_str() + " and " + b.shape_str());
}

}  // namespace

ValueId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<ValueId>(nodes_.size() - 1);
}

Tape::Node& Tape::at(ValueId id) { return nodes_[id]; }

ValueId Tape::constant(Matrix m) {
  Node n;
  n.op = Op::constant;
  n.value = std::move(m);
  return push(std::move(n));
}

ValueId Tape::parameter(Matrix m) {
  Node n;
  n.op = Op::parameter;
  n.value = std::move(m);
  n.requires_grad = true;
  ValueId id = push(std::move(n));
  parameters_.push_back(id);
  return id;
}

ValueId Tape::matmul(ValueId a, ValueId b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  check_shape(va.cols() == vb.rows(), "matmul", va, vb);
  Node n;
  n.op = Op::matmul;
  n.in0 = a;
  n.in1 = b;
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  n.value = Matrix(va.rows(), vb.cols());
  backend().gemm_nn(va.data(), vb.data(), n.value.data(), va.rows(), va.cols(), vb.cols());
  return push(std::move(n));
}

ValueId Tape::transpose(ValueId a) {
  const Matrix& va = value(a);
  Node n;
  n.op = Op::transpose;
  n.in0 = a;
  n.requires_grad = at(a).requires_grad;
  n.value = Matrix(va.cols(), va.rows());
  for (int i = 0; i < va.rows(); ++i)
    for (int j = 0; j < va.cols(); ++j) n.value(j, i) = va(i, j);
  return push(std::move(n));
}

ValueId Tape::concat_cols(ValueId a, ValueId b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  check_shape(va.rows() == vb.rows(), "concat_cols", va, vb);
  Node n;
  n.op = Op::concat_cols;
  n.in0 = a;
  n.in1 = b;
  n.split_col = va.cols();
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  n.value = Matrix(va.rows(), va.cols() + vb.cols());
  for (int i = 0; i < va.rows(); ++i) {
    double* out = n.value.row(i);
    const double* ra = va.row(i);
    const double* rb = vb.row(i);
    for (int j = 0; j < va.cols(); ++j) out[j] = ra[j];
    for (int j = 0; j < vb.cols(); ++j) out[va.cols() + j] = rb[j];
  }
  return push(std::move(n));
}

ValueId Tape::relu(ValueId x) {
  const Matrix& vx = value(x);
  Node n;
  n.op = Op::relu;
  n.in0 = x;
  n.requires_grad = at(x).requires_grad;
  n.value = Matrix(vx.rows(), vx.cols());
  backend().relu(vx.data(), n.value.data(), static_cast<int>(vx.size()));
  return push(std::move(n));
}

ValueId Tape::add_row_broadcast(ValueId x, ValueId bias) {
  const Matrix& vx = value(x);
  const Matrix& vb = value(bias);
  check_shape(vb.rows() == 1 && vb.cols() == vx.cols(), "add_row_broadcast", vx, vb);
  Node n;
  n.op = Op::add_row_broadcast;
  n.in0 = x;
  n.in1 = bias;
  n.requires_grad = at(x).requires_grad || at(bias).requires_grad;
  n.value = Matrix(vx.rows(), vx.cols());
  for (int i = 0; i < vx.rows(); ++i) {
    const double* rx = vx.row(i);
    double* out = n.value.row(i);
    const double* rb = vb.data();
    for (int j = 0; j < vx.cols(); ++j) out[j] = rx[j] + rb[j];
  }
  return push(std::move(n));
}

ValueId Tape::neighbor_mean(ValueId h, const AgriGraph& g) {
  const Matrix& vh = value(h);
  if (vh.rows() != g.node_count())
    throw input_error("neighbor_mean: matrix has " + std::to_string(vh.rows()) +
                      " rows but graph has " + std::to_string(g.node_count()) + " nodes");
  Node n;
  n.op = Op::neighbor_mean;
  n.in0 = h;
  n.graph = &g;
  n.requires_grad = at(h).requires_grad;
  n.value = Matrix(vh.rows(), vh.cols());
  const int d = vh.cols();
  for (int i = 0; i < g.node_count(); ++i) {
    const auto& nb = g.neighbors(i);
    if (nb.empty()) continue;  // isolated node keeps the zero row
    const double inv = 1.0 / static_cast<double>(nb.size());
    double* out = n.value.row(i);
    for (int j : nb) backend().axpy(inv, vh.row(j), out, d);
  }
  return push(std::move(n));
}

ValueId Tape::batchnorm_train(ValueId x, ValueId gamma, ValueId beta, BnRunningStats& running,
                              double eps, double momentum) {
  const Matrix& vx = value(x);
  const int rows = vx.rows();
  const int d = vx.cols();
  if (rows < 2) throw input_error("batchnorm_train requires at least 2 rows");
  const Matrix& vg = value(gamma);
  const Matrix& vb = value(beta);
  check_shape(vg.rows() == 1 && vg.cols() == d, "batchnorm gamma", vx, vg);
  check_shape(vb.rows() == 1 && vb.cols() == d, "batchnorm beta", vx, vb);
  if (static_cast<int>(running.mean.size()) != d)
    throw input_error("batchnorm running stats have wrong channel count");

  Node n;
  n.op = Op::batchnorm_train;
  n.in0 = x;
  n.in1 = gamma;
  n.in2 = beta;
  n.requires_grad = at(x).requires_grad || at(gamma).requires_grad || at(beta).requires_grad;

  std::vector<double> mean(d, 0.0);
  for (int i = 0; i < rows; ++i) backend().axpy(1.0, vx.row(i), mean.data(), d);
  for (double& m : mean) m /= rows;

  std::vector<double> var(d, 0.0);
  for (int i = 0; i < rows; ++i) backend().acc_sq_diff(vx.row(i), mean.data(), var.data(), d);
  for (double& v : var) v /= rows;

  std::vector<double> invstd(d);
  for (int c = 0; c < d; ++c) invstd[c] = 1.0 / std::sqrt(var[c] + eps);

  // Normalized activations are kept for the backward pass.
  n.aux = Matrix(rows, d);
  n.value = Matrix(rows, d);
  for (int i = 0; i < rows; ++i) {
    const double* rx = vx.row(i);
    double* xhat = n.aux.row(i);
    for (int c = 0; c < d; ++c) xhat[c] = (rx[c] - mean[c]) * invstd[c];
    double* out = n.value.row(i);
    const double* g = vg.data();
    const double* b = vb.data();
    for (int c = 0; c < d; ++c) out[c] = g[c] * xhat[c] + b[c];
  }

  // Running stats blend the unbiased variance estimate.
  const double unbias = static_cast<double>(rows) / (rows - 1);
  for (int c = 0; c < d; ++c) {
    running.mean[c] = (1.0 - momentum) * running.mean[c] + momentum * mean[c];
    running.var[c] = (1.0 - momentum) * running.var[c] + momentum * var[c] * unbias;
  }

  n.stat_mean = std::move(mean);
  n.stat_invstd = std::move(invstd);
  return push(std::move(n));
}

ValueId Tape::batchnorm_eval(ValueId x, ValueId gamma, ValueId beta, const BnRunningStats& running,
                             double eps) {
  const Matrix& vx = value(x);
  const int d = vx.cols();
  const Matrix& vg = value(gamma);
  const Matrix& vb = value(beta);
  check_shape(vg.rows() == 1 && vg.cols() == d, "batchnorm gamma", vx, vg);
  check_shape(vb.rows() == 1 && vb.cols() == d, "batchnorm beta", vx, vb);
  if (static_cast<int>(running.mean.size()) != d)
    throw input_error("batchnorm running stats have wrong channel count");

  Node n;
  n.op = Op::batchnorm_eval;
  n.in0 = x;
  n.in1 = gamma;
  n.in2 = beta;
  n.requires_grad = at(x).requires_grad || at(gamma).requires_grad || at(beta).requires_grad;
  n.stat_mean = running.mean;
  n.stat_invstd.resize(d);
  for (int c = 0; c < d; ++c) n.stat_invstd[c] = 1.0 / std::sqrt(running.var[c] + eps);

  n.value = Matrix(vx.rows(), d);
  for (int i = 0; i < vx.rows(); ++i)
    backend().bn_apply(vx.row(i), n.stat_mean.data(), n.stat_invstd.data(), vg.data(), vb.data(),
                       n.value.row(i), d);
  return push(std::move(n));
}

ValueId Tape::dropout(ValueId x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw input_error("dropout rate must be in [0, 1)");
  if (rate == 0.0) return x;
  const Matrix& vx = value(x);
  Node n;
  n.op = Op::dropout;
  n.in0 = x;
  n.requires_grad = at(x).requires_grad;
  n.aux = Matrix(vx.rows(), vx.cols());
  const double scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < vx.size(); ++i)
    n.aux.data()[i] = rng.uniform() < rate ? 0.0 : scale;
  n.value = Matrix(vx.rows(), vx.cols());
  backend().hadamard(vx.data(), n.aux.data(), n.value.data(), static_cast<int>(vx.size()));
  return push(std::move(n));
}

ValueId Tape::mse_masked(ValueId pred, const Matrix& target, const std::vector<int>& mask) {
  const Matrix& vp = value(pred);
  if (vp.cols() != 1) throw input_error("mse_masked expects an n x 1 prediction column");
  check_shape(vp.rows() == target.rows() && target.cols() == 1, "mse_masked", vp, target);
  if (mask.empty()) throw input_error("mse_masked: empty mask");
  for (int i : mask)
    if (i < 0 || i >= vp.rows()) throw input_error("mse_masked: mask index out of range");

  Node n;
  n.op = Op::mse_masked;
  n.in0 = pred;
  n.requires_grad = at(pred).requires_grad;
  n.aux = target;
  n.mask = mask;
  double acc = 0.0;
  for (int i : mask) {
    const double e = vp(i, 0) - target(i, 0);
    acc += e * e;
  }
  n.value = Matrix(1, 1, {acc / static_cast<double>(mask.size())});
  return push(std::move(n));
}

ValueId Tape::sum_all(ValueId x) {
  const Matrix& vx = value(x);
  Node n;
  n.op = Op::sum_all;
  n.in0 = x;
  n.requires_grad = at(x).requires_grad;
  n.value = Matrix(1, 1, {backend().sum(vx.data(), static_cast<int>(vx.size()))});
  return push(std::move(n));
}

void Tape::ensure_grad(ValueId id) {
  Node& n = at(id);
  if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
}

void Tape::backprop_node(ValueId id) {
  Node& n = at(id);
  const Matrix& g = n.grad;
  const auto sz = static_cast<int>(g.size());

  auto input_needs = [this](ValueId in) { return in >= 0 && at(in).requires_grad; };

  switch (n.op) {
    case Op::constant:
    case Op::parameter:
      break;

    case Op::matmul: {
      const Matrix& va = value(n.in0);
      const Matrix& vb = value(n.in1);
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        // dA += G * B^T
        backend().gemm_nt(g.data(), vb.data(), at(n.in0).grad.data(), g.rows(), g.cols(),
                          vb.rows());
      }
      if (input_needs(n.in1)) {
        ensure_grad(n.in1);
        // dB += A^T * G
        backend().gemm_tn(va.data(), g.data(), at(n.in1).grad.data(), va.cols(), va.rows(),
                          g.cols());
      }
      break;
    }

    case Op::transpose: {
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        Matrix& da = at(n.in0).grad;
        for (int i = 0; i < g.rows(); ++i)
          for (int j = 0; j < g.cols(); ++j) da(j, i) += g(i, j);
      }
      break;
    }

    case Op::concat_cols: {
      const int c0 = n.split_col;
      const int c1 = g.cols() - c0;
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        Matrix& da = at(n.in0).grad;
        for (int i = 0; i < g.rows(); ++i) backend().axpy(1.0, g.row(i), da.row(i), c0);
      }
      if (input_needs(n.in1)) {
        ensure_grad(n.in1);
        Matrix& db = at(n.in1).grad;
        for (int i = 0; i < g.rows(); ++i) backend().axpy(1.0, g.row(i) + c0, db.row(i), c1);
      }
      break;
    }

    case Op::relu: {
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        backend().relu_backward(value(n.in0).data(), g.data(), at(n.in0).grad.data(), sz);
      }
      break;
    }

    case Op::add_row_broadcast: {
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        backend().axpy(1.0, g.data(), at(n.in0).grad.data(), sz);
      }
      if (input_needs(n.in1)) {
        ensure_grad(n.in1);
        Matrix& db = at(n.in1).grad;
        for (int i = 0; i < g.rows(); ++i) backend().axpy(1.0, g.row(i), db.data(), g.cols());
      }
      break;
    }

    case Op::neighbor_mean: {
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        Matrix& dh = at(n.in0).grad;
        const AgriGraph& graph = *n.graph;
        const int d = g.cols();
        for (int i = 0; i < graph.node_count(); ++i) {
          const auto& nb = graph.neighbors(i);
          if (nb.empty()) continue;
          const double inv = 1.0 / static_cast<double>(nb.size());
          const double* gi = g.row(i);
          for (int j : nb) backend().axpy(inv, gi, dh.row(j), d);
        }
      }
      break;
    }

    case Op::batchnorm_train: {
      const int rows = g.rows();
      const int d = g.cols();
      const Matrix& xhat = n.aux;
      const double* gamma = value(n.in1).data();

      std::vector<double> sum_g(d, 0.0), sum_gx(d, 0.0);
      for (int i = 0; i < rows; ++i) {
        const double* gr = g.row(i);
        const double* xr = xhat.row(i);
        for (int c = 0; c < d; ++c) {
          sum_g[c] += gr[c];
          sum_gx[c] += gr[c] * xr[c];
        }
      }
      if (input_needs(n.in1)) {
        ensure_grad(n.in1);
        backend().axpy(1.0, sum_gx.data(), at(n.in1).grad.data(), d);
      }
      if (input_needs(n.in2)) {
        ensure_grad(n.in2);
        backend().axpy(1.0, sum_g.data(), at(n.in2).grad.data(), d);
      }
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        Matrix& dx = at(n.in0).grad;
        const double invn = 1.0 / static_cast<double>(rows);
        for (int i = 0; i < rows; ++i) {
          const double* gr = g.row(i);
          const double* xr = xhat.row(i);
          double* out = dx.row(i);
          for (int c = 0; c < d; ++c)
            out[c] += gamma[c] * n.stat_invstd[c] *
                      (gr[c] - invn * sum_g[c] - xr[c] * invn * sum_gx[c]);
        }
      }
      break;
    }

    case Op::batchnorm_eval: {
      const int rows = g.rows();
      const int d = g.cols();
      const Matrix& vx = value(n.in0);
      const double* gamma = value(n.in1).data();
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        Matrix& dx = at(n.in0).grad;
        for (int i = 0; i < rows; ++i) {
          const double* gr = g.row(i);
          double* out = dx.row(i);
          for (int c = 0; c < d; ++c) out[c] += gr[c] * gamma[c] * n.stat_invstd[c];
        }
      }
      if (input_needs(n.in1)) {
        ensure_grad(n.in1);
        Matrix& dg = at(n.in1).grad;
        for (int i = 0; i < rows; ++i) {
          const double* gr = g.row(i);
          const double* xr = vx.row(i);
          for (int c = 0; c < d; ++c)
            dg.data()[c] += gr[c] * (xr[c] - n.stat_mean[c]) * n.stat_invstd[c];
        }
      }
      if (input_needs(n.in2)) {
        ensure_grad(n.in2);
        Matrix& db = at(n.in2).grad;
        for (int i = 0; i < rows; ++i) backend().axpy(1.0, g.row(i), db.data(), d);
      }
      break;
    }

    case Op::dropout: {
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        backend().hadamard_acc(g.data(), n.aux.data(), at(n.in0).grad.data(), sz);
      }
      break;
    }

    case Op::mse_masked: {
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        Matrix& dp = at(n.in0).grad;
        const Matrix& vp = value(n.in0);
        const double scale = 2.0 * g(0, 0) / static_cast<double>(n.mask.size());
        for (int i : n.mask) dp(i, 0) += scale * (vp(i, 0) - n.aux(i, 0));
      }
      break;
    }

    case Op::sum_all: {
      if (input_needs(n.in0)) {
        ensure_grad(n.in0);
        Matrix& dx = at(n.in0).grad;
        const double gv = g(0, 0);
        for (std::size_t i = 0; i < dx.size(); ++i) dx.data()[i] += gv;
      }
      break;
    }
  }
}

void Tape::backward(ValueId loss) {
  if (loss < 0 || loss >= static_cast<ValueId>(nodes_.size()))
    throw input_error("backward: invalid loss node");
  Node& ln = at(loss);
  if (ln.value.rows() != 1 || ln.value.cols() != 1)
    throw input_error("backward: loss must be a 1x1 scalar, got " + ln.value.shape_str());

  ln.grad = Matrix(1, 1, {1.0});
  for (ValueId id = loss; id >= 0; --id) {
    Node& n = at(id);
    if (n.grad.empty() || !n.requires_grad) continue;
    backprop_node(id);
  }
  for (ValueId p : parameters_) ensure_grad(p);
  ran_backward_ = true;
}

const Matrix& Tape::grad(ValueId id) const {
  if (!ran_backward_) throw input_error("grad() queried before backward()");
  return nodes_[id].grad;
}

double finite_diff_check(const std::function<double(const std::vector<Matrix>&)>& f,
                         std::vector<Matrix> theta, const std::vector<Matrix>& analytic,
                         double eps) {
  if (theta.size() != analytic.size())
    throw input_error("finite_diff_check: analytic gradient count mismatch");
  double worst = 0.0;
  for (std::size_t p = 0; p < theta.size(); ++p) {
    if (!theta[p].same_shape(analytic[p]))
      throw input_error("finite_diff_check: gradient shape mismatch at parameter " +
                        std::to_string(p));
    for (std::size_t i = 0; i < theta[p].size(); ++i) {
      const double saved = theta[p].data()[i];
      theta[p].data()[i] = saved + eps;
      const double fp = f(theta);
      theta[p].data()[i] = saved - eps;
      const double fm = f(theta);
      theta[p].data()[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw numeric_error("finite_diff_check: non-finite function evaluation");
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[p].data()[i];
      const double rel = std::fabs(a - numeric) / std::max(1e-8, std::fabs(a) + std::fabs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace agrignn
