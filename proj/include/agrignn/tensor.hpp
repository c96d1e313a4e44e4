#pragma once
// Recorded dense-matrix operations with reverse-mode differentiation.
//
// A Tape owns every value produced during one forward pass. Primitives append
// nodes in topological order; backward() walks them once in exact reverse
// order, accumulating vector-Jacobian products. Parameters registered through
// parameter() always receive a gradient (zero when unused by the loss).

#include <functional>
#include <vector>

#include "agrignn/graph.hpp"
#include "agrignn/matrix.hpp"
#include "agrignn/rng.hpp"

namespace agrignn {

using ValueId = int;

/// Batch-norm running statistics (model state, not tape state).
struct BnRunningStats {
  std::vector<double> mean;
  std::vector<double> var;

  explicit BnRunningStats(int channels = 0) : mean(channels, 0.0), var(channels, 1.0) {}
};

class Tape {
 public:
  ValueId constant(Matrix m);
  ValueId parameter(Matrix m);
  const std::vector<ValueId>& parameters() const { return parameters_; }

  /// a (m x k) times b (k x n).
  ValueId matmul(ValueId a, ValueId b);
  ValueId transpose(ValueId a);
  /// Horizontal concatenation; rows must match.
  ValueId concat_cols(ValueId a, ValueId b);
  ValueId relu(ValueId x);
  /// x (n x d) plus bias (1 x d) broadcast over rows.
  ValueId add_row_broadcast(ValueId x, ValueId bias);
  /// Row i becomes the mean of h's rows over N(i); isolated nodes get zeros.
  /// The graph must outlive the tape.
  ValueId neighbor_mean(ValueId h, const AgriGraph& g);
  /// Batch statistics normalization; updates `running` as a side effect.
  ValueId batchnorm_train(ValueId x, ValueId gamma, ValueId beta, BnRunningStats& running,
                          double eps = 1e-5, double momentum = 0.1);
  ValueId batchnorm_eval(ValueId x, ValueId gamma, ValueId beta, const BnRunningStats& running,
                         double eps = 1e-5);
  /// Inverted dropout: zero with probability `rate`, survivors scaled by
  /// 1/(1-rate). rate 0 is the identity. Mask order is row-major, so a fixed
  /// rng seed freezes the noise for finite-difference checks.
  ValueId dropout(ValueId x, double rate, Rng& rng);
  /// Mean squared error over the masked rows of two n x 1 columns.
  ValueId mse_masked(ValueId pred, const Matrix& target, const std::vector<int>& mask);
  ValueId sum_all(ValueId x);

  const Matrix& value(ValueId id) const { return nodes_[id].value; }

  /// Reverse accumulation from a scalar (1 x 1) loss node.
  void backward(ValueId loss);
  /// Valid after backward(); zero matrix for parameters off the loss path.
  const Matrix& grad(ValueId id) const;

 private:
  enum class Op {
    constant,
    parameter,
    matmul,
    transpose,
    concat_cols,
    relu,
    add_row_broadcast,
    neighbor_mean,
    batchnorm_train,
    batchnorm_eval,
    dropout,
    mse_masked,
    sum_all,
  };

  struct Node {
    Op op;
    ValueId in0 = -1, in1 = -1, in2 = -1;
    Matrix value;
    Matrix grad;  // empty until touched by backward
    bool requires_grad = false;

    // op-specific payloads
    int split_col = 0;                     // concat_cols
    const AgriGraph* graph = nullptr;      // neighbor_mean
    Matrix aux;                            // bn: xhat; dropout: scaled mask; mse: target
    std::vector<double> stat_mean;         // bn
    std::vector<double> stat_invstd;       // bn
    std::vector<int> mask;                 // mse
  };

  ValueId push(Node node);
  Node& at(ValueId id);
  void ensure_grad(ValueId id);
  void backprop_node(ValueId id);

  std::vector<Node> nodes_;
  std::vector<ValueId> parameters_;
  bool ran_backward_ = false;
};

/// Max relative error between `analytic` and central finite differences of f
/// at theta: max_i |a_i - fd_i| / max(1e-8, |a_i| + |fd_i|).
double finite_diff_check(const std::function<double(const std::vector<Matrix>&)>& f,
                         std::vector<Matrix> theta, const std::vector<Matrix>& analytic,
                         double eps = 1e-5);

}  // namespace agrignn
