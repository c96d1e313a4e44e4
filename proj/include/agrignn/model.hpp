#pragma once
// Four-layer graph regression model with mean neighbor aggregation.
//
// Layer 1 lifts raw features to hidden channels; layers 2 and 3 concatenate
// each node's representation with the mean of its neighbors' before the
// linear transform (the skip connection); layer 4 maps the concatenated
// representation to one scalar per node. Batch normalization and dropout
// follow layers 1-3 only. Weight layout:
//   w[0]: hidden x p,  w[1], w[2]: hidden x 2*hidden,  w[3]: 1 x 2*hidden.

#include <array>
#include <cstdint>
#include <string>

#include "agrignn/graph.hpp"
#include "agrignn/matrix.hpp"
#include "agrignn/rng.hpp"
#include "agrignn/tensor.hpp"

namespace agrignn {

struct ModelConfig {
  int input_dim = 0;
  int hidden_channels = 32;
  double dropout_rate = 0.3;
  enum class Activation { identity, relu };
  /// Yield regression needs unbounded outputs, so the head defaults to
  /// identity; relu is available for bounded-output experiments.
  Activation final_activation = Activation::identity;

  static constexpr int num_layers = 4;
  static constexpr double bn_eps = 1e-5;
  static constexpr double bn_momentum = 0.1;
};

struct AgriGnnModel {
  ModelConfig config;
  std::array<Matrix, 4> weights;
  std::array<Matrix, 4> biases;  // 1 x out_dim rows
  std::array<Matrix, 3> bn_gamma;
  std::array<Matrix, 3> bn_beta;
  std::array<BnRunningStats, 3> bn_stats;
  // Target standardization applied during training; predictions are mapped
  // back through it so outputs stay in yield units.
  double target_mean = 0.0;
  double target_std = 1.0;
  std::uint64_t seed = 0;
};

/// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases,
/// unit gamma / zero beta; deterministic per seed.
AgriGnnModel init_params(const ModelConfig& config, std::uint64_t seed);

/// Model parameters registered on a tape, in the fixed order used by the
/// optimizer: w1..w4, b1..b4, gamma1..3, beta1..3.
struct TapedModel {
  std::array<ValueId, 4> w{};
  std::array<ValueId, 4> b{};
  std::array<ValueId, 3> gamma{};
  std::array<ValueId, 3> beta{};
};

TapedModel attach_parameters(Tape& tape, const AgriGnnModel& model);

/// relu(x * w1^T + b1); batch norm and dropout are applied by forward().
ValueId input_layer(Tape& tape, const TapedModel& tm, ValueId x);

/// Mean-aggregate block for layers 2 and 3:
/// relu(W * concat(h, mean_N(h)) + b) then batch norm then dropout.
ValueId sage_block(Tape& tape, const TapedModel& tm, ValueId h, const AgriGraph& g, int layer,
                   AgriGnnModel& model, bool training, Rng* dropout_rng);

/// Final scalar head on concat(h3, mean_N(h3)); no batch norm or dropout.
ValueId output_layer(Tape& tape, const TapedModel& tm, ValueId h3, const AgriGraph& g,
                     const ModelConfig& config);

/// Full forward pass. Training mode updates batch-norm running statistics
/// and draws dropout masks from dropout_rng; eval mode is deterministic.
ValueId forward(Tape& tape, const TapedModel& tm, ValueId x, const AgriGraph& g,
                AgriGnnModel& model, bool training, Rng* dropout_rng);

/// Eval-mode predictions in original yield units (n x 1).
Matrix predict(const AgriGnnModel& model, const Matrix& x, const AgriGraph& g);

/// Eval-mode layer-3 representations (n x hidden), the rows exported as
/// node embeddings.
Matrix hidden_embeddings(const AgriGnnModel& model, const Matrix& x, const AgriGraph& g);

/// Versioned JSON checkpoint; save/load round-trips bit-exactly.
void save_checkpoint(const std::string& path, const AgriGnnModel& model);
AgriGnnModel load_checkpoint(const std::string& path);

}  // namespace agrignn
