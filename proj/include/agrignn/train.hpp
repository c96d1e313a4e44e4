#pragma once
// Full-batch transductive training: forward in training mode, masked MSE on
// the train nodes, reverse pass, Adam step. Plus regression metrics, the
// hyperparameter grid search, and the result exports.

#include <cstdint>
#include <string>
#include <vector>

#include "agrignn/dataset.hpp"
#include "agrignn/graph.hpp"
#include "agrignn/model.hpp"

namespace agrignn {

struct TrainConfig {
  double learning_rate = 0.02;
  int epochs = 500;
  int hidden_channels = 32;
  double dropout_rate = 0.3;
  double split_fraction = 0.8;
  std::uint64_t seed = 0;
  ModelConfig::Activation final_activation = ModelConfig::Activation::identity;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam update over a parameter list; moment buffers are allocated on
/// first use and must keep matching shapes afterwards.
void adam_step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
               AdamState& state, double learning_rate);

struct Metrics {
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
};

/// RMSE / MAE / R^2 over the masked entries. Zero target variance makes R^2
/// undefined (numeric_error).
Metrics evaluate(const Matrix& pred, const std::vector<double>& target,
                 const std::vector<int>& mask);

struct TrainResult {
  AgriGnnModel model;
  std::vector<double> train_mse;  // per epoch, original yield units
  std::vector<double> test_mse;   // per epoch, eval-mode forward
};

/// Dataset must be finalized (feature matrix + targets). Deterministic per
/// config.seed. Non-finite training loss aborts with the epoch number.
TrainResult train(const Dataset& ds, const AgriGraph& g, const SplitAssignment& split,
                  const TrainConfig& cfg);

struct GridCell {
  TrainConfig config;
  Metrics train;
  Metrics test;
};

struct GridSearchResult {
  TrainConfig best;
  std::vector<GridCell> cells;  // deterministic cell order: lr, hidden, dropout
  int best_index = -1;
};

/// Trains one model per (learning rate, hidden, dropout) cell with a shared
/// split and seed; picks the lowest test RMSE.
GridSearchResult hyper_grid_search(const Dataset& ds, const AgriGraph& g,
                                   const SplitAssignment& split, const TrainConfig& base,
                                   const std::vector<double>& learning_rates,
                                   const std::vector<int>& hidden_sizes,
                                   const std::vector<double>& dropout_rates);

void write_metrics_json(const std::string& path, const Metrics& test, const Metrics& full_graph,
                        const TrainConfig& cfg);
void write_loss_history_csv(const std::string& path, const TrainResult& result);
void write_grid_results_csv(const std::string& path, const GridSearchResult& result);
void write_embeddings_csv(const std::string& path, const Dataset& ds, const Matrix& embeddings);
void write_actual_vs_predicted_csv(const std::string& path, const Dataset& ds, const Matrix& pred,
                                   const SplitAssignment& split);

}  // namespace agrignn
