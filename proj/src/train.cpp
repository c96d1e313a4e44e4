#include "agrignn/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "agrignn/csv.hpp"
#include "agrignn/errors.hpp"
#include "agrignn/kernels.hpp"
#include "json.hpp"

namespace agrignn {

void adam_step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
               AdamState& state, double learning_rate) {
  if (params.size() != grads.size()) throw input_error("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const Matrix* p : params) {
      state.m.emplace_back(p->rows(), p->cols());
      state.v.emplace_back(p->rows(), p->cols());
    }
  }
  if (state.m.size() != params.size()) throw input_error("adam_step: state size mismatch");

  ++state.t;
  const double bc1 = 1.0 / (1.0 - std::pow(state.beta1, static_cast<double>(state.t)));
  const double bc2 = 1.0 / (1.0 - std::pow(state.beta2, static_cast<double>(state.t)));
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params[p]->same_shape(*grads[p]) || !params[p]->same_shape(state.m[p]))
      throw input_error("adam_step: shape mismatch at parameter " + std::to_string(p));
    kernels::backend().adam_update(params[p]->data(), state.m[p].data(), state.v[p].data(),
                                   grads[p]->data(), static_cast<int>(params[p]->size()),
                                   learning_rate, state.beta1, state.beta2, state.eps, bc1, bc2);
  }
}

Metrics evaluate(const Matrix& pred, const std::vector<double>& target,
                 const std::vector<int>& mask) {
  if (mask.empty()) throw input_error("evaluate: empty mask");
  if (pred.cols() != 1 || pred.rows() != static_cast<int>(target.size()))
    throw input_error("evaluate: prediction must be n x 1 matching the target length");

  double se = 0.0, ae = 0.0, ysum = 0.0;
  for (int i : mask) {
    if (i < 0 || i >= pred.rows()) throw input_error("evaluate: mask index out of range");
    const double e = pred(i, 0) - target[i];
    se += e * e;
    ae += std::fabs(e);
    ysum += target[i];
  }
  const double n = static_cast<double>(mask.size());
  const double ymean = ysum / n;
  double ss_tot = 0.0;
  for (int i : mask) ss_tot += (target[i] - ymean) * (target[i] - ymean);

  Metrics m;
  m.rmse = std::sqrt(se / n);
  m.mae = ae / n;
  if (ss_tot <= 0.0) throw numeric_error("evaluate: zero target variance, r2 undefined");
  m.r2 = 1.0 - se / ss_tot;
  return m;
}

namespace {

std::vector<Matrix*> model_parameters(AgriGnnModel& model) {
  std::vector<Matrix*> out;
  for (auto& w : model.weights) out.push_back(&w);
  for (auto& b : model.biases) out.push_back(&b);
  for (auto& g : model.bn_gamma) out.push_back(&g);
  for (auto& b : model.bn_beta) out.push_back(&b);
  return out;
}

std::vector<ValueId> taped_parameters(const TapedModel& tm) {
  std::vector<ValueId> out;
  for (ValueId id : tm.w) out.push_back(id);
  for (ValueId id : tm.b) out.push_back(id);
  for (ValueId id : tm.gamma) out.push_back(id);
  for (ValueId id : tm.beta) out.push_back(id);
  return out;
}

}  // namespace

TrainResult train(const Dataset& ds, const AgriGraph& g, const SplitAssignment& split,
                  const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw config_error("train: epochs must be >= 1");
  if (cfg.learning_rate < 0.0) throw config_error("train: learning_rate must be >= 0");
  if (ds.feature_matrix.rows() != ds.size() || ds.feature_matrix.rows() == 0)
    throw input_error("train: dataset features not finalized");
  if (g.node_count() != ds.size())
    throw input_error("train: graph node count does not match dataset rows");
  if (split.train_indices.empty()) throw input_error("train: empty training split");

  // Standardize the target over the training nodes so the optimizer works at
  // unit scale; predictions are mapped back in predict().
  double mu = 0.0;
  for (int i : split.train_indices) mu += ds.target[i];
  mu /= static_cast<double>(split.train_indices.size());
  double var = 0.0;
  for (int i : split.train_indices) var += (ds.target[i] - mu) * (ds.target[i] - mu);
  var /= static_cast<double>(split.train_indices.size());
  const double sigma = var > 0.0 ? std::sqrt(var) : 1.0;

  Matrix target_std(ds.size(), 1);
  for (int i = 0; i < ds.size(); ++i)
    target_std(i, 0) = std::isfinite(ds.target[i]) ? (ds.target[i] - mu) / sigma : 0.0;

  ModelConfig mc;
  mc.input_dim = ds.feature_matrix.cols();
  mc.hidden_channels = cfg.hidden_channels;
  mc.dropout_rate = cfg.dropout_rate;
  mc.final_activation = cfg.final_activation;

  AgriGnnModel model = init_params(mc, cfg.seed);
  model.target_mean = mu;
  model.target_std = sigma;

  AdamState adam;
  TrainResult result;
  Rng dropout_master(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  const double sigma2 = sigma * sigma;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    const TapedModel tm = attach_parameters(tape, model);
    const ValueId x = tape.constant(ds.feature_matrix);
    Rng dropout_rng = dropout_master.fork(static_cast<std::uint64_t>(epoch));
    const ValueId out = forward(tape, tm, x, g, model, true, &dropout_rng);
    const ValueId loss = tape.mse_masked(out, target_std, split.train_indices);

    const double loss_value = tape.value(loss)(0, 0);
    if (!std::isfinite(loss_value))
      throw numeric_error("train: non-finite loss at epoch " + std::to_string(epoch));
    result.train_mse.push_back(loss_value * sigma2);

    tape.backward(loss);

    std::vector<Matrix*> params = model_parameters(model);
    const std::vector<ValueId> ids = taped_parameters(tm);
    std::vector<const Matrix*> grads;
    grads.reserve(ids.size());
    for (ValueId id : ids) grads.push_back(&tape.grad(id));
    adam_step(params, grads, adam, cfg.learning_rate);

    // Test loss from a deterministic eval-mode forward on the updated model.
    if (!split.test_indices.empty()) {
      const Matrix pred = predict(model, ds.feature_matrix, g);
      double acc = 0.0;
      for (int i : split.test_indices) {
        const double e = pred(i, 0) - ds.target[i];
        acc += e * e;
      }
      result.test_mse.push_back(acc / static_cast<double>(split.test_indices.size()));
    } else {
      result.test_mse.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }

  result.model = std::move(model);
  return result;
}

GridSearchResult hyper_grid_search(const Dataset& ds, const AgriGraph& g,
                                   const SplitAssignment& split, const TrainConfig& base,
                                   const std::vector<double>& learning_rates,
                                   const std::vector<int>& hidden_sizes,
                                   const std::vector<double>& dropout_rates) {
  if (learning_rates.empty() || hidden_sizes.empty() || dropout_rates.empty())
    throw config_error("hyper_grid_search: empty grid");

  GridSearchResult result;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (double lr : learning_rates) {
    for (int hidden : hidden_sizes) {
      for (double dropout : dropout_rates) {
        TrainConfig cfg = base;
        cfg.learning_rate = lr;
        cfg.hidden_channels = hidden;
        cfg.dropout_rate = dropout;
        const TrainResult tr = train(ds, g, split, cfg);
        const Matrix pred = predict(tr.model, ds.feature_matrix, g);
        GridCell cell;
        cell.config = cfg;
        cell.train = evaluate(pred, ds.target, split.train_indices);
        cell.test = evaluate(pred, ds.target, split.test_indices);
        if (cell.test.rmse < best_rmse) {
          best_rmse = cell.test.rmse;
          result.best = cfg;
          result.best_index = static_cast<int>(result.cells.size());
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

void write_metrics_json(const std::string& path, const Metrics& test, const Metrics& full_graph,
                        const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["rmse"] = test.rmse;
  j["mae"] = test.mae;
  j["r2"] = test.r2;
  j["full_graph"]["rmse"] = full_graph.rmse;
  j["full_graph"]["mae"] = full_graph.mae;
  j["full_graph"]["r2"] = full_graph.r2;
  j["split_seed"] = cfg.seed;
  j["config"]["learning_rate"] = cfg.learning_rate;
  j["config"]["epochs"] = cfg.epochs;
  j["config"]["hidden_channels"] = cfg.hidden_channels;
  j["config"]["dropout_rate"] = cfg.dropout_rate;
  j["config"]["split_fraction"] = cfg.split_fraction;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write metrics file: " + path);
  out << j.dump(2) << '\n';
}

void write_loss_history_csv(const std::string& path, const TrainResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write loss history: " + path);
  out << "epoch,train_mse,test_mse\n";
  for (std::size_t e = 0; e < result.train_mse.size(); ++e) {
    out << e << ',' << format_double(result.train_mse[e]) << ',';
    if (std::isfinite(result.test_mse[e])) out << format_double(result.test_mse[e]);
    out << '\n';
  }
}

void write_grid_results_csv(const std::string& path, const GridSearchResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write grid results: " + path);
  out << "learning_rate,hidden_channels,dropout_rate,train_rmse,test_rmse,test_mae,test_r2\n";
  for (const GridCell& cell : result.cells) {
    out << format_double(cell.config.learning_rate) << ',' << cell.config.hidden_channels << ','
        << format_double(cell.config.dropout_rate) << ',' << format_double(cell.train.rmse) << ','
        << format_double(cell.test.rmse) << ',' << format_double(cell.test.mae) << ','
        << format_double(cell.test.r2) << '\n';
  }
}

void write_embeddings_csv(const std::string& path, const Dataset& ds, const Matrix& embeddings) {
  if (embeddings.rows() != ds.size())
    throw input_error("write_embeddings_csv: row count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write embeddings: " + path);
  out << "plot_id";
  for (int c = 0; c < embeddings.cols(); ++c) out << ",e" << c;
  out << '\n';
  for (int i = 0; i < embeddings.rows(); ++i) {
    out << ds.records[i].plot_id;
    for (int c = 0; c < embeddings.cols(); ++c) out << ',' << format_double(embeddings(i, c));
    out << '\n';
  }
}

void write_actual_vs_predicted_csv(const std::string& path, const Dataset& ds, const Matrix& pred,
                                   const SplitAssignment& split) {
  std::vector<std::string> role(ds.size(), "unlabeled");
  for (int i : split.train_indices) role[i] = "train";
  for (int i : split.test_indices) role[i] = "test";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write actual-vs-predicted: " + path);
  out << "plot_id,actual,predicted,role\n";
  for (int i = 0; i < ds.size(); ++i) {
    if (role[i] == "unlabeled") continue;
    out << ds.records[i].plot_id << ',' << format_double(ds.target[i]) << ','
        << format_double(pred(i, 0)) << ',' << role[i] << '\n';
  }
}

}  // namespace agrignn
