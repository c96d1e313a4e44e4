#include "agrignn/model.hpp"

#include <cmath>
#include <fstream>

#include "agrignn/errors.hpp"
#include "json.hpp"

namespace agrignn {
namespace {

Matrix glorot_uniform(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

nlohmann::ordered_json matrix_to_json(const Matrix& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = m.values();
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  return Matrix(j.at("rows").get<int>(), j.at("cols").get<int>(),
                j.at("data").get<std::vector<double>>());
}

}  // namespace

AgriGnnModel init_params(const ModelConfig& config, std::uint64_t seed) {
  if (config.input_dim < 1) throw config_error("model input_dim must be >= 1");
  if (config.hidden_channels < 1) throw config_error("model hidden_channels must be >= 1");
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0)
    throw config_error("model dropout_rate must be in [0, 1)");

  const int h = config.hidden_channels;
  AgriGnnModel model;
  model.config = config;
  model.seed = seed;

  Rng rng(seed);
  model.weights[0] = glorot_uniform(h, config.input_dim, rng);
  model.weights[1] = glorot_uniform(h, 2 * h, rng);
  model.weights[2] = glorot_uniform(h, 2 * h, rng);
  model.weights[3] = glorot_uniform(1, 2 * h, rng);
  model.biases[0] = Matrix(1, h);
  model.biases[1] = Matrix(1, h);
  model.biases[2] = Matrix(1, h);
  model.biases[3] = Matrix(1, 1);
  for (int l = 0; l < 3; ++l) {
    model.bn_gamma[l] = Matrix(1, h);
    for (int c = 0; c < h; ++c) model.bn_gamma[l](0, c) = 1.0;
    model.bn_beta[l] = Matrix(1, h);
    model.bn_stats[l] = BnRunningStats(h);
  }
  return model;
}

TapedModel attach_parameters(Tape& tape, const AgriGnnModel& model) {
  TapedModel tm;
  for (int l = 0; l < 4; ++l) tm.w[l] = tape.parameter(model.weights[l]);
  for (int l = 0; l < 4; ++l) tm.b[l] = tape.parameter(model.biases[l]);
  for (int l = 0; l < 3; ++l) tm.gamma[l] = tape.parameter(model.bn_gamma[l]);
  for (int l = 0; l < 3; ++l) tm.beta[l] = tape.parameter(model.bn_beta[l]);
  return tm;
}

ValueId input_layer(Tape& tape, const TapedModel& tm, ValueId x) {
  const ValueId z = tape.add_row_broadcast(tape.matmul(x, tape.transpose(tm.w[0])), tm.b[0]);
  return tape.relu(z);
}

namespace {

ValueId bn_dropout(Tape& tape, const TapedModel& tm, ValueId h, int bn_index, AgriGnnModel& model,
                   bool training, Rng* dropout_rng) {
  ValueId out;
  if (training) {
    out = tape.batchnorm_train(h, tm.gamma[bn_index], tm.beta[bn_index], model.bn_stats[bn_index],
                               ModelConfig::bn_eps, ModelConfig::bn_momentum);
    if (model.config.dropout_rate > 0.0) {
      if (dropout_rng == nullptr)
        throw input_error("training-mode forward needs a dropout rng");
      out = tape.dropout(out, model.config.dropout_rate, *dropout_rng);
    }
  } else {
    out = tape.batchnorm_eval(h, tm.gamma[bn_index], tm.beta[bn_index], model.bn_stats[bn_index],
                              ModelConfig::bn_eps);
  }
  return out;
}

}  // namespace

ValueId sage_block(Tape& tape, const TapedModel& tm, ValueId h, const AgriGraph& g, int layer,
                   AgriGnnModel& model, bool training, Rng* dropout_rng) {
  if (layer != 2 && layer != 3) throw input_error("sage_block layer must be 2 or 3");
  const int l = layer - 1;  // weight index
  const ValueId m = tape.neighbor_mean(h, g);
  const ValueId cat = tape.concat_cols(h, m);
  const ValueId z = tape.add_row_broadcast(tape.matmul(cat, tape.transpose(tm.w[l])), tm.b[l]);
  const ValueId act = tape.relu(z);
  return bn_dropout(tape, tm, act, l, model, training, dropout_rng);
}

ValueId output_layer(Tape& tape, const TapedModel& tm, ValueId h3, const AgriGraph& g,
                     const ModelConfig& config) {
  const ValueId m = tape.neighbor_mean(h3, g);
  const ValueId cat = tape.concat_cols(h3, m);
  const ValueId z = tape.add_row_broadcast(tape.matmul(cat, tape.transpose(tm.w[3])), tm.b[3]);
  return config.final_activation == ModelConfig::Activation::relu ? tape.relu(z) : z;
}

ValueId forward(Tape& tape, const TapedModel& tm, ValueId x, const AgriGraph& g,
                AgriGnnModel& model, bool training, Rng* dropout_rng) {
  ValueId h = input_layer(tape, tm, x);
  h = bn_dropout(tape, tm, h, 0, model, training, dropout_rng);
  h = sage_block(tape, tm, h, g, 2, model, training, dropout_rng);
  h = sage_block(tape, tm, h, g, 3, model, training, dropout_rng);
  return output_layer(tape, tm, h, g, model.config);
}

Matrix predict(const AgriGnnModel& model, const Matrix& x, const AgriGraph& g) {
  Tape tape;
  AgriGnnModel scratch = model;  // eval does not mutate state; copy for const-ness
  const TapedModel tm = attach_parameters(tape, scratch);
  const ValueId out = forward(tape, tm, tape.constant(x), g, scratch, false, nullptr);
  Matrix pred = tape.value(out);
  for (std::size_t i = 0; i < pred.size(); ++i)
    pred.data()[i] = pred.data()[i] * model.target_std + model.target_mean;
  return pred;
}

Matrix hidden_embeddings(const AgriGnnModel& model, const Matrix& x, const AgriGraph& g) {
  Tape tape;
  AgriGnnModel scratch = model;
  const TapedModel tm = attach_parameters(tape, scratch);
  ValueId h = input_layer(tape, tm, tape.constant(x));
  h = tape.batchnorm_eval(h, tm.gamma[0], tm.beta[0], scratch.bn_stats[0], ModelConfig::bn_eps);
  h = sage_block(tape, tm, h, g, 2, scratch, false, nullptr);
  h = sage_block(tape, tm, h, g, 3, scratch, false, nullptr);
  return tape.value(h);
}

void save_checkpoint(const std::string& path, const AgriGnnModel& model) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["config"]["input_dim"] = model.config.input_dim;
  j["config"]["hidden_channels"] = model.config.hidden_channels;
  j["config"]["dropout_rate"] = model.config.dropout_rate;
  j["config"]["final_activation"] =
      model.config.final_activation == ModelConfig::Activation::relu ? "relu" : "identity";
  j["seed"] = model.seed;
  j["target_mean"] = model.target_mean;
  j["target_std"] = model.target_std;
  for (int l = 0; l < 4; ++l) {
    j["weights"].push_back(matrix_to_json(model.weights[l]));
    j["biases"].push_back(matrix_to_json(model.biases[l]));
  }
  for (int l = 0; l < 3; ++l) {
    nlohmann::ordered_json bn;
    bn["gamma"] = model.bn_gamma[l].values();
    bn["beta"] = model.bn_beta[l].values();
    bn["running_mean"] = model.bn_stats[l].mean;
    bn["running_var"] = model.bn_stats[l].var;
    j["batch_norm"].push_back(std::move(bn));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write checkpoint: " + path);
  out << j.dump(2) << '\n';
}

AgriGnnModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format_version").get<int>() != 1)
      throw input_error("unsupported checkpoint format_version in " + path);

    ModelConfig config;
    config.input_dim = j.at("config").at("input_dim").get<int>();
    config.hidden_channels = j.at("config").at("hidden_channels").get<int>();
    config.dropout_rate = j.at("config").at("dropout_rate").get<double>();
    config.final_activation = j.at("config").at("final_activation").get<std::string>() == "relu"
                                  ? ModelConfig::Activation::relu
                                  : ModelConfig::Activation::identity;

    AgriGnnModel model;
    model.config = config;
    model.seed = j.at("seed").get<std::uint64_t>();
    model.target_mean = j.at("target_mean").get<double>();
    model.target_std = j.at("target_std").get<double>();
    for (int l = 0; l < 4; ++l) {
      model.weights[l] = matrix_from_json(j.at("weights").at(l));
      model.biases[l] = matrix_from_json(j.at("biases").at(l));
    }
    for (int l = 0; l < 3; ++l) {
      const auto& bn = j.at("batch_norm").at(l);
      const int h = config.hidden_channels;
      model.bn_gamma[l] = Matrix(1, h, bn.at("gamma").get<std::vector<double>>());
      model.bn_beta[l] = Matrix(1, h, bn.at("beta").get<std::vector<double>>());
      model.bn_stats[l].mean = bn.at("running_mean").get<std::vector<double>>();
      model.bn_stats[l].var = bn.at("running_var").get<std::vector<double>>();
      if (static_cast<int>(model.bn_stats[l].mean.size()) != h ||
          static_cast<int>(model.bn_stats[l].var.size()) != h)
        throw input_error("checkpoint batch-norm state has wrong channel count");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("malformed checkpoint " + path + ": " + e.what());
  }
}

}  // namespace agrignn
