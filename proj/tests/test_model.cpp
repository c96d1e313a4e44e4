#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "agrignn/errors.hpp"
#include "agrignn/graph.hpp"
#include "agrignn/model.hpp"
#include "agrignn/rng.hpp"
#include "doctest.h"

using namespace agrignn;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

AgriGraph random_graph(Rng& rng, int n, double p) {
  EdgeSet edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.push_back({i, j});
  return union_graph(edges, {}, n);
}

Matrix eval_forward(const AgriGnnModel& model, const Matrix& x, const AgriGraph& g) {
  Tape tape;
  AgriGnnModel scratch = model;
  const TapedModel tm = attach_parameters(tape, scratch);
  return tape.value(forward(tape, tm, tape.constant(x), g, scratch, false, nullptr));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("init_params shapes, determinism and glorot bounds") {
  ModelConfig cfg;
  cfg.input_dim = 118;
  cfg.hidden_channels = 32;
  const AgriGnnModel a = init_params(cfg, 7);
  const AgriGnnModel b = init_params(cfg, 7);

  CHECK(a.weights[0].rows() == 32);
  CHECK(a.weights[0].cols() == 118);
  CHECK(a.weights[1].rows() == 32);
  CHECK(a.weights[1].cols() == 64);
  CHECK(a.weights[3].rows() == 1);
  CHECK(a.weights[3].cols() == 64);
  for (int l = 0; l < 4; ++l) CHECK(a.weights[l].values() == b.weights[l].values());

  // bound = sqrt(6 / (fan_in + fan_out)) per layer
  for (int l = 0; l < 4; ++l) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(a.weights[l].rows() + a.weights[l].cols()));
    double max_abs = 0.0;
    for (double v : a.weights[l].values()) max_abs = std::max(max_abs, std::fabs(v));
    CHECK(max_abs <= bound);
    CHECK(max_abs > 0.8 * bound);  // uniform fill reaches near the bound
    for (double v : a.biases[l].values()) CHECK(v == 0.0);
  }
  for (int l = 0; l < 3; ++l) {
    for (double v : a.bn_gamma[l].values()) CHECK(v == 1.0);
    for (double v : a.bn_beta[l].values()) CHECK(v == 0.0);
  }

  const AgriGnnModel c = init_params(cfg, 8);
  CHECK(c.weights[0].values() != a.weights[0].values());

  ModelConfig bad = cfg;
  bad.dropout_rate = 1.0;
  CHECK_THROWS_AS((void)init_params(bad, 1), config_error);
}

TEST_CASE("input_layer: linearity and a hand example") {
  ModelConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_channels = 2;
  AgriGnnModel model = init_params(cfg, 1);
  model.weights[0] = Matrix(2, 2, {1.0, -1.0, 0.5, 2.0});
  model.biases[0] = Matrix(1, 2, {0.1, -0.4});

  Tape tape;
  const TapedModel tm = attach_parameters(tape, model);
  const Matrix x(2, 2, {1.0, 2.0, -3.0, 0.5});
  const Matrix& h = tape.value(input_layer(tape, tm, tape.constant(x)));
  // row 0: relu([1*1 - 1*2 + 0.1, 0.5*1 + 2*2 - 0.4]) = relu([-0.9, 4.1])
  CHECK(h(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(h(0, 1) == doctest::Approx(4.1).epsilon(1e-12));
  // row 1: relu([-3 - 0.5 + 0.1, -1.5 + 1 - 0.4]) = relu([-3.4, -0.9])
  CHECK(h(1, 0) == 0.0);
  CHECK(h(1, 1) == 0.0);

  // zero input, zero bias -> zero output
  model.biases[0] = Matrix(1, 2);
  Tape t2;
  const TapedModel tm2 = attach_parameters(t2, model);
  const Matrix& hz = t2.value(input_layer(t2, tm2, t2.constant(Matrix(3, 2))));
  for (std::size_t i = 0; i < hz.size(); ++i) CHECK(hz.data()[i] == 0.0);
}

TEST_CASE("sage_block on an edgeless graph reduces to concat with zeros") {
  ModelConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_channels = 2;
  cfg.dropout_rate = 0.0;
  AgriGnnModel model = init_params(cfg, 3);
  const AgriGraph g = union_graph({}, {}, 3);

  Rng rng(2);
  const Matrix h = random_matrix(rng, 3, 2);
  Tape tape;
  const TapedModel tm = attach_parameters(tape, model);
  const Matrix& out = tape.value(sage_block(tape, tm, tape.constant(h), g, 2, model, false, nullptr));

  // Aggregate is zero, so the block is relu(W * [h, 0] + b) through eval-mode
  // batch norm with fresh stats (mean 0, var 1): a 1/sqrt(1 + eps) scaling.
  const double bn_scale = 1.0 / std::sqrt(1.0 + ModelConfig::bn_eps);
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 2; ++c) {
      double z = model.biases[1](0, c);
      for (int k = 0; k < 2; ++k) z += model.weights[1](c, k) * h(i, k);
      // columns 2..3 of the concat are zero
      const double expect = std::max(0.0, z) * bn_scale;
      CHECK(out(i, c) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS((void)sage_block(tape, tm, tape.constant(h), g, 4, model, false, nullptr),
                  input_error);
}

TEST_CASE("sage_block hand example on a 2-node complete graph") {
  ModelConfig cfg;
  cfg.input_dim = 1;
  cfg.hidden_channels = 1;
  cfg.dropout_rate = 0.0;
  AgriGnnModel model = init_params(cfg, 4);
  model.weights[1] = Matrix(1, 2, {2.0, -1.0});  // acts on [h_i, mean_j h_j]
  model.biases[1] = Matrix(1, 1, {0.25});
  const AgriGraph g = union_graph({{0, 1}}, {}, 2);

  Tape tape;
  const TapedModel tm = attach_parameters(tape, model);
  const Matrix h(2, 1, {1.0, 3.0});
  const Matrix& out = tape.value(sage_block(tape, tm, tape.constant(h), g, 2, model, false, nullptr));
  const double bn_scale = 1.0 / std::sqrt(1.0 + ModelConfig::bn_eps);
  // node 0: relu(2*1 - 1*3 + 0.25) = 0; node 1: relu(2*3 - 1*1 + 0.25) = 5.25
  CHECK(out(0, 0) == 0.0);
  CHECK(out(1, 0) == doctest::Approx(5.25 * bn_scale).epsilon(1e-12));
}

TEST_CASE("output_layer: zero weights give the bias, relu head clamps") {
  ModelConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden_channels = 3;
  AgriGnnModel model = init_params(cfg, 5);
  model.weights[3] = Matrix(1, 6);
  model.biases[3] = Matrix(1, 1, {-2.5});
  Rng rng(6);
  const AgriGraph g = random_graph(rng, 4, 0.5);
  const Matrix h = random_matrix(rng, 4, 3);

  Tape tape;
  const TapedModel tm = attach_parameters(tape, model);
  const Matrix& out = tape.value(output_layer(tape, tm, tape.constant(h), g, model.config));
  for (int i = 0; i < 4; ++i) CHECK(out(i, 0) == -2.5);

  ModelConfig relu_cfg = model.config;
  relu_cfg.final_activation = ModelConfig::Activation::relu;
  Tape t2;
  const TapedModel tm2 = attach_parameters(t2, model);
  const Matrix& clamped = t2.value(output_layer(t2, tm2, t2.constant(h), g, relu_cfg));
  for (int i = 0; i < 4; ++i) CHECK(clamped(i, 0) == 0.0);
}

TEST_CASE("batch norm training statistics and running update") {
  Rng rng(8);
  const Matrix x = random_matrix(rng, 64, 5, 10.0);
  Tape tape;
  BnRunningStats stats(5);
  Matrix gamma(1, 5);
  for (int c = 0; c < 5; ++c) gamma(0, c) = 1.0;
  const Matrix beta(1, 5);
  const ValueId out = tape.batchnorm_train(tape.constant(x), tape.constant(gamma),
                                           tape.constant(beta), stats);

  const Matrix& y = tape.value(out);
  for (int c = 0; c < 5; ++c) {
    double mean = 0.0;
    for (int i = 0; i < 64; ++i) mean += y(i, c);
    mean /= 64.0;
    CHECK(std::fabs(mean) < 1e-10);
    double var = 0.0;
    for (int i = 0; i < 64; ++i) var += (y(i, c) - mean) * (y(i, c) - mean);
    var /= 64.0;
    CHECK(std::fabs(var - 1.0) < 1e-6);
  }

  // Running mean after one batch: 0.9 * 0 + 0.1 * batch_mean.
  for (int c = 0; c < 5; ++c) {
    double batch_mean = 0.0;
    for (int i = 0; i < 64; ++i) batch_mean += x(i, c);
    batch_mean /= 64.0;
    CHECK(stats.mean[c] == doctest::Approx(0.1 * batch_mean).epsilon(1e-12));
  }

  // n < 2 in training mode is rejected.
  Tape t2;
  BnRunningStats s2(5);
  CHECK_THROWS_AS((void)t2.batchnorm_train(t2.constant(Matrix(1, 5)), t2.constant(gamma),
                                           t2.constant(beta), s2),
                  input_error);
}

TEST_CASE("batch norm eval mode is stateless and repeatable") {
  Rng rng(9);
  const Matrix x = random_matrix(rng, 10, 4);
  BnRunningStats stats(4);
  for (int c = 0; c < 4; ++c) {
    stats.mean[c] = 0.2 * c;
    stats.var[c] = 1.0 + 0.1 * c;
  }
  Matrix gamma(1, 4);
  for (int c = 0; c < 4; ++c) gamma(0, c) = 1.5;
  const Matrix beta(1, 4);

  Tape tape;
  const auto snapshot = stats;
  const Matrix y1 =
      tape.value(tape.batchnorm_eval(tape.constant(x), tape.constant(gamma), tape.constant(beta), stats));
  const Matrix y2 =
      tape.value(tape.batchnorm_eval(tape.constant(x), tape.constant(gamma), tape.constant(beta), stats));
  CHECK(y1.values() == y2.values());
  CHECK(stats.mean == snapshot.mean);  // no state change in eval
  CHECK(stats.var == snapshot.var);
}

TEST_CASE("dropout statistics: survivor fraction and expectation") {
  const int n = 1000000;
  Matrix x(1, n);
  for (int i = 0; i < n; ++i) x(0, i) = 1.0;
  Tape tape;
  Rng rng(10);
  const Matrix& y = tape.value(tape.dropout(tape.constant(x), 0.5, rng));
  long long survivors = 0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (y(0, i) != 0.0) ++survivors;
    sum += y(0, i);
  }
  const double fraction = static_cast<double>(survivors) / n;
  CHECK(std::fabs(fraction - 0.5) < 0.01);
  CHECK(std::fabs(sum / n - 1.0) < 0.02);  // inverted scaling keeps the mean

  // rate 0 is the identity node.
  Tape t2;
  Rng r2(1);
  const ValueId in = t2.constant(Matrix(2, 2, {1, 2, 3, 4}));
  CHECK(t2.dropout(in, 0.0, r2) == in);
}

TEST_CASE("mean over seeded dropout forwards approximates the eval activation") {
  // With batch norm frozen (eval statistics), averaging 10^4 seeded
  // training-mode dropout applications recovers the dropout-free activation
  // to within 2%.
  Rng rng(12);
  Matrix h(6, 8);
  for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = rng.uniform(0.5, 2.0);

  Matrix acc(6, 8);
  const int runs = 10000;
  for (int s = 0; s < runs; ++s) {
    Tape tape;
    Rng drop(1000 + s);
    const Matrix& y = tape.value(tape.dropout(tape.constant(h), 0.3, drop));
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += y.data()[i];
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double mean = acc.data()[i] / runs;
    CHECK(std::fabs(mean - h.data()[i]) <= 0.02 * h.data()[i] + 0.02);
  }
}

TEST_CASE("eval forward is deterministic and local") {
  ModelConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden_channels = 6;
  AgriGnnModel model = init_params(cfg, 21);

  // Path graph: 0-1-2-3-4-5-6-7; node 7 is 7 hops from node 0.
  EdgeSet path;
  for (int i = 0; i < 7; ++i) path.push_back({i, i + 1});
  const AgriGraph g = union_graph(path, {}, 8);

  Rng rng(22);
  Matrix x = random_matrix(rng, 8, 4);
  const Matrix out1 = eval_forward(model, x, g);
  const Matrix out2 = eval_forward(model, x, g);
  CHECK(out1.values() == out2.values());  // determinism

  // Perturbing a node >= 4 hops away leaves the prediction unchanged
  // (three aggregation layers); a 1-hop neighbor does change it.
  Matrix far = x;
  far(7, 0) += 10.0;
  far(7, 2) -= 3.0;
  CHECK(eval_forward(model, far, g)(0, 0) == out1(0, 0));

  Matrix near = x;
  near(1, 0) += 1.0;
  CHECK(eval_forward(model, near, g)(0, 0) != out1(0, 0));

  // Edgeless graph: predictions depend only on the node's own features.
  const AgriGraph isolated = union_graph({}, {}, 8);
  const Matrix base = eval_forward(model, x, isolated);
  Matrix other = x;
  for (int c = 0; c < 4; ++c) other(3, c) += 5.0;
  const Matrix poked = eval_forward(model, other, isolated);
  for (int i = 0; i < 8; ++i)
    if (i != 3) CHECK(poked(i, 0) == base(i, 0));
}

TEST_CASE("eval forward commutes with node permutation") {
  Rng rng(31);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 6 + rng.uniform_int(8);
    ModelConfig cfg;
    cfg.input_dim = 5;
    cfg.hidden_channels = 7;
    AgriGnnModel model = init_params(cfg, 100 + trial);
    const AgriGraph g = random_graph(rng, n, 0.35);
    const Matrix x = random_matrix(rng, n, 5);

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm.data(), n);

    Matrix px(n, 5);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 5; ++c) px(perm[i], c) = x(i, c);
    EdgeSet pedges;
    for (const auto& e : g.edges())
      pedges.push_back({std::min(perm[e.src], perm[e.dst]), std::max(perm[e.src], perm[e.dst])});
    std::sort(pedges.begin(), pedges.end());
    const AgriGraph pg = union_graph(pedges, {}, n);

    const Matrix out = eval_forward(model, x, g);
    const Matrix pout = eval_forward(model, px, pg);
    for (int i = 0; i < n; ++i) CHECK(std::fabs(pout(perm[i], 0) - out(i, 0)) < 1e-10);
  }
}

TEST_CASE("training-mode gradients pass finite differences on a small graph") {
  Rng rng(41);
  const int n = 10, p = 6, hidden = 4;
  ModelConfig cfg;
  cfg.input_dim = p;
  cfg.hidden_channels = hidden;
  cfg.dropout_rate = 0.3;
  const AgriGnnModel model = init_params(cfg, 51);
  const AgriGraph g = random_graph(rng, n, 0.4);
  const Matrix x = random_matrix(rng, n, p);
  Matrix target = random_matrix(rng, n, 1);
  const std::vector<int> mask = {0, 2, 3, 5, 7, 8};

  // Parameters in tape order; dropout noise frozen by reseeding per call.
  auto apply = [&](const std::vector<Matrix>& theta, AgriGnnModel& scratch) {
    int k = 0;
    for (int l = 0; l < 4; ++l) scratch.weights[l] = theta[k++];
    for (int l = 0; l < 4; ++l) scratch.biases[l] = theta[k++];
    for (int l = 0; l < 3; ++l) scratch.bn_gamma[l] = theta[k++];
    for (int l = 0; l < 3; ++l) scratch.bn_beta[l] = theta[k++];
  };
  auto loss_fn = [&](const std::vector<Matrix>& theta) {
    AgriGnnModel scratch = model;
    apply(theta, scratch);
    Tape tape;
    const TapedModel tm = attach_parameters(tape, scratch);
    Rng dropout_rng(777);
    const ValueId out = forward(tape, tm, tape.constant(x), g, scratch, true, &dropout_rng);
    return tape.value(tape.mse_masked(out, target, mask))(0, 0);
  };

  std::vector<Matrix> theta;
  for (int l = 0; l < 4; ++l) theta.push_back(model.weights[l]);
  for (int l = 0; l < 4; ++l) theta.push_back(model.biases[l]);
  for (int l = 0; l < 3; ++l) theta.push_back(model.bn_gamma[l]);
  for (int l = 0; l < 3; ++l) theta.push_back(model.bn_beta[l]);

  AgriGnnModel scratch = model;
  Tape tape;
  const TapedModel tm = attach_parameters(tape, scratch);
  Rng dropout_rng(777);
  const ValueId out = forward(tape, tm, tape.constant(x), g, scratch, true, &dropout_rng);
  const ValueId loss = tape.mse_masked(out, target, mask);
  tape.backward(loss);

  std::vector<Matrix> analytic;
  for (ValueId id : tape.parameters()) analytic.push_back(tape.grad(id));
  REQUIRE(analytic.size() == theta.size());

  CHECK(finite_diff_check(loss_fn, theta, analytic, 1e-5) < 1e-4);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  ModelConfig cfg;
  cfg.input_dim = 9;
  cfg.hidden_channels = 5;
  AgriGnnModel model = init_params(cfg, 61);
  model.target_mean = 70.123456789012345;
  model.target_std = 6.543210987654321;
  Rng rng(62);
  for (int l = 0; l < 3; ++l)
    for (int c = 0; c < 5; ++c) {
      model.bn_stats[l].mean[c] = rng.normal();
      model.bn_stats[l].var[c] = std::exp(rng.normal());
    }

  const std::string path =
      (std::filesystem::temp_directory_path() / "agrignn_ckpt.json").string();
  save_checkpoint(path, model);
  const AgriGnnModel back = load_checkpoint(path);

  for (int l = 0; l < 4; ++l) {
    CHECK(back.weights[l].values() == model.weights[l].values());
    CHECK(back.biases[l].values() == model.biases[l].values());
  }
  for (int l = 0; l < 3; ++l) {
    CHECK(back.bn_stats[l].mean == model.bn_stats[l].mean);
    CHECK(back.bn_stats[l].var == model.bn_stats[l].var);
  }
  CHECK(back.target_mean == model.target_mean);
  CHECK(back.target_std == model.target_std);

  // Save -> load -> save produces identical bytes, and eval forward agrees
  // bit for bit.
  const std::string path2 =
      (std::filesystem::temp_directory_path() / "agrignn_ckpt2.json").string();
  save_checkpoint(path2, back);
  CHECK(slurp(path) == slurp(path2));

  const AgriGraph g = union_graph({{0, 1}, {1, 2}}, {}, 3);
  const Matrix x = random_matrix(rng, 3, 9);
  CHECK(predict(model, x, g).values() == predict(back, x, g).values());

  CHECK_THROWS_AS((void)load_checkpoint("/nonexistent/ckpt.json"), input_error);
}
