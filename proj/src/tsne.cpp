#include "agrignn/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "agrignn/csv.hpp"
#include "agrignn/errors.hpp"
#include "agrignn/kernels.hpp"
#include "agrignn/rng.hpp"

namespace agrignn {
namespace {

constexpr double kPMin = 1e-12;
constexpr int kBetaSearchIters = 50;
constexpr double kEntropyTol = 1e-5;

/// Conditional distribution p_{j|i} with entropy matched to log(perplexity)
/// by binary search on the precision beta = 1/(2 sigma^2). Distances are
/// shifted by the row minimum so the largest exponent is exp(0); rows that
/// cannot reach the target entropy (all-equal distances, tiny n) keep the
/// best beta found.
void conditional_row(const Matrix& d2, int i, double target_entropy, double* p) {
  const int n = d2.rows();
  double dmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j)
    if (j != i) dmin = std::min(dmin, d2(i, j));

  double beta = 1.0;
  double beta_lo = -std::numeric_limits<double>::infinity();
  double beta_hi = std::numeric_limits<double>::infinity();

  double sum = 0.0;
  for (int it = 0; it < kBetaSearchIters; ++it) {
    sum = 0.0;
    double weighted = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) {
        p[j] = 0.0;
        continue;
      }
      const double shifted = d2(i, j) - dmin;
      const double w = std::exp(-beta * shifted);
      p[j] = w;
      sum += w;
      weighted += w * shifted;
    }
    if (!std::isfinite(sum) || sum <= 0.0)
      throw numeric_error("tsne: bandwidth search failed for point " + std::to_string(i));
    const double entropy = beta * weighted / sum + std::log(sum);
    const double diff = entropy - target_entropy;
    if (std::fabs(diff) < kEntropyTol) break;
    if (diff > 0.0) {  // too flat: raise beta
      beta_lo = beta;
      beta = std::isfinite(beta_hi) ? (beta + beta_hi) / 2.0 : beta * 2.0;
    } else {
      beta_hi = beta;
      beta = std::isfinite(beta_lo) ? (beta + beta_lo) / 2.0 : beta / 2.0;
    }
  }
  for (int j = 0; j < n; ++j) p[j] /= sum;
}

}  // namespace

TsneResult tsne_embed(const Matrix& embeddings, const TsneConfig& config) {
  const int n = embeddings.rows();
  const int d = embeddings.cols();
  if (n < 5) throw input_error("tsne_embed requires at least 5 points");
  if (config.perplexity < 1.0) throw config_error("tsne perplexity must be >= 1");
  if (config.iterations < 1) throw config_error("tsne iterations must be >= 1");
  if (!embeddings.all_finite()) throw input_error("tsne_embed: non-finite embedding values");

  const auto& kb = kernels::backend();

  // High-dimensional squared distances.
  Matrix d2(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = kb.sqdist(embeddings.row(i), embeddings.row(j), d);
      d2(i, j) = v;
      d2(j, i) = v;
    }

  // Symmetrized affinities P.
  const double target_entropy = std::log(config.perplexity);
  Matrix cond(n, n);
  for (int i = 0; i < n; ++i) conditional_row(d2, i, target_entropy, cond.row(i));
  Matrix p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = std::max((cond(i, j) + cond(j, i)) / (2.0 * n), kPMin);
      p(i, j) = v;
      p(j, i) = v;
    }

  // Seeded small Gaussian start.
  Rng rng(config.seed);
  Matrix y(n, 2);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.normal(0.0, 1e-4);

  Matrix increment(n, 2);
  Matrix gains(n, 2);
  for (std::size_t i = 0; i < gains.size(); ++i) gains.data()[i] = 1.0;

  Matrix qnum(n, n);
  Matrix grad(n, 2);
  TsneResult result;
  result.kl_history.reserve(config.iterations);

  for (int iter = 0; iter < config.iterations; ++iter) {
    const double ex = iter < config.exaggeration_iters ? config.exaggeration : 1.0;
    const double momentum =
        iter < config.momentum_switch_iter ? config.momentum_initial : config.momentum_final;

    // The objective changes when exaggeration lifts; restart the momentum
    // and gain state so the stale descent direction cannot overshoot.
    if (iter == config.exaggeration_iters) {
      for (std::size_t i = 0; i < increment.size(); ++i) increment.data()[i] = 0.0;
      for (std::size_t i = 0; i < gains.size(); ++i) gains.data()[i] = 1.0;
    }

    // Student-t numerators and their normalizer.
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
      qnum(i, i) = 0.0;
      for (int j = i + 1; j < n; ++j) {
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        qnum(i, j) = v;
        qnum(j, i) = v;
        z += 2.0 * v;
      }
    }

    // KL(P||Q) of the current layout against the unexaggerated P.
    double kl = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double pij = p(i, j);
        const double qij = std::max(qnum(i, j) / z, kPMin);
        kl += 2.0 * pij * (std::log(pij) - std::log(qij));
      }
    result.kl_history.push_back(kl);

    // Gradient 4 * sum_j (ex*p - q) * qnum * (y_i - y_j).
    for (std::size_t i = 0; i < grad.size(); ++i) grad.data()[i] = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double qij = std::max(qnum(i, j) / z, kPMin);
        const double mult = 4.0 * (ex * p(i, j) - qij) * qnum(i, j);
        const double gx = mult * (y(i, 0) - y(j, 0));
        const double gy = mult * (y(i, 1) - y(j, 1));
        grad(i, 0) += gx;
        grad(i, 1) += gy;
        grad(j, 0) -= gx;
        grad(j, 1) -= gy;
      }
    }

    // Adaptive gains + momentum update, then recenter.
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double g = grad.data()[i];
      const double inc = increment.data()[i];
      double& gain = gains.data()[i];
      gain = (g > 0.0) != (inc > 0.0) ? gain + 0.2 : gain * 0.8;
      gain = std::max(gain, 0.01);
      increment.data()[i] = momentum * inc - config.learning_rate * gain * g;
      y.data()[i] += increment.data()[i];
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (int i = 0; i < n; ++i) {
      mean_x += y(i, 0);
      mean_y += y(i, 1);
    }
    mean_x /= n;
    mean_y /= n;
    for (int i = 0; i < n; ++i) {
      y(i, 0) -= mean_x;
      y(i, 1) -= mean_y;
    }
  }

  result.y = std::move(y);
  return result;
}

void write_tsne_csv(const std::string& path, const std::vector<std::string>& plot_ids,
                    const Matrix& y) {
  if (static_cast<int>(plot_ids.size()) != y.rows())
    throw input_error("write_tsne_csv: id/row count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write t-SNE file: " + path);
  out << "plot_id,x,y\n";
  for (int i = 0; i < y.rows(); ++i)
    out << plot_ids[i] << ',' << format_double(y(i, 0)) << ',' << format_double(y(i, 1)) << '\n';
}

}  // namespace agrignn
