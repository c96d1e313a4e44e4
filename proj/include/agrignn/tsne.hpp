#pragma once
// Exact (dense) t-SNE to 2-D: per-point bandwidths matched to a target
// perplexity by binary search, Student-t low-dimensional kernel, gradient
// descent with momentum, adaptive gains, and early exaggeration.

#include <cstdint>
#include <string>
#include <vector>

#include "agrignn/dataset.hpp"
#include "agrignn/matrix.hpp"

namespace agrignn {

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  // descent schedule
  int exaggeration_iters = 250;
  double exaggeration = 12.0;
  double learning_rate = 200.0;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  int momentum_switch_iter = 250;
};

struct TsneResult {
  Matrix y;                        // n x 2 coordinates
  std::vector<double> kl_history;  // KL(P || Q) per iteration, unexaggerated P
};

/// Deterministic per seed. Requires n >= 5; degenerate inputs (duplicate or
/// identical rows) are handled, a failed bandwidth search is a numeric_error.
TsneResult tsne_embed(const Matrix& embeddings, const TsneConfig& config = {});

void write_tsne_csv(const std::string& path, const std::vector<std::string>& plot_ids,
                    const Matrix& y);

}  // namespace agrignn
