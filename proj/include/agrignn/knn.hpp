#pragma once
// Coordinate-only k-nearest-neighbors yield baseline with k chosen by
// 5-fold cross-validation on the training split.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "agrignn/dataset.hpp"
#include "agrignn/train.hpp"

namespace agrignn {

/// Unweighted mean of the k nearest training yields by Euclidean distance on
/// (latitude, longitude); ties broken by the lower training index.
std::vector<double> knn_predict(const std::vector<std::array<double, 2>>& train_coords,
                                const std::vector<double>& train_yields,
                                const std::vector<std::array<double, 2>>& query_coords, int k);

struct KnnSearchResult {
  int best_k = 0;
  Metrics test;
  std::vector<double> cv_rmse;  // one entry per k in [k_min, k_max]
};

/// Scans k in [k_min, k_max], scoring each by pooled 5-fold CV RMSE over the
/// training split (folds seeded by split.seed), then reports test metrics at
/// the winning k.
KnnSearchResult knn_grid_search(const Dataset& ds, const SplitAssignment& split, int k_min = 1,
                                int k_max = 20);

void write_baseline_json(const std::string& path, const KnnSearchResult& result);

}  // namespace agrignn
