#include "agrignn/knn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "agrignn/errors.hpp"
#include "agrignn/kernels.hpp"
#include "agrignn/rng.hpp"
#include "json.hpp"

namespace agrignn {
namespace {

/// Prefix-mean predictions for every k in [1, k_max] at one query point;
/// shared by knn_predict and the CV scan so both rank identically.
void knn_prefix_means(const std::vector<std::array<double, 2>>& train_coords,
                      const std::vector<double>& train_yields, const std::array<double, 2>& q,
                      int k_max, std::vector<double>& out) {
  const int n = static_cast<int>(train_coords.size());
  std::vector<std::pair<double, int>> dist(n);
  for (int i = 0; i < n; ++i)
    dist[i] = {kernels::backend().sqdist(train_coords[i].data(), q.data(), 2), i};
  std::partial_sort(dist.begin(), dist.begin() + k_max, dist.end());  // (distance, index) pairs

  out.resize(k_max);
  double acc = 0.0;
  for (int k = 0; k < k_max; ++k) {
    acc += train_yields[dist[k].second];
    out[k] = acc / static_cast<double>(k + 1);
  }
}

}  // namespace

std::vector<double> knn_predict(const std::vector<std::array<double, 2>>& train_coords,
                                const std::vector<double>& train_yields,
                                const std::vector<std::array<double, 2>>& query_coords, int k) {
  const int n = static_cast<int>(train_coords.size());
  if (train_yields.size() != train_coords.size())
    throw input_error("knn_predict: coordinate/yield length mismatch");
  if (k < 1 || k > n)
    throw input_error("knn_predict: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) +
                      "]");

  std::vector<double> pred(query_coords.size());
  std::vector<double> means;
  for (std::size_t q = 0; q < query_coords.size(); ++q) {
    knn_prefix_means(train_coords, train_yields, query_coords[q], k, means);
    pred[q] = means[k - 1];
  }
  return pred;
}

KnnSearchResult knn_grid_search(const Dataset& ds, const SplitAssignment& split, int k_min,
                                int k_max) {
  const auto coords = ds.coordinates();
  const int n_train = static_cast<int>(split.train_indices.size());
  if (k_min < 1 || k_max < k_min) throw config_error("knn_grid_search: bad k range");

  // 5-fold assignment over the training split, seeded by the split seed.
  std::vector<int> order = split.train_indices;
  Rng rng(split.seed ^ 0xC2B2AE3D27D4EB4FULL);
  rng.shuffle(order.data(), n_train);
  std::vector<int> fold_of(ds.size(), -1);
  const int folds = std::min(5, n_train);
  if (folds < 2) throw input_error("knn_grid_search: training split too small for CV");
  for (int i = 0; i < n_train; ++i) fold_of[order[i]] = i % folds;

  const int num_k = k_max - k_min + 1;
  std::vector<double> sq_err(num_k, 0.0);
  std::vector<double> means;

  for (int fold = 0; fold < folds; ++fold) {
    std::vector<std::array<double, 2>> fit_coords;
    std::vector<double> fit_yields;
    std::vector<int> held;
    for (int i : split.train_indices) {
      if (fold_of[i] == fold) {
        held.push_back(i);
      } else {
        fit_coords.push_back(coords[i]);
        fit_yields.push_back(ds.target[i]);
      }
    }
    const int cap = std::min(k_max, static_cast<int>(fit_coords.size()));
    if (cap < k_min)
      throw input_error("knn_grid_search: fold too small for requested k range");
    for (int i : held) {
      knn_prefix_means(fit_coords, fit_yields, coords[i], cap, means);
      for (int k = k_min; k <= k_max; ++k) {
        const double pred = means[std::min(k, cap) - 1];
        const double e = pred - ds.target[i];
        sq_err[k - k_min] += e * e;
      }
    }
  }

  KnnSearchResult result;
  result.cv_rmse.resize(num_k);
  int best = 0;
  for (int j = 0; j < num_k; ++j) {
    result.cv_rmse[j] = std::sqrt(sq_err[j] / static_cast<double>(n_train));
    if (result.cv_rmse[j] < result.cv_rmse[best]) best = j;
  }
  result.best_k = k_min + best;

  // Refit on the whole training split, score on test.
  std::vector<std::array<double, 2>> train_coords;
  std::vector<double> train_yields;
  for (int i : split.train_indices) {
    train_coords.push_back(coords[i]);
    train_yields.push_back(ds.target[i]);
  }
  std::vector<std::array<double, 2>> test_coords;
  for (int i : split.test_indices) test_coords.push_back(coords[i]);
  const std::vector<double> pred = knn_predict(train_coords, train_yields, test_coords,
                                               std::min(result.best_k, n_train));

  Matrix pred_col(ds.size(), 1);
  for (std::size_t q = 0; q < split.test_indices.size(); ++q)
    pred_col(split.test_indices[q], 0) = pred[q];
  result.test = evaluate(pred_col, ds.target, split.test_indices);
  return result;
}

void write_baseline_json(const std::string& path, const KnnSearchResult& result) {
  nlohmann::ordered_json j;
  j["k"] = result.best_k;
  j["rmse"] = result.test.rmse;
  j["mae"] = result.test.mae;
  j["r2"] = result.test.r2;
  j["cv_rmse"] = result.cv_rmse;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write baseline metrics: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace agrignn
