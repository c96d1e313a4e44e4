#pragma once
// Declarative run configuration: flat key=value text with namespaced keys
// ("graph.percentile=3"). Unknown keys are rejected; every run echoes the
// fully-resolved configuration next to its outputs.

#include <cstdint>
#include <string>
#include <vector>

#include "agrignn/graph.hpp"
#include "agrignn/model.hpp"
#include "agrignn/synthetic.hpp"
#include "agrignn/train.hpp"
#include "agrignn/tsne.hpp"

namespace agrignn {

struct RunConfig {
  // global
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string kernels = "auto";  // auto | scalar | avx2 | neon

  // data
  std::string input_csv;  // empty: simulate from the generator settings

  // generator (sim.*)
  std::vector<int> sim_plots = {770, 912, 800, 679};
  int sim_populations_per_field = 30;
  double sim_noise = 1.0;
  int sim_band_step = 2;
  std::string sim_timepoint = "T3";

  // graph.*
  std::string graph_edge_mode = "global";  // global | per-node
  double graph_percentile = 3.0;
  bool graph_threshold_closed = false;
  bool graph_haversine = false;

  // model.*
  int model_hidden = 32;
  double model_dropout = 0.3;
  std::string model_final_activation = "identity";

  // train.*
  double train_lr = 0.02;
  int train_epochs = 500;
  double train_split = 0.8;

  // knn.*
  int knn_kmin = 1;
  int knn_kmax = 20;

  // tsne.*
  double tsne_perplexity = 30.0;
  int tsne_iterations = 1000;
  int tsne_max_points = 600;

  // grid.*
  std::vector<double> grid_lrs = {0.001, 0.005, 0.01, 0.02};
  std::vector<int> grid_hiddens = {32, 64, 128};
  std::vector<double> grid_dropouts = {0.3, 0.5, 0.7};

  /// Applies one "key=value" assignment; unknown key or bad value is a
  /// config_error.
  void set(const std::string& key, const std::string& value);

  GeneratorConfig generator_config() const;
  SpatialEdgeOptions spatial_options() const;
  TrainConfig train_config() const;
  TsneConfig tsne_config() const;

  /// Canonical key=value dump (sorted keys) used for the resolved-config echo.
  std::string resolved_text() const;
};

/// Parses a config file ('#' comments, blank lines allowed) over defaults.
RunConfig load_run_config(const std::string& path);

/// Parses the file when non-empty, else returns defaults.
RunConfig load_run_config_or_default(const std::string& path);

}  // namespace agrignn
