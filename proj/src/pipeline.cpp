#include "agrignn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "agrignn/errors.hpp"
#include "agrignn/kernels.hpp"
#include "agrignn/synthetic.hpp"
#include "agrignn/tsne.hpp"
#include "agrignn/vegindex.hpp"

namespace agrignn {
namespace {

namespace fs = std::filesystem;

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void prepare_out_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  // "auto" defers to the dispatcher (and the AGRIGNN_KERNELS env override).
  if (cfg.kernels != "auto") kernels::force_backend(cfg.kernels);
  std::ofstream resolved(out_path(cfg, "resolved_config.txt"), std::ios::binary);
  if (!resolved) throw input_error("cannot write resolved config in " + cfg.out_dir);
  resolved << cfg.resolved_text();
}

/// Runs a pipeline stage, prefixing any failure with the stage name so the
/// CLI reports where the run stopped; partial outputs are retained.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const input_error& e) {
    throw input_error(std::string("stage ") + name + ": " + e.what());
  } catch (const numeric_error& e) {
    throw numeric_error(std::string("stage ") + name + ": " + e.what());
  } catch (const config_error& e) {
    throw config_error(std::string("stage ") + name + ": " + e.what());
  }
}

/// Seeded subsample for the t-SNE export; full set when it already fits.
std::vector<int> tsne_subsample(int n, int max_points, std::uint64_t seed) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  if (n <= max_points) return idx;
  Rng rng(seed ^ 0x5B5AD4ECEDA1CE2AULL);
  rng.shuffle(idx.data(), n);
  idx.resize(max_points);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void export_tsne(const RunConfig& cfg, const Dataset& ds, const Matrix& embeddings) {
  const std::vector<int> subset =
      tsne_subsample(embeddings.rows(), cfg.tsne_max_points, cfg.seed);
  Matrix sub(static_cast<int>(subset.size()), embeddings.cols());
  std::vector<std::string> ids;
  ids.reserve(subset.size());
  for (std::size_t r = 0; r < subset.size(); ++r) {
    for (int c = 0; c < embeddings.cols(); ++c) sub(static_cast<int>(r), c) = embeddings(subset[r], c);
    ids.push_back(ds.records[subset[r]].plot_id);
  }
  const TsneResult tsne = tsne_embed(sub, cfg.tsne_config());
  write_tsne_csv(out_path(cfg, "tsne.csv"), ids, tsne.y);
}

}  // namespace

Dataset load_or_generate(const RunConfig& cfg, bool write_generated) {
  if (!cfg.input_csv.empty()) return load_plots_csv(cfg.input_csv);
  Dataset ds = generate_synthetic_trial(cfg.generator_config(), cfg.seed);
  if (write_generated) save_plots_csv(out_path(cfg, "plots.csv"), ds);
  return ds;
}

Dataset clean_dataset(Dataset ds, PreprocessReport& report) {
  report.rows_in = ds.size();
  ds = filter_bands(std::move(ds), &report);
  ds = drop_invalid(std::move(ds), &report);
  ds = fill_targets(std::move(ds));
  return ds;
}

Dataset featurize_dataset(Dataset ds, PreprocessReport& report) {
  compute_all_indices(ds);
  ds = impute_missing(std::move(ds), &report);
  ds = one_hot(std::move(ds), "population");
  ds = one_hot(std::move(ds), "timepoint");
  ds.finalize_features();
  return ds;
}

AgriGraph build_graph(const Dataset& ds, const RunConfig& cfg) {
  const Matrix distances = pairwise_distances(ds.coordinates(), cfg.graph_haversine);
  const EdgeSet spatial = build_spatial_edges(distances, cfg.spatial_options());
  const EdgeSet genotypic = build_genotype_edges(ds.populations());
  return union_graph(spatial, genotypic, ds.size());
}

void cmd_simulate(const RunConfig& cfg) {
  prepare_out_dir(cfg);
  Dataset ds = generate_synthetic_trial(cfg.generator_config(), cfg.seed);
  save_plots_csv(out_path(cfg, "plots.csv"), ds);
}

void cmd_ingest(const RunConfig& cfg) {
  prepare_out_dir(cfg);
  PreprocessReport report;
  Dataset ds = clean_dataset(load_or_generate(cfg, true), report);
  // Cleaned output carries moisture-normalized yields.
  for (int i = 0; i < ds.size(); ++i) {
    if (std::isfinite(ds.target[i])) {
      ds.records[i].yield_raw = ds.target[i];
      ds.records[i].moisture_pct = 13.0;
    }
  }
  save_plots_csv(out_path(cfg, "cleaned.csv"), ds);
  write_report_json(out_path(cfg, "preprocess_report.json"), report);
}

void cmd_indices(const RunConfig& cfg) {
  prepare_out_dir(cfg);
  PreprocessReport report;
  Dataset ds = clean_dataset(load_or_generate(cfg, true), report);
  compute_all_indices(ds);
  write_indices_csv(out_path(cfg, "indices.csv"), ds);
  write_correlation_csv(out_path(cfg, "index_correlation.csv"), index_correlation_matrix(ds));
}

void cmd_graph(const RunConfig& cfg) {
  prepare_out_dir(cfg);
  PreprocessReport report;
  const Dataset ds = clean_dataset(load_or_generate(cfg, true), report);
  write_edges_csv(out_path(cfg, "edges.csv"), build_graph(ds, cfg));
}

void cmd_train(const RunConfig& cfg) {
  prepare_out_dir(cfg);
  PreprocessReport report;
  Dataset ds = featurize_dataset(clean_dataset(load_or_generate(cfg, true), report), report);
  const AgriGraph g = build_graph(ds, cfg);
  const SplitAssignment split = split_train_test(ds, cfg.train_split, cfg.seed);
  const TrainResult result = train(ds, g, split, cfg.train_config());
  save_checkpoint(out_path(cfg, "model.json"), result.model);
  write_loss_history_csv(out_path(cfg, "loss_history.csv"), result);
  save_split_json(out_path(cfg, "split.json"), split);
}

void cmd_evaluate(const RunConfig& cfg) {
  prepare_out_dir(cfg);
  PreprocessReport report;
  Dataset ds = featurize_dataset(clean_dataset(load_or_generate(cfg, true), report), report);
  const AgriGraph g = build_graph(ds, cfg);
  const AgriGnnModel model = load_checkpoint(out_path(cfg, "model.json"));
  const SplitAssignment split = load_split_json(out_path(cfg, "split.json"));
  const Matrix pred = predict(model, ds.feature_matrix, g);
  const Metrics test = evaluate(pred, ds.target, split.test_indices);
  const Metrics full = evaluate(pred, ds.target, ds.labeled_indices());
  write_metrics_json(out_path(cfg, "metrics.json"), test, full, cfg.train_config());
  write_actual_vs_predicted_csv(out_path(cfg, "actual_vs_predicted.csv"), ds, pred, split);
}

void cmd_baseline(const RunConfig& cfg) {
  prepare_out_dir(cfg);
  PreprocessReport report;
  Dataset ds = clean_dataset(load_or_generate(cfg, true), report);
  const SplitAssignment split = split_train_test(ds, cfg.train_split, cfg.seed);
  const KnnSearchResult result = knn_grid_search(ds, split, cfg.knn_kmin, cfg.knn_kmax);
  write_baseline_json(out_path(cfg, "baseline_metrics.json"), result);
}

void cmd_embed(const RunConfig& cfg) {
  prepare_out_dir(cfg);
  PreprocessReport report;
  Dataset ds = featurize_dataset(clean_dataset(load_or_generate(cfg, true), report), report);
  const AgriGraph g = build_graph(ds, cfg);
  const AgriGnnModel model = load_checkpoint(out_path(cfg, "model.json"));
  const Matrix embeddings = hidden_embeddings(model, ds.feature_matrix, g);
  write_embeddings_csv(out_path(cfg, "embeddings.csv"), ds, embeddings);
  export_tsne(cfg, ds, embeddings);
}

PipelineSummary cmd_pipeline(const RunConfig& cfg) {
  prepare_out_dir(cfg);
  PreprocessReport report;

  Dataset ds = stage("ingest", [&] { return clean_dataset(load_or_generate(cfg, true), report); });
  stage("ingest", [&] {
    write_report_json(out_path(cfg, "preprocess_report.json"), report);
    return 0;
  });

  ds = stage("indices", [&] {
    Dataset out = featurize_dataset(std::move(ds), report);
    write_indices_csv(out_path(cfg, "indices.csv"), out);
    write_correlation_csv(out_path(cfg, "index_correlation.csv"), index_correlation_matrix(out));
    return out;
  });

  const AgriGraph g = stage("graph", [&] {
    AgriGraph built = build_graph(ds, cfg);
    write_edges_csv(out_path(cfg, "edges.csv"), built);
    return built;
  });

  const SplitAssignment split =
      stage("train", [&] { return split_train_test(ds, cfg.train_split, cfg.seed); });
  const TrainResult result = stage("train", [&] { return train(ds, g, split, cfg.train_config()); });
  stage("train", [&] {
    save_checkpoint(out_path(cfg, "model.json"), result.model);
    write_loss_history_csv(out_path(cfg, "loss_history.csv"), result);
    save_split_json(out_path(cfg, "split.json"), split);
    return 0;
  });

  PipelineSummary summary;
  stage("evaluate", [&] {
    const Matrix pred = predict(result.model, ds.feature_matrix, g);
    summary.test = evaluate(pred, ds.target, split.test_indices);
    summary.full_graph = evaluate(pred, ds.target, ds.labeled_indices());
    write_metrics_json(out_path(cfg, "metrics.json"), summary.test, summary.full_graph,
                       cfg.train_config());
    write_actual_vs_predicted_csv(out_path(cfg, "actual_vs_predicted.csv"), ds, pred, split);
    return 0;
  });

  stage("export", [&] {
    const Matrix embeddings = hidden_embeddings(result.model, ds.feature_matrix, g);
    write_embeddings_csv(out_path(cfg, "embeddings.csv"), ds, embeddings);
    export_tsne(cfg, ds, embeddings);
    return 0;
  });

  for (const auto& e : g.edges()) {
    summary.spatial_edges += e.spatial ? 1 : 0;
    summary.genotypic_edges += e.genotypic ? 1 : 0;
  }
  summary.total_edges = static_cast<int>(g.edges().size());
  return summary;
}

}  // namespace agrignn
