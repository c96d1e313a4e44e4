#pragma once
// End-to-end orchestration shared by the CLI subcommands and the acceptance
// suite. Every command is a pure function of (input files, config, seed) to
// output files; reruns are byte-identical.

#include <string>

#include "agrignn/dataset.hpp"
#include "agrignn/graph.hpp"
#include "agrignn/knn.hpp"
#include "agrignn/preprocess.hpp"
#include "agrignn/runconfig.hpp"
#include "agrignn/train.hpp"

namespace agrignn {

/// Loads data.input, or generates the synthetic trial when it is empty
/// (writing plots.csv into the output directory).
Dataset load_or_generate(const RunConfig& cfg, bool write_generated);

/// Cleaning stages: band filter, invalid-record drop, moisture-normalized
/// targets.
Dataset clean_dataset(Dataset ds, PreprocessReport& report);

/// Feature stages: vegetation indices, mean imputation, one-hot encoding of
/// population and timepoint, feature-matrix assembly.
Dataset featurize_dataset(Dataset ds, PreprocessReport& report);

AgriGraph build_graph(const Dataset& ds, const RunConfig& cfg);

struct PipelineSummary {
  Metrics test;
  Metrics full_graph;
  int spatial_edges = 0;
  int genotypic_edges = 0;
  int total_edges = 0;
};

// One function per CLI subcommand; all write into cfg.out_dir.
void cmd_simulate(const RunConfig& cfg);
void cmd_ingest(const RunConfig& cfg);
void cmd_indices(const RunConfig& cfg);
void cmd_graph(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_baseline(const RunConfig& cfg);
void cmd_embed(const RunConfig& cfg);
PipelineSummary cmd_pipeline(const RunConfig& cfg);

}  // namespace agrignn
