// Command-line driver for the crop-yield graph pipeline.
//
// Exit codes: 0 success, 2 input/schema error, 3 numeric failure,
// 4 configuration error.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "agrignn/errors.hpp"
#include "agrignn/pipeline.hpp"
#include "agrignn/runconfig.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitConfig = 4;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  std::string input_csv;
  long long seed = -1;
  std::string edge_mode;
  double percentile = -1.0;
  bool threshold_closed = false;
};

agrignn::RunConfig resolve(const GlobalOptions& opts) {
  agrignn::RunConfig cfg = agrignn::load_run_config_or_default(opts.config_path);
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (!opts.input_csv.empty()) cfg.input_csv = opts.input_csv;
  if (!opts.edge_mode.empty()) cfg.set("graph.edge_mode", opts.edge_mode);
  if (opts.percentile >= 0.0) cfg.graph_percentile = opts.percentile;
  if (opts.threshold_closed) cfg.graph_threshold_closed = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agrignn - plot-graph crop yield pipeline"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "Run configuration file (key=value lines)");
  app.add_option("--seed", opts.seed, "Global seed (overrides the config)");
  app.add_option("--out", opts.out_dir, "Output directory (overrides the config)");
  app.add_option("--input", opts.input_csv, "Input plots CSV (overrides data.input)");
  app.add_option("--edge-mode", opts.edge_mode, "Spatial edge mode: global|per-node")
      ->check(CLI::IsMember({"global", "per-node"}));
  app.add_option("--percentile", opts.percentile, "Spatial distance percentile");
  app.add_flag("--threshold-closed", opts.threshold_closed,
               "Use d <= threshold instead of strict d < threshold");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic trial dataset");
  auto* ingest = app.add_subcommand("ingest", "Load and clean a plots CSV");
  auto* indices = app.add_subcommand("indices", "Compute the vegetation index table");
  auto* graph = app.add_subcommand("graph", "Build the spatial+genotypic graph");
  auto* train = app.add_subcommand("train", "Train the yield model");
  auto* evaluate = app.add_subcommand("evaluate", "Score a trained model");
  auto* baseline = app.add_subcommand("baseline", "K-nearest-neighbors yield baseline");
  auto* embed = app.add_subcommand("embed", "Export node embeddings and their 2-D layout");
  auto* pipeline = app.add_subcommand("pipeline", "Run the full pipeline end to end");

  // Let global flags appear after the subcommand name.
  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // exits 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const agrignn::RunConfig cfg = resolve(opts);
    if (simulate->parsed()) agrignn::cmd_simulate(cfg);
    else if (ingest->parsed()) agrignn::cmd_ingest(cfg);
    else if (indices->parsed()) agrignn::cmd_indices(cfg);
    else if (graph->parsed()) agrignn::cmd_graph(cfg);
    else if (train->parsed()) agrignn::cmd_train(cfg);
    else if (evaluate->parsed()) agrignn::cmd_evaluate(cfg);
    else if (baseline->parsed()) agrignn::cmd_baseline(cfg);
    else if (embed->parsed()) agrignn::cmd_embed(cfg);
    else if (pipeline->parsed()) {
      const agrignn::PipelineSummary s = agrignn::cmd_pipeline(cfg);
      std::printf("edges: %d (spatial %d, genotypic %d)\n", s.total_edges, s.spatial_edges,
                  s.genotypic_edges);
      std::printf("test rmse %.6g mae %.6g r2 %.6g\n", s.test.rmse, s.test.mae, s.test.r2);
    }
    return kExitOk;
  } catch (const agrignn::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const agrignn::numeric_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  } catch (const agrignn::input_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
}
