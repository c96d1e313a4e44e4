// End-to-end checks against the installed binary (path passed as argv[1]):
// exit-code taxonomy, output files, byte-identical reruns.

#define DOCTEST_CONFIG_IMPLEMENT
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "agrignn/csv.hpp"
#include "doctest.h"

namespace {

std::string g_binary;
namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = g_binary + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

const char* kSmallConfig =
    "sim.plots=90,80\n"
    "sim.populations_per_field=6\n"
    "sim.band_step=10\n"
    "train.epochs=60\n"
    "tsne.iterations=120\n"
    "tsne.max_points=60\n";

}  // namespace

TEST_CASE("help exits 0, bad usage and bad config exit 4") {
  CHECK(run("--help") == 0);
  CHECK(run("pipeline --help") == 0);
  CHECK(run("--definitely-not-a-flag pipeline") == 4);
  CHECK(run("") == 4);  // missing subcommand

  const fs::path dir = temp_dir("agrignn_cli_cfg");
  write_file(dir / "bad.cfg", "graph.percentile=3\nnot.a.key=1\n");
  CHECK(run("simulate --config " + (dir / "bad.cfg").string() + " --out " + dir.string()) == 4);

  write_file(dir / "badval.cfg", "train.epochs=many\n");
  CHECK(run("simulate --config " + (dir / "badval.cfg").string() + " --out " + dir.string()) == 4);
}

TEST_CASE("corrupt input CSV exits with the schema error code") {
  const fs::path dir = temp_dir("agrignn_cli_corrupt");
  write_file(dir / "corrupt.csv", "plot_id,latitude\np1\n");  // ragged row
  CHECK(run("ingest --input " + (dir / "corrupt.csv").string() + " --out " + dir.string()) == 2);

  write_file(dir / "nopop.csv", "plot_id,latitude,longitude,yield\np1,42,-93,70\n");
  CHECK(run("ingest --input " + (dir / "nopop.csv").string() + " --out " + dir.string()) == 2);
}

TEST_CASE("simulate: deterministic bytes and config passthrough") {
  const fs::path a = temp_dir("agrignn_cli_sim_a");
  const fs::path b = temp_dir("agrignn_cli_sim_b");
  write_file(a / "sim.cfg", "sim.plots=50\nsim.populations_per_field=4\nsim.band_step=25\n");

  REQUIRE(run("simulate --config " + (a / "sim.cfg").string() + " --seed 7 --out " + a.string()) ==
          0);
  REQUIRE(run("simulate --config " + (a / "sim.cfg").string() + " --seed 7 --out " + b.string()) ==
          0);
  CHECK(slurp(a / "plots.csv") == slurp(b / "plots.csv"));

  const agrignn::CsvTable table = agrignn::read_csv((a / "plots.csv").string());
  CHECK(table.rows.size() == 50);
  CHECK(fs::exists(a / "resolved_config.txt"));
}

TEST_CASE("pipeline produces every artifact and reruns byte-identically") {
  const fs::path a = temp_dir("agrignn_cli_pipe_a");
  const fs::path b = temp_dir("agrignn_cli_pipe_b");
  write_file(a / "run.cfg", kSmallConfig);

  REQUIRE(run("pipeline --config " + (a / "run.cfg").string() + " --seed 3 --out " + a.string()) ==
          0);
  for (const char* name :
       {"plots.csv", "preprocess_report.json", "indices.csv", "index_correlation.csv", "edges.csv",
        "split.json", "model.json", "loss_history.csv", "metrics.json", "actual_vs_predicted.csv",
        "embeddings.csv", "tsne.csv", "resolved_config.txt"})
    CHECK_MESSAGE(fs::exists(a / name), name);

  REQUIRE(run("pipeline --config " + (a / "run.cfg").string() + " --seed 3 --out " + b.string()) ==
          0);
  CHECK(slurp(a / "metrics.json") == slurp(b / "metrics.json"));
  CHECK(slurp(a / "loss_history.csv") == slurp(b / "loss_history.csv"));
  CHECK(slurp(a / "model.json") == slurp(b / "model.json"));
  CHECK(slurp(a / "edges.csv") == slurp(b / "edges.csv"));
  CHECK(slurp(a / "tsne.csv") == slurp(b / "tsne.csv"));

  // indices.csv: plot_id + the 52 catalog columns
  const agrignn::CsvTable indices = agrignn::read_csv((a / "indices.csv").string());
  CHECK(indices.header.size() == 53);

  // edges.csv well-formed
  const agrignn::CsvTable edges = agrignn::read_csv((a / "edges.csv").string());
  CHECK(edges.header == std::vector<std::string>{"src", "dst", "spatial", "genotypic"});
  CHECK(!edges.rows.empty());
}

TEST_CASE("baseline writes the chosen k and metric fields") {
  const fs::path dir = temp_dir("agrignn_cli_base");
  write_file(dir / "run.cfg", kSmallConfig);
  REQUIRE(run("baseline --config " + (dir / "run.cfg").string() + " --seed 5 --out " +
              dir.string()) == 0);
  const std::string json = slurp(dir / "baseline_metrics.json");
  CHECK(json.find("\"k\"") != std::string::npos);
  CHECK(json.find("\"rmse\"") != std::string::npos);
  CHECK(json.find("\"mae\"") != std::string::npos);
  CHECK(json.find("\"r2\"") != std::string::npos);

  const fs::path dir2 = temp_dir("agrignn_cli_base2");
  write_file(dir2 / "run.cfg", kSmallConfig);
  REQUIRE(run("baseline --config " + (dir2 / "run.cfg").string() + " --seed 5 --out " +
              dir2.string()) == 0);
  CHECK(slurp(dir / "baseline_metrics.json") == slurp(dir2 / "baseline_metrics.json"));
}

TEST_CASE("train then evaluate and embed reuse the checkpoint") {
  const fs::path dir = temp_dir("agrignn_cli_train");
  write_file(dir / "run.cfg", kSmallConfig);
  const std::string common =
      " --config " + (dir / "run.cfg").string() + " --seed 9 --out " + dir.string();
  REQUIRE(run("simulate" + common) == 0);

  // Feed the generated CSV back through the standalone stages.
  const std::string input = " --input " + (dir / "plots.csv").string();
  REQUIRE(run("train" + common + input) == 0);
  CHECK(fs::exists(dir / "model.json"));
  CHECK(fs::exists(dir / "split.json"));
  REQUIRE(run("evaluate" + common + input) == 0);
  CHECK(fs::exists(dir / "metrics.json"));
  REQUIRE(run("embed" + common + input) == 0);
  CHECK(fs::exists(dir / "embeddings.csv"));
  CHECK(fs::exists(dir / "tsne.csv"));

  // embeddings.csv: plot_id + hidden channels (default 32)
  const agrignn::CsvTable emb = agrignn::read_csv((dir / "embeddings.csv").string());
  CHECK(emb.header.size() == 33);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-agrignn-binary>\n");
    return 1;
  }
  g_binary = argv[1];
  doctest::Context context;
  context.applyCommandLine(1, argv);
  return context.run();
}
