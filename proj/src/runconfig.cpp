#include "agrignn/runconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "agrignn/csv.hpp"
#include "agrignn/errors.hpp"

namespace agrignn {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

int to_int(const std::string& key, const std::string& value) {
  int v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
    throw config_error("config key '" + key + "': expected an integer, got '" + value + "'");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
    throw config_error("config key '" + key + "': expected an unsigned integer, got '" + value +
                       "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw config_error("config key '" + key + "': expected true/false, got '" + value + "'");
}

template <typename T, typename Parse>
std::vector<T> to_list(const std::string& key, const std::string& value, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw config_error("config key '" + key + "': empty list element");
    out.push_back(parse(key, item));
  }
  if (out.empty()) throw config_error("config key '" + key + "': empty list");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_same_v<T, double>)
      out += format_double(values[i]);
    else
      out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "seed") seed = to_u64(key, value);
  else if (key == "out") out_dir = value;
  else if (key == "runtime.kernels") kernels = value;
  else if (key == "data.input") input_csv = value;
  else if (key == "sim.plots") sim_plots = to_list<int>(key, value, to_int);
  else if (key == "sim.populations_per_field") sim_populations_per_field = to_int(key, value);
  else if (key == "sim.noise") sim_noise = to_double(key, value);
  else if (key == "sim.band_step") sim_band_step = to_int(key, value);
  else if (key == "sim.timepoint") sim_timepoint = value;
  else if (key == "graph.edge_mode") {
    if (value != "global" && value != "per-node")
      throw config_error("graph.edge_mode must be 'global' or 'per-node'");
    graph_edge_mode = value;
  } else if (key == "graph.percentile") graph_percentile = to_double(key, value);
  else if (key == "graph.threshold_closed") graph_threshold_closed = to_bool(key, value);
  else if (key == "graph.haversine") graph_haversine = to_bool(key, value);
  else if (key == "model.hidden") model_hidden = to_int(key, value);
  else if (key == "model.dropout") model_dropout = to_double(key, value);
  else if (key == "model.final_activation") {
    if (value != "identity" && value != "relu")
      throw config_error("model.final_activation must be 'identity' or 'relu'");
    model_final_activation = value;
  } else if (key == "train.lr") train_lr = to_double(key, value);
  else if (key == "train.epochs") train_epochs = to_int(key, value);
  else if (key == "train.split") train_split = to_double(key, value);
  else if (key == "knn.kmin") knn_kmin = to_int(key, value);
  else if (key == "knn.kmax") knn_kmax = to_int(key, value);
  else if (key == "tsne.perplexity") tsne_perplexity = to_double(key, value);
  else if (key == "tsne.iterations") tsne_iterations = to_int(key, value);
  else if (key == "tsne.max_points") tsne_max_points = to_int(key, value);
  else if (key == "grid.lrs") grid_lrs = to_list<double>(key, value, to_double);
  else if (key == "grid.hiddens") grid_hiddens = to_list<int>(key, value, to_int);
  else if (key == "grid.dropouts") grid_dropouts = to_list<double>(key, value, to_double);
  else throw config_error("unknown config key '" + key + "'");
}

GeneratorConfig RunConfig::generator_config() const {
  GeneratorConfig g;
  g.plots_per_field = sim_plots;
  g.populations_per_field = sim_populations_per_field;
  g.noise_level = sim_noise;
  g.band_step_nm = sim_band_step;
  g.timepoint = sim_timepoint;
  return g;
}

SpatialEdgeOptions RunConfig::spatial_options() const {
  SpatialEdgeOptions opts;
  opts.mode = graph_edge_mode == "per-node" ? SpatialEdgeMode::per_node : SpatialEdgeMode::global;
  opts.percentile = graph_percentile;
  opts.closed_threshold = graph_threshold_closed;
  return opts;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.learning_rate = train_lr;
  t.epochs = train_epochs;
  t.hidden_channels = model_hidden;
  t.dropout_rate = model_dropout;
  t.split_fraction = train_split;
  t.seed = seed;
  t.final_activation = model_final_activation == "relu" ? ModelConfig::Activation::relu
                                                        : ModelConfig::Activation::identity;
  return t;
}

TsneConfig RunConfig::tsne_config() const {
  TsneConfig t;
  t.perplexity = tsne_perplexity;
  t.iterations = tsne_iterations;
  t.seed = seed ^ 0x7473'6E65ULL;  // decorrelate from the training stream
  return t;
}

std::string RunConfig::resolved_text() const {
  std::ostringstream out;
  out << "data.input=" << input_csv << '\n';
  out << "graph.edge_mode=" << graph_edge_mode << '\n';
  out << "graph.haversine=" << (graph_haversine ? "true" : "false") << '\n';
  out << "graph.percentile=" << format_double(graph_percentile) << '\n';
  out << "graph.threshold_closed=" << (graph_threshold_closed ? "true" : "false") << '\n';
  out << "grid.dropouts=" << join(grid_dropouts) << '\n';
  out << "grid.hiddens=" << join(grid_hiddens) << '\n';
  out << "grid.lrs=" << join(grid_lrs) << '\n';
  out << "knn.kmax=" << knn_kmax << '\n';
  out << "knn.kmin=" << knn_kmin << '\n';
  out << "model.dropout=" << format_double(model_dropout) << '\n';
  out << "model.final_activation=" << model_final_activation << '\n';
  out << "model.hidden=" << model_hidden << '\n';
  out << "out=" << out_dir << '\n';
  out << "runtime.kernels=" << kernels << '\n';
  out << "seed=" << seed << '\n';
  out << "sim.band_step=" << sim_band_step << '\n';
  out << "sim.noise=" << format_double(sim_noise) << '\n';
  out << "sim.plots=" << join(sim_plots) << '\n';
  out << "sim.populations_per_field=" << sim_populations_per_field << '\n';
  out << "sim.timepoint=" << sim_timepoint << '\n';
  out << "train.epochs=" << train_epochs << '\n';
  out << "train.lr=" << format_double(train_lr) << '\n';
  out << "train.split=" << format_double(train_split) << '\n';
  out << "tsne.iterations=" << tsne_iterations << '\n';
  out << "tsne.max_points=" << tsne_max_points << '\n';
  out << "tsne.perplexity=" << format_double(tsne_perplexity) << '\n';
  return out.str();
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw config_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

RunConfig load_run_config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

}  // namespace agrignn
