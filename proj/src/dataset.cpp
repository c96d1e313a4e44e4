#include "agrignn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "agrignn/csv.hpp"
#include "agrignn/errors.hpp"
#include "json.hpp"

namespace agrignn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_integer_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

bool valid_timepoint(const std::string& s) { return s == "T1" || s == "T2" || s == "T3"; }

}  // namespace

const std::vector<std::string>& soil_column_names() {
  static const std::vector<std::string> names = {"Ca", "CEC",  "K",  "Mg",   "OM",
                                                 "P1", "Ph",   "Clay", "Sand", "Silt"};
  return names;
}

int Dataset::numeric_column(const std::string& name) const {
  for (std::size_t i = 0; i < numeric_names.size(); ++i)
    if (numeric_names[i] == name) return static_cast<int>(i);
  return -1;
}

int Dataset::categorical_column(const std::string& name) const {
  for (std::size_t i = 0; i < categorical_names.size(); ++i)
    if (categorical_names[i] == name) return static_cast<int>(i);
  return -1;
}

void Dataset::add_numeric_column(const std::string& name, std::vector<double> values) {
  if (values.size() != records.size())
    throw input_error("numeric column '" + name + "' length does not match record count");
  if (numeric_column(name) >= 0) throw input_error("duplicate numeric column '" + name + "'");
  numeric_names.push_back(name);
  numeric.push_back(std::move(values));
}

void Dataset::add_categorical_column(const std::string& name, std::vector<std::string> values) {
  if (values.size() != records.size())
    throw input_error("categorical column '" + name + "' length does not match record count");
  if (categorical_column(name) >= 0)
    throw input_error("duplicate categorical column '" + name + "'");
  categorical_names.push_back(name);
  categorical.push_back(std::move(values));
}

std::vector<std::array<double, 2>> Dataset::coordinates() const {
  std::vector<std::array<double, 2>> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.latitude, r.longitude});
  return out;
}

std::vector<std::string> Dataset::populations() const {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.population);
  return out;
}

std::vector<int> Dataset::labeled_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (i < static_cast<int>(target.size()) && std::isfinite(target[i])) out.push_back(i);
  return out;
}

void Dataset::finalize_features() {
  if (!categorical_names.empty())
    throw input_error("finalize_features: categorical column '" + categorical_names.front() +
                      "' has not been one-hot encoded");
  const int n = size();
  const int p = static_cast<int>(numeric_names.size());
  Matrix x(n, p);
  for (int c = 0; c < p; ++c) {
    const auto& col = numeric[c];
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(col[i]))
        throw input_error("finalize_features: missing value remains in column '" +
                          numeric_names[c] + "' (run impute_missing first)");
      x(i, c) = col[i];
    }
  }
  feature_matrix = std::move(x);
  feature_names = numeric_names;
}

Dataset load_plots_csv(const std::string& path, const CsvSchema& schema) {
  const CsvTable table = read_csv(path);

  auto require = [&table, &path](const std::string& name) {
    const int c = table.column(name);
    if (c < 0) throw input_error(path + ": missing required column '" + name + "'");
    return c;
  };
  const int c_id = require(schema.plot_id);
  const int c_lat = require(schema.latitude);
  const int c_lon = require(schema.longitude);
  const int c_pop = require(schema.population);
  const int c_yield = require(schema.yield_col);
  const int c_field = table.column(schema.field_no);
  const int c_tp = table.column(schema.timepoint);
  const int c_moist = table.column(schema.moisture);

  // Everything else is a band column (integer name) or a numeric
  // pass-through column; soil and weather land in the same numeric table.
  std::vector<int> band_cols;
  std::vector<double> band_nm;
  std::vector<int> misc_cols;
  for (int c = 0; c < static_cast<int>(table.header.size()); ++c) {
    if (c == c_id || c == c_lat || c == c_lon || c == c_pop || c == c_yield || c == c_field ||
        c == c_tp || c == c_moist)
      continue;
    const std::string& name = table.header[c];
    if (is_integer_name(name)) {
      band_cols.push_back(c);
      band_nm.push_back(std::stod(name));
    } else {
      misc_cols.push_back(c);
    }
  }

  Dataset ds;
  const int n = static_cast<int>(table.rows.size());
  ds.records.reserve(n);
  std::vector<std::vector<double>> misc(misc_cols.size(), std::vector<double>());
  for (auto& col : misc) col.reserve(n);
  std::vector<std::string> pops, tps;

  for (int r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + " row " + std::to_string(r + 1);
    PlotRecord rec;
    rec.plot_id = row[c_id];
    if (rec.plot_id.empty()) throw input_error(where + ": empty plot_id");

    auto need = [&](int col, const std::string& name) {
      auto v = parse_cell(row[col], where + " column '" + name + "'");
      if (!v) throw input_error(where + ": missing value in column '" + name + "'");
      return *v;
    };
    rec.latitude = need(c_lat, schema.latitude);
    rec.longitude = need(c_lon, schema.longitude);
    if (rec.latitude < -90.0 || rec.latitude > 90.0)
      throw input_error(where + ": latitude " + std::to_string(rec.latitude) + " out of range");
    if (rec.longitude < -180.0 || rec.longitude > 180.0)
      throw input_error(where + ": longitude " + std::to_string(rec.longitude) + " out of range");

    rec.population = row[c_pop].empty() ? "UNKNOWN" : row[c_pop];
    if (c_field >= 0 && !row[c_field].empty()) {
      const double v = need(c_field, schema.field_no);
      if (v != std::floor(v))
        throw input_error(where + ": field_no must be an integer, got " + row[c_field]);
      rec.field_no = static_cast<int>(v);
    }
    if (c_tp >= 0 && !row[c_tp].empty()) {
      rec.timepoint = row[c_tp];
      if (!valid_timepoint(rec.timepoint))
        throw input_error(where + ": timepoint '" + rec.timepoint + "' not one of T1/T2/T3");
    }
    if (auto v = parse_cell(row[c_yield], where + " column '" + schema.yield_col + "'"))
      rec.yield_raw = *v;
    if (c_moist >= 0)
      if (auto v = parse_cell(row[c_moist], where + " column '" + schema.moisture + "'"))
        rec.moisture_pct = *v;

    std::vector<BandSample> samples;
    samples.reserve(band_cols.size());
    for (std::size_t b = 0; b < band_cols.size(); ++b)
      if (auto v = parse_cell(row[band_cols[b]], where + " band " + table.header[band_cols[b]]))
        samples.push_back({band_nm[b], *v});
    rec.spectrum = BandSpectrum(std::move(samples));

    for (std::size_t m = 0; m < misc_cols.size(); ++m) {
      auto v = parse_cell(row[misc_cols[m]], where + " column '" + table.header[misc_cols[m]] + "'");
      misc[m].push_back(v ? *v : kNaN);
    }

    pops.push_back(rec.population);
    tps.push_back(rec.timepoint);
    ds.records.push_back(std::move(rec));
  }

  for (std::size_t m = 0; m < misc_cols.size(); ++m)
    ds.add_numeric_column(table.header[misc_cols[m]], std::move(misc[m]));
  ds.add_categorical_column("population", std::move(pops));
  ds.add_categorical_column("timepoint", std::move(tps));
  return ds;
}

void save_plots_csv(const std::string& path, const Dataset& ds) {
  // Union of sampled wavelengths across records, ascending.
  std::set<double> wavelengths;
  for (const auto& r : ds.records)
    for (const auto& s : r.spectrum.samples()) wavelengths.insert(s.wavelength_nm);

  CsvTable table;
  table.header = {"plot_id", "latitude",  "longitude", "population",
                  "field_no", "timepoint", "yield",     "moisture_pct"};
  for (const auto& name : ds.numeric_names) table.header.push_back(name);
  for (double w : wavelengths) {
    const double rounded = std::round(w);
    table.header.push_back(rounded == w ? std::to_string(static_cast<long long>(rounded))
                                        : format_double(w));
  }

  table.rows.reserve(ds.records.size());
  for (int i = 0; i < ds.size(); ++i) {
    const PlotRecord& r = ds.records[i];
    std::vector<std::string> row;
    row.reserve(table.header.size());
    row.push_back(r.plot_id);
    row.push_back(format_double(r.latitude));
    row.push_back(format_double(r.longitude));
    row.push_back(r.population);
    row.push_back(std::to_string(r.field_no));
    row.push_back(r.timepoint);
    row.push_back(r.yield_raw ? format_double(*r.yield_raw) : "");
    row.push_back(r.moisture_pct ? format_double(*r.moisture_pct) : "");
    for (const auto& col : ds.numeric)
      row.push_back(std::isfinite(col[i]) ? format_double(col[i]) : "");
    std::map<double, double> lookup;
    for (const auto& s : r.spectrum.samples()) lookup[s.wavelength_nm] = s.reflectance;
    for (double w : wavelengths) {
      auto it = lookup.find(w);
      row.push_back(it == lookup.end() ? "" : format_double(it->second));
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

SplitAssignment split_train_test(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw config_error("split fraction must be in (0, 1)");
  std::vector<int> labeled = ds.labeled_indices();
  const int n = static_cast<int>(labeled.size());
  if (n < 2) throw input_error("split_train_test requires at least 2 labeled records");

  Rng rng(seed);
  rng.shuffle(labeled.data(), n);
  const int n_train = static_cast<int>(std::lround(fraction * n));

  SplitAssignment split;
  split.seed = seed;
  split.train_indices.assign(labeled.begin(), labeled.begin() + n_train);
  split.test_indices.assign(labeled.begin() + n_train, labeled.end());
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  return split;
}

void save_split_json(const std::string& path, const SplitAssignment& split) {
  nlohmann::ordered_json j;
  j["seed"] = split.seed;
  j["train_indices"] = split.train_indices;
  j["test_indices"] = split.test_indices;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write split file: " + path);
  out << j.dump(2) << '\n';
}

SplitAssignment load_split_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open split file: " + path);
  nlohmann::json j;
  try {
    in >> j;
    SplitAssignment split;
    split.seed = j.at("seed").get<std::uint64_t>();
    split.train_indices = j.at("train_indices").get<std::vector<int>>();
    split.test_indices = j.at("test_indices").get<std::vector<int>>();
    return split;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("malformed split file " + path + ": " + e.what());
  }
}

}  // namespace agrignn
