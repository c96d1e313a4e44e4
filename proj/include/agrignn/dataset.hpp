#pragma once
// Plot records, the column-oriented dataset table, and the CSV schema.
//
// The table carries numeric feature columns (soil, weather, vegetation
// indices; NaN = missing) and categorical columns (population, timepoint)
// that one_hot() turns into indicator columns. finalize_features() assembles
// the n x p feature matrix fed to the model.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agrignn/matrix.hpp"
#include "agrignn/rng.hpp"
#include "agrignn/spectrum.hpp"

namespace agrignn {

struct PlotRecord {
  std::string plot_id;
  double latitude = 0.0;   // decimal degrees
  double longitude = 0.0;  // decimal degrees
  std::string population;  // genotype label; empty means unknown
  int field_no = 1;
  std::string timepoint = "T3";  // one of T1, T2, T3
  BandSpectrum spectrum;
  std::optional<double> yield_raw;     // kg/ha at field moisture
  std::optional<double> moisture_pct;  // percent
};

class Dataset {
 public:
  std::vector<PlotRecord> records;

  // numeric table, column-major; NaN marks a missing cell
  std::vector<std::string> numeric_names;
  std::vector<std::vector<double>> numeric;

  // categorical table (consumed by one_hot)
  std::vector<std::string> categorical_names;
  std::vector<std::vector<std::string>> categorical;

  // outputs of finalize_features()
  std::vector<std::string> feature_names;
  Matrix feature_matrix;
  std::vector<double> target;  // moisture-normalized yield; NaN when unlabeled

  int size() const { return static_cast<int>(records.size()); }

  int numeric_column(const std::string& name) const;      // -1 when absent
  int categorical_column(const std::string& name) const;  // -1 when absent
  void add_numeric_column(const std::string& name, std::vector<double> values);
  void add_categorical_column(const std::string& name, std::vector<std::string> values);

  std::vector<std::array<double, 2>> coordinates() const;
  std::vector<std::string> populations() const;
  /// Indices of records with a finite target.
  std::vector<int> labeled_indices() const;

  /// Copies the numeric table into feature_matrix/feature_names. Fails on
  /// remaining missing cells or unconsumed categorical columns.
  void finalize_features();
};

struct CsvSchema {
  std::string plot_id = "plot_id";
  std::string latitude = "latitude";
  std::string longitude = "longitude";
  std::string population = "population";
  std::string field_no = "field_no";      // optional column
  std::string timepoint = "timepoint";    // optional column
  std::string yield_col = "yield";
  std::string moisture = "moisture_pct";  // optional column
};

/// Soil columns recognized by name in the ingest schema.
const std::vector<std::string>& soil_column_names();

/// Reads the ingest CSV: required columns plot_id/latitude/longitude/
/// population/yield, optional field_no/timepoint/moisture_pct, soil columns
/// by name, integer-named columns as spectral bands, anything else as a
/// numeric pass-through (weather) column. Empty cell = missing.
Dataset load_plots_csv(const std::string& path, const CsvSchema& schema = {});

/// Inverse of load_plots_csv for generated or cleaned data.
void save_plots_csv(const std::string& path, const Dataset& ds);

struct SplitAssignment {
  std::vector<int> train_indices;
  std::vector<int> test_indices;
  std::uint64_t seed = 0;
};

/// Uniform random split over the labeled records; |train| = round(f * n).
SplitAssignment split_train_test(const Dataset& ds, double fraction, std::uint64_t seed);

void save_split_json(const std::string& path, const SplitAssignment& split);
SplitAssignment load_split_json(const std::string& path);

}  // namespace agrignn
