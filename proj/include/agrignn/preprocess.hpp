#pragma once
// Dataset cleaning rules: band filtering, invalid-record removal, moisture
// normalization, mean imputation, one-hot encoding, soil raster smoothing.
// All operations are pure (input by value) and idempotent.

#include <string>
#include <vector>

#include "agrignn/dataset.hpp"

namespace agrignn {

struct PreprocessReport {
  long long rows_in = 0;
  long long rows_dropped_negative_reflectance = 0;
  long long rows_dropped_negative_yield = 0;
  long long cells_imputed = 0;
  long long bands_removed = 0;
  long long spectra_emptied = 0;  // spectra left empty after band filtering
};

void write_report_json(const std::string& path, const PreprocessReport& report);

/// Removes spectral samples outside [400, 1000] nm from every record.
Dataset filter_bands(Dataset ds, PreprocessReport* report = nullptr);

/// Drops records carrying any negative reflectance (post-filter) or a
/// negative raw yield.
Dataset drop_invalid(Dataset ds, PreprocessReport* report = nullptr);

/// Dry-matter correction to 13% moisture: yield * (100 - m) / (100 - 13).
/// 13% is a fixed point. Moisture outside [0, 100) is an input_error.
double normalize_yield(double yield_raw, double moisture_pct);

/// Fills ds.target with the moisture-normalized yield per record; records
/// without a moisture value are taken as already normalized, records without
/// a yield get NaN (prediction-only).
Dataset fill_targets(Dataset ds);

/// Replaces every missing numeric cell with its column mean over observed
/// values. An all-missing column is an input_error naming the column.
Dataset impute_missing(Dataset ds, PreprocessReport* report = nullptr);

/// Replaces categorical column `column` with one indicator column per level,
/// levels in lexicographic order, named "column=level". Missing entries
/// become the explicit level "UNKNOWN".
Dataset one_hot(Dataset ds, const std::string& column);

/// Row-major 2-D raster for soil attribute grids.
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

/// 3x3 moving mean; border cells average their in-bounds neighbors only.
Grid smooth_soil_grid(const Grid& grid);

}  // namespace agrignn
