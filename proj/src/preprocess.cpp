#include "agrignn/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "agrignn/errors.hpp"
#include "json.hpp"

namespace agrignn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBandLo = 400.0;
constexpr double kBandHi = 1000.0;

Dataset drop_rows(Dataset ds, const std::vector<bool>& keep) {
  Dataset out;
  out.numeric_names = ds.numeric_names;
  out.categorical_names = ds.categorical_names;
  out.numeric.resize(ds.numeric.size());
  out.categorical.resize(ds.categorical.size());
  for (int i = 0; i < ds.size(); ++i) {
    if (!keep[i]) continue;
    out.records.push_back(std::move(ds.records[i]));
    for (std::size_t c = 0; c < ds.numeric.size(); ++c) out.numeric[c].push_back(ds.numeric[c][i]);
    for (std::size_t c = 0; c < ds.categorical.size(); ++c)
      out.categorical[c].push_back(std::move(ds.categorical[c][i]));
    if (i < static_cast<int>(ds.target.size())) out.target.push_back(ds.target[i]);
  }
  return out;
}

}  // namespace

void write_report_json(const std::string& path, const PreprocessReport& report) {
  nlohmann::ordered_json j;
  j["rows_in"] = report.rows_in;
  j["rows_dropped_negative_reflectance"] = report.rows_dropped_negative_reflectance;
  j["rows_dropped_negative_yield"] = report.rows_dropped_negative_yield;
  j["cells_imputed"] = report.cells_imputed;
  j["bands_removed"] = report.bands_removed;
  j["spectra_emptied"] = report.spectra_emptied;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write report file: " + path);
  out << j.dump(2) << '\n';
}

Dataset filter_bands(Dataset ds, PreprocessReport* report) {
  for (auto& rec : ds.records) {
    const bool had_samples = !rec.spectrum.empty();
    const int removed = rec.spectrum.filter_range(kBandLo, kBandHi);
    if (report != nullptr) {
      report->bands_removed += removed;
      if (had_samples && rec.spectrum.empty()) ++report->spectra_emptied;
    }
  }
  return ds;
}

Dataset drop_invalid(Dataset ds, PreprocessReport* report) {
  std::vector<bool> keep(ds.size(), true);
  for (int i = 0; i < ds.size(); ++i) {
    const PlotRecord& r = ds.records[i];
    if (r.spectrum.any_negative()) {
      keep[i] = false;
      if (report != nullptr) ++report->rows_dropped_negative_reflectance;
      continue;
    }
    if (r.yield_raw && *r.yield_raw < 0.0) {
      keep[i] = false;
      if (report != nullptr) ++report->rows_dropped_negative_yield;
    }
  }
  return drop_rows(std::move(ds), keep);
}

double normalize_yield(double yield_raw, double moisture_pct) {
  if (moisture_pct < 0.0 || moisture_pct >= 100.0)
    throw input_error("moisture percentage " + std::to_string(moisture_pct) +
                      " outside [0, 100)");
  return yield_raw * (100.0 - moisture_pct) / (100.0 - 13.0);
}

Dataset fill_targets(Dataset ds) {
  ds.target.assign(ds.size(), kNaN);
  for (int i = 0; i < ds.size(); ++i) {
    const PlotRecord& r = ds.records[i];
    if (!r.yield_raw) continue;
    ds.target[i] = r.moisture_pct ? normalize_yield(*r.yield_raw, *r.moisture_pct) : *r.yield_raw;
  }
  return ds;
}

Dataset impute_missing(Dataset ds, PreprocessReport* report) {
  for (std::size_t c = 0; c < ds.numeric.size(); ++c) {
    auto& col = ds.numeric[c];
    double sum = 0.0;
    long long observed = 0;
    for (double v : col) {
      if (std::isfinite(v)) {
        sum += v;
        ++observed;
      }
    }
    const long long missing = static_cast<long long>(col.size()) - observed;
    if (missing == 0) continue;
    if (observed == 0)
      throw input_error("column '" + ds.numeric_names[c] + "' has no observed values to impute from");
    const double mean = sum / static_cast<double>(observed);
    for (double& v : col)
      if (!std::isfinite(v)) v = mean;
    if (report != nullptr) report->cells_imputed += missing;
  }
  return ds;
}

Dataset one_hot(Dataset ds, const std::string& column) {
  const int c = ds.categorical_column(column);
  if (c < 0) throw input_error("one_hot: unknown categorical column '" + column + "'");

  std::vector<std::string> values = std::move(ds.categorical[c]);
  ds.categorical.erase(ds.categorical.begin() + c);
  ds.categorical_names.erase(ds.categorical_names.begin() + c);
  for (auto& v : values)
    if (v.empty()) v = "UNKNOWN";

  std::set<std::string> levels(values.begin(), values.end());  // lexicographic
  for (const std::string& level : levels) {
    std::vector<double> indicator(values.size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] == level) indicator[i] = 1.0;
    ds.add_numeric_column(column + "=" + level, std::move(indicator));
  }
  return ds;
}

Grid smooth_soil_grid(const Grid& grid) {
  if (grid.rows < 1 || grid.cols < 1) throw input_error("smooth_soil_grid: empty grid");
  if (grid.values.size() != static_cast<std::size_t>(grid.rows) * grid.cols)
    throw input_error("smooth_soil_grid: value count does not match dimensions");

  Grid out{grid.rows, grid.cols, std::vector<double>(grid.values.size(), 0.0)};
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      double sum = 0.0;
      int count = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr < 0 || rr >= grid.rows || cc < 0 || cc >= grid.cols) continue;
          sum += grid.at(rr, cc);
          ++count;
        }
      }
      out.at(r, c) = sum / count;
    }
  }
  return out;
}

}  // namespace agrignn
