#include "agrignn/vegindex.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "agrignn/csv.hpp"
#include "agrignn/errors.hpp"

namespace agrignn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shorthand used by the formula table below.
using S = BandSpectrum;
double T(const S& s, double nm) { return s.reflectance_at(nm); }

// clang-format off
const std::vector<IndexDefinition> kCatalog = {
  // name       formula                                                            scale-inv  norm-diff
  {"CI",      [](const S& s){ return T(s,675) * T(s,690) / (T(s,683) * T(s,683)); }, true,  false},
  {"CIre",    [](const S& s){ return T(s,750) / T(s,710) - 1.0; },                   true,  false},
  {"Datt1",   [](const S& s){ return (T(s,850) - T(s,710)) / (T(s,850) - T(s,680)); }, true, false},
  {"Datt4",   [](const S& s){ return T(s,672) / (T(s,550) * T(s,708)); },            false, false},
  {"Datt6",   [](const S& s){ return T(s,860) / (T(s,550) * T(s,708)); },            false, false},
  {"DDI",     [](const S& s){ return (T(s,749) - T(s,720)) - (T(s,701) - T(s,672)); }, false, false},
  {"DPI",     [](const S& s){ return (T(s,688) + T(s,710)) / (T(s,697) * T(s,697)); }, false, false},
  {"Gitelson2",[](const S& s){ return (T(s,750) - T(s,800)) / (T(s,695) - T(s,740)) - 1.0; }, true, false},
  {"GNDVI",   [](const S& s){ return (T(s,750) - T(s,550)) / (T(s,750) + T(s,550)); }, true, true},
  {"MCARI",   [](const S& s){ return ((T(s,700) - T(s,670)) - 0.2 * (T(s,700) - T(s,550))) * (T(s,700) / T(s,670)); }, false, false},
  {"MCARI3",  [](const S& s){ return ((T(s,750) - T(s,710)) - 0.2 * (T(s,750) - T(s,550))) * (T(s,750) / T(s,715)); }, false, false},
  {"MND1",    [](const S& s){ return (T(s,800) - T(s,680)) / (T(s,800) + T(s,680) - 2.0 * T(s,445)); }, true, false},
  {"MND2",    [](const S& s){ return (T(s,750) - T(s,705)) / (T(s,750) + T(s,705) - 2.0 * T(s,445)); }, true, false},
  {"mSR",     [](const S& s){ return (T(s,800) - T(s,445)) / (T(s,680) - T(s,445)); }, true,  false},
  {"mSR2",    [](const S& s){ return (T(s,750) / T(s,705) - 1.0) / std::sqrt(T(s,750) / T(s,705) + 1.0); }, true, false},
  {"MTCI",    [](const S& s){ return (T(s,754) - T(s,709)) / (T(s,709) - T(s,681)); }, true,  false},
  {"MTVI1",   [](const S& s){ return 1.2 * (1.2 * (T(s,800) - T(s,550)) - 2.5 * (T(s,670) - T(s,550))); }, false, false},
  {"ND1",     [](const S& s){ return (T(s,550) - T(s,531)) / (T(s,550) + T(s,531)); }, true, true},
  {"ND2",     [](const S& s){ return (T(s,682) - T(s,553)) / (T(s,682) + T(s,553)); }, true, true},
  {"NDchl",   [](const S& s){ return (T(s,925) - T(s,710)) / (T(s,925) + T(s,710)); }, true, true},
  {"NDRE",    [](const S& s){ return (T(s,790) - T(s,720)) / (T(s,790) + T(s,720)); }, true, true},
  {"NDVI1",   [](const S& s){ return (T(s,750) - T(s,650)) / (T(s,750) + T(s,650)); }, true, true},
  {"NDVI2",   [](const S& s){ return (T(s,750) - T(s,550)) / (T(s,750) + T(s,550)); }, true, true},
  {"NDVI3",   [](const S& s){ return (T(s,750) - T(s,710)) / (T(s,750) + T(s,710)); }, true, true},
  {"NPCI",    [](const S& s){ return (T(s,680) - T(s,430)) / (T(s,680) + T(s,430)); }, true, true},
  {"NPQI",    [](const S& s){ return (T(s,415) - T(s,435)) / (T(s,415) + T(s,435)); }, true, true},
  {"OSAVI",   [](const S& s){ return (1.0 + 0.16) * (T(s,800) - T(s,670)) * (T(s,800) + T(s,670) - 0.16); }, false, false},
  {"PBI",     [](const S& s){ return T(s,810) / T(s,560); },                          true,  false},
  {"PPR",     [](const S& s){ return (T(s,550) - T(s,450)) / (T(s,550) + T(s,450)); }, true, true},
  {"PRI",     [](const S& s){ return (T(s,550) - T(s,530)) / (T(s,550) + T(s,530)); }, true, true},
  {"PSNDb1",  [](const S& s){ return (T(s,800) - T(s,650)) / (T(s,800) + T(s,650)); }, true, true},
  {"PSNDc1",  [](const S& s){ return (T(s,800) - T(s,500)) / (T(s,800) + T(s,500)); }, true, true},
  {"PSNDc2",  [](const S& s){ return (T(s,800) - T(s,470)) / (T(s,800) + T(s,470)); }, true, true},
  {"PSRI",    [](const S& s){ return (T(s,678) - T(s,500)) / T(s,750); },             true,  false},
  {"PSSRc1",  [](const S& s){ return T(s,800) / T(s,500); },                          true,  false},
  {"PSSRc2",  [](const S& s){ return T(s,800) / T(s,740); },                          true,  false},
  {"PVR",     [](const S& s){ return (T(s,550) - T(s,650)) / (T(s,550) + T(s,650)); }, true, true},
  {"PWI",     [](const S& s){ return T(s,970) / T(s,900); },                          true,  false},
  {"RDVI",    [](const S& s){ return (T(s,800) - T(s,670)) / std::sqrt(T(s,800) + T(s,670)); }, false, false},
  {"RVSI",    [](const S& s){ return (T(s,718) + T(s,748)) / 2.0 - T(s,733); },       false, false},
  {"SAVI",    [](const S& s){ return 1.16 * ((T(s,800) - T(s,670)) / (T(s,800) + T(s,670) + 0.16)); }, false, false},
  {"SIPI",    [](const S& s){ return (T(s,800) - T(s,445)) / (T(s,800) + T(s,680)); }, true, false},
  {"SR1",     [](const S& s){ return T(s,430) / T(s,680); },                          true,  false},
  {"SR2",     [](const S& s){ return T(s,440) / T(s,740); },                          true,  false},
  {"SR3",     [](const S& s){ return T(s,550) / T(s,672); },                          true,  false},
  {"SR4",     [](const S& s){ return T(s,550) / T(s,750); },                          true,  false},
  {"DSWI-4",  [](const S& s){ return T(s,550) / T(s,680); },                          true,  false},
  {"SRPI",    [](const S& s){ return T(s,430) / T(s,680); },                          true,  false},
  {"TCARI",   [](const S& s){ return 3.0 * ((T(s,700) - T(s,670)) - 0.2 * (T(s,700) - T(s,550)) * (T(s,700) / T(s,670))); }, false, false},
  {"TCI",     [](const S& s){ return 1.2 * (T(s,700) - T(s,550)) - 1.5 * (T(s,670) - T(s,550)) * std::sqrt(T(s,700) / T(s,670)); }, false, false},
  {"TVI",     [](const S& s){ return 0.5 * (120.0 * (T(s,750) - T(s,550)) - 200.0 * (T(s,670) - T(s,550))); }, false, false},
  {"WBI",     [](const S& s){ return T(s,970) / T(s,902); },                          true,  false},
};
// clang-format on

}  // namespace

const std::vector<IndexDefinition>& index_catalog() { return kCatalog; }

double compute_index(const std::string& name, const BandSpectrum& spectrum) {
  for (const IndexDefinition& def : kCatalog) {
    if (name != def.name) continue;
    const double v = def.eval(spectrum);  // may throw input_error on range
    return std::isfinite(v) ? v : kNaN;   // zero denominators become NaN
  }
  throw input_error("unknown vegetation index '" + name + "'");
}

int compute_all_indices(Dataset& ds) {
  const int n = ds.size();
  std::vector<std::vector<double>> columns(kCatalog.size(), std::vector<double>(n, kNaN));
  int flagged = 0;
  for (int i = 0; i < n; ++i) {
    const BandSpectrum& sp = ds.records[i].spectrum;
    bool ok = true;
    for (std::size_t c = 0; c < kCatalog.size(); ++c) {
      try {
        const double v = kCatalog[c].eval(sp);
        columns[c][i] = std::isfinite(v) ? v : kNaN;
        if (!std::isfinite(v)) ok = false;
      } catch (const input_error&) {
        ok = false;  // unresolvable wavelength: leave NaN for imputation
      }
    }
    if (!ok) ++flagged;
  }
  for (std::size_t c = 0; c < kCatalog.size(); ++c)
    ds.add_numeric_column(kCatalog[c].name, std::move(columns[c]));
  return flagged;
}

Matrix index_correlation_matrix(const Dataset& ds) {
  const int k = static_cast<int>(kCatalog.size());
  std::vector<const std::vector<double>*> cols(k);
  for (int c = 0; c < k; ++c) {
    const int idx = ds.numeric_column(kCatalog[c].name);
    if (idx < 0)
      throw input_error("index column '" + std::string(kCatalog[c].name) +
                        "' not present; run compute_all_indices first");
    cols[c] = &ds.numeric[idx];
  }

  // A literally-constant column has zero variance even when its computed
  // mean picks up rounding; detect by exact scan so its correlations are NaN.
  std::vector<bool> constant(k, true);
  for (int c = 0; c < k; ++c) {
    bool seen = false;
    double first = 0.0;
    for (double v : *cols[c]) {
      if (!std::isfinite(v)) continue;
      if (!seen) {
        first = v;
        seen = true;
      } else if (v != first) {
        constant[c] = false;
        break;
      }
    }
  }

  Matrix corr(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      if (constant[a] || constant[b]) {
        corr(a, b) = kNaN;
        corr(b, a) = kNaN;
        continue;
      }
      // Pairwise-complete two-pass Pearson.
      double sx = 0.0, sy = 0.0;
      int m = 0;
      for (int i = 0; i < ds.size(); ++i) {
        const double x = (*cols[a])[i];
        const double y = (*cols[b])[i];
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        sx += x;
        sy += y;
        ++m;
      }
      double r = kNaN;
      if (m >= 2) {
        const double mx = sx / m, my = sy / m;
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (int i = 0; i < ds.size(); ++i) {
          const double x = (*cols[a])[i];
          const double y = (*cols[b])[i];
          if (!std::isfinite(x) || !std::isfinite(y)) continue;
          sxx += (x - mx) * (x - mx);
          syy += (y - my) * (y - my);
          sxy += (x - mx) * (y - my);
        }
        if (sxx > 0.0 && syy > 0.0)
          r = (a == b) ? 1.0 : sxy / std::sqrt(sxx * syy);
      }
      corr(a, b) = r;
      corr(b, a) = r;
    }
  }
  return corr;
}

void write_indices_csv(const std::string& path, const Dataset& ds) {
  CsvTable table;
  table.header.push_back("plot_id");
  std::vector<const std::vector<double>*> cols;
  for (const IndexDefinition& def : kCatalog) {
    const int idx = ds.numeric_column(def.name);
    if (idx < 0)
      throw input_error("index column '" + std::string(def.name) + "' not present");
    table.header.push_back(def.name);
    cols.push_back(&ds.numeric[idx]);
  }
  for (int i = 0; i < ds.size(); ++i) {
    std::vector<std::string> row;
    row.reserve(table.header.size());
    row.push_back(ds.records[i].plot_id);
    for (const auto* col : cols)
      row.push_back(std::isfinite((*col)[i]) ? format_double((*col)[i]) : "");
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

void write_correlation_csv(const std::string& path, const Matrix& corr) {
  CsvTable table;
  table.header.push_back("index");
  for (const IndexDefinition& def : kCatalog) table.header.push_back(def.name);
  for (int a = 0; a < corr.rows(); ++a) {
    std::vector<std::string> row;
    row.push_back(kCatalog[a].name);
    for (int b = 0; b < corr.cols(); ++b)
      row.push_back(std::isfinite(corr(a, b)) ? format_double(corr(a, b)) : "");
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

}  // namespace agrignn
