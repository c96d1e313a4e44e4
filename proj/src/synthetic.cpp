#include "agrignn/synthetic.hpp"

#include <cmath>
#include <string>

#include "agrignn/errors.hpp"
#include "agrignn/preprocess.hpp"
#include "agrignn/rng.hpp"

namespace agrignn {
namespace {

// Trial geometry (metres).
constexpr double kPlotWidth = 1.52;
constexpr double kPlotLengthPyt = 2.13;
constexpr double kPlotLengthAyt = 5.18;
constexpr double kInterspace = 0.91;
constexpr double kFieldGap = 60.0;

// Anchor coordinates for the degree conversion (central Iowa).
constexpr double kLat0 = 42.03;
constexpr double kLon0 = -93.64;
constexpr double kMetresPerDegLat = 111320.0;

struct SoilSpec {
  const char* name;
  double mean;
  double spread;
};

constexpr SoilSpec kSoilSpecs[] = {
    {"Ca", 20.0, 4.0}, {"CEC", 15.0, 3.0}, {"K", 1.5, 0.4},   {"Mg", 5.0, 1.0},
    {"OM", 3.0, 0.8},  {"P1", 2.0, 0.6},   {"Ph", 6.5, 0.5},  {"Clay", 25.0, 5.0},
    {"Sand", 40.0, 8.0}, {"Silt", 35.0, 6.0},
};

/// Smooth 2-D signal: a sum of seeded Gaussian bumps over the field extent.
struct BumpField {
  struct Bump {
    double cx, cy, amp, inv2w2;
  };
  std::vector<Bump> bumps;

  BumpField(Rng& rng, int count, double extent_x, double extent_y, double amp_sd) {
    const double extent = std::max(extent_x, extent_y);
    for (int b = 0; b < count; ++b) {
      Bump bump;
      bump.cx = rng.uniform(0.0, extent_x);
      bump.cy = rng.uniform(0.0, extent_y);
      bump.amp = rng.normal(0.0, amp_sd);
      const double w = rng.uniform(0.2, 0.5) * extent;
      bump.inv2w2 = 1.0 / (2.0 * w * w);
      bumps.push_back(bump);
    }
  }

  double operator()(double x, double y) const {
    double v = 0.0;
    for (const Bump& b : bumps) {
      const double dx = x - b.cx;
      const double dy = y - b.cy;
      v += b.amp * std::exp(-(dx * dx + dy * dy) * b.inv2w2);
    }
    return v;
  }
};

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Canopy reflectance as a function of plant vigor v in (0, 1): low red
/// reflectance and high near-infrared plateau for vigorous plants, with a
/// green bump, a red-edge transition and a water absorption dip near 970 nm.
double reflectance_model(double lambda_nm, double vigor) {
  const double red = 0.04 + 0.14 * (1.0 - vigor);
  const double nir = 0.22 + 0.48 * vigor;
  const double green_amp = 0.03 + 0.03 * (1.0 - vigor);
  const double dg = (lambda_nm - 554.0) / 28.0;
  const double visible = red + green_amp * std::exp(-0.5 * dg * dg);
  const double edge = logistic((lambda_nm - 717.0) / 11.0);
  double r = visible * (1.0 - edge) + nir * edge;
  const double dw = (lambda_nm - 965.0) / 18.0;
  r -= 0.04 * (1.0 - 0.5 * vigor) * std::exp(-0.5 * dw * dw);
  return r;
}

}  // namespace

Dataset generate_synthetic_trial(const GeneratorConfig& config, std::uint64_t seed) {
  if (config.plots_per_field.empty()) throw config_error("generator: no fields configured");
  for (int count : config.plots_per_field)
    if (count <= 0) throw config_error("generator: plots_per_field entries must be positive");
  if (config.populations_per_field <= 0)
    throw config_error("generator: populations_per_field must be positive");
  if (config.noise_level < 0.0) throw config_error("generator: noise_level must be >= 0");
  if (config.band_step_nm <= 0 || config.band_end_nm < config.band_start_nm)
    throw config_error("generator: invalid band grid");

  Rng master(seed);
  Dataset ds;
  const int num_fields = static_cast<int>(config.plots_per_field.size());
  const int pops = config.populations_per_field;

  std::vector<double> band_grid;
  for (int nm = config.band_start_nm; nm <= config.band_end_nm; nm += config.band_step_nm)
    band_grid.push_back(static_cast<double>(nm));

  std::vector<std::vector<double>> soil_cols(std::size(kSoilSpecs));
  double field_origin_x = 0.0;

  for (int f = 0; f < num_fields; ++f) {
    Rng rng = master.fork(static_cast<std::uint64_t>(f) + 1);
    const int n = config.plots_per_field[f];
    const bool advanced = f >= (num_fields + 1) / 2;  // later fields use the longer plots
    const double plot_len = advanced ? kPlotLengthAyt : kPlotLengthPyt;
    const double dx = kPlotWidth + kInterspace;
    const double dy = plot_len + kInterspace;

    const int ncols = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
    const int nrows = (n + ncols - 1) / ncols;
    const double extent_x = ncols * dx;
    const double extent_y = nrows * dy;

    const double field_base = 70.0 + rng.uniform(-2.0, 2.0);
    BumpField spatial(rng, 6, extent_x, extent_y, 2.5);

    std::vector<double> pop_effect(pops);
    for (int p = 0; p < pops; ++p) pop_effect[p] = rng.normal(0.0, 3.5);

    // Soil attributes come from per-field rasters smoothed with the 3x3
    // moving mean, one grid cell per plot position.
    std::vector<Grid> soil_grids;
    for (const SoilSpec& spec : kSoilSpecs) {
      Grid raw{nrows, ncols, std::vector<double>(static_cast<std::size_t>(nrows) * ncols)};
      BumpField pattern(rng, 4, extent_x, extent_y, spec.spread);
      for (int r = 0; r < nrows; ++r)
        for (int c = 0; c < ncols; ++c)
          raw.at(r, c) = spec.mean + pattern(c * dx, r * dy) + rng.normal(0.0, 0.05 * spec.spread);
      soil_grids.push_back(smooth_soil_grid(raw));
    }

    for (int i = 0; i < n; ++i) {
      const int row = i / ncols;
      const int col = i % ncols;
      const double x = field_origin_x + col * dx;
      const double y = row * dy;

      PlotRecord rec;
      rec.plot_id = "F" + std::to_string(f + 1) + "_P" + std::to_string(i + 1);
      rec.field_no = f + 1;
      rec.timepoint = config.timepoint;
      rec.latitude = kLat0 + y / kMetresPerDegLat;
      rec.longitude = kLon0 + x / (kMetresPerDegLat * std::cos(kLat0 * 0.017453292519943295));

      const int pop = i % pops;  // entries interleaved across the grid
      rec.population = "F" + std::to_string(f + 1) + "_POP" +
                       (pop < 9 ? "0" + std::to_string(pop + 1) : std::to_string(pop + 1));

      const double local_x = x - field_origin_x;
      const double vigor_raw = spatial(local_x, y) + pop_effect[pop] + rng.normal(0.0, 3.0);
      const double vigor = logistic(vigor_raw / 6.0);

      const double yield13 =
          field_base + vigor_raw + config.noise_level * rng.normal(0.0, 1.2);
      const double moisture = rng.uniform(9.0, 17.0);
      rec.moisture_pct = moisture;
      // Stored raw so the ingest normalization recovers yield13 exactly.
      rec.yield_raw = yield13 * (100.0 - 13.0) / (100.0 - moisture);

      std::vector<BandSample> samples;
      samples.reserve(band_grid.size());
      for (double nm : band_grid) {
        const double noise = config.noise_level * rng.normal(0.0, 0.002);
        samples.push_back({nm, reflectance_model(nm, vigor) + noise});
      }
      rec.spectrum = BandSpectrum(std::move(samples));

      for (std::size_t sc = 0; sc < soil_grids.size(); ++sc)
        soil_cols[sc].push_back(soil_grids[sc].at(row, col));
      ds.records.push_back(std::move(rec));
    }
    field_origin_x += extent_x + kFieldGap;
  }

  for (std::size_t sc = 0; sc < std::size(kSoilSpecs); ++sc)
    ds.add_numeric_column(kSoilSpecs[sc].name, std::move(soil_cols[sc]));

  std::vector<std::string> pops_col, tps_col;
  for (const auto& r : ds.records) {
    pops_col.push_back(r.population);
    tps_col.push_back(r.timepoint);
  }
  ds.add_categorical_column("population", std::move(pops_col));
  ds.add_categorical_column("timepoint", std::move(tps_col));
  return ds;
}

}  // namespace agrignn
