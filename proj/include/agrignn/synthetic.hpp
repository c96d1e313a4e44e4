#pragma once
// Seeded synthetic yield-trial generator. Plots sit on row-column grids with
// the trial plot dimensions (1.52 m x 2.13 m preliminary, 1.52 m x 5.18 m
// advanced, 0.91 m interspacing); yield combines a per-field baseline, a
// per-population effect, a smooth spatial field, and a plant-vigor signal
// that also shapes the emitted reflectance spectra, so spectral indices
// carry real predictive information.

#include <cstdint>
#include <vector>

#include "agrignn/dataset.hpp"

namespace agrignn {

struct GeneratorConfig {
  /// Observation counts per field.
  std::vector<int> plots_per_field = {770, 912, 800, 679};
  int populations_per_field = 30;
  /// Scales the irreducible noise (yield noise and per-band spectral noise).
  /// 0 makes yield an exact function of the latent signals.
  double noise_level = 1.0;
  /// Spectral sampling grid, integer nanometres.
  int band_start_nm = 400;
  int band_end_nm = 1000;
  int band_step_nm = 2;
  std::string timepoint = "T3";
};

/// Deterministic per (config, seed); identical seeds give byte-identical
/// datasets. Non-positive counts are a config_error.
Dataset generate_synthetic_trial(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace agrignn
