#pragma once
// Per-plot hyperspectral reflectance sampled at named wavelengths.

#include <utility>
#include <vector>

namespace agrignn {

struct BandSample {
  double wavelength_nm = 0.0;
  double reflectance = 0.0;
};

/// Sorted reflectance samples with linear resampling between bands.
class BandSpectrum {
 public:
  BandSpectrum() = default;
  /// Sorts by wavelength; duplicate wavelengths are an input_error.
  explicit BandSpectrum(std::vector<BandSample> samples);

  const std::vector<BandSample>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }
  double min_wavelength() const { return samples_.front().wavelength_nm; }
  double max_wavelength() const { return samples_.back().wavelength_nm; }

  /// Reflectance at `nm`: exact sample when present, linear interpolation
  /// between the bracketing samples otherwise. Outside the sampled range
  /// (or on an empty spectrum) throws input_error; no extrapolation.
  double reflectance_at(double nm) const;

  /// Keeps samples with keep_lo <= wavelength <= keep_hi; returns the number
  /// of samples removed.
  int filter_range(double keep_lo, double keep_hi);

  bool any_negative() const;

 private:
  std::vector<BandSample> samples_;
};

}  // namespace agrignn
