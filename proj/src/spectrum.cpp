#include "agrignn/spectrum.hpp"

#include <algorithm>
#include <string>

#include "agrignn/errors.hpp"

namespace agrignn {

BandSpectrum::BandSpectrum(std::vector<BandSample> samples) : samples_(std::move(samples)) {
  std::sort(samples_.begin(), samples_.end(),
            [](const BandSample& a, const BandSample& b) { return a.wavelength_nm < b.wavelength_nm; });
  for (std::size_t i = 1; i < samples_.size(); ++i)
    if (samples_[i].wavelength_nm == samples_[i - 1].wavelength_nm)
      throw input_error("duplicate wavelength " + std::to_string(samples_[i].wavelength_nm) +
                        " nm in spectrum");
}

double BandSpectrum::reflectance_at(double nm) const {
  if (samples_.empty()) throw input_error("reflectance_at on empty spectrum");
  if (nm < min_wavelength() || nm > max_wavelength())
    throw input_error("wavelength " + std::to_string(nm) + " nm outside sampled range [" +
                      std::to_string(min_wavelength()) + ", " + std::to_string(max_wavelength()) +
                      "]");
  auto it = std::lower_bound(samples_.begin(), samples_.end(), nm,
                             [](const BandSample& s, double w) { return s.wavelength_nm < w; });
  if (it->wavelength_nm == nm) return it->reflectance;
  const BandSample& hi = *it;
  const BandSample& lo = *(it - 1);
  const double t = (nm - lo.wavelength_nm) / (hi.wavelength_nm - lo.wavelength_nm);
  return lo.reflectance + t * (hi.reflectance - lo.reflectance);
}

int BandSpectrum::filter_range(double keep_lo, double keep_hi) {
  const std::size_t before = samples_.size();
  samples_.erase(std::remove_if(samples_.begin(), samples_.end(),
                                [&](const BandSample& s) {
                                  return s.wavelength_nm < keep_lo || s.wavelength_nm > keep_hi;
                                }),
                 samples_.end());
  return static_cast<int>(before - samples_.size());
}

bool BandSpectrum::any_negative() const {
  for (const BandSample& s : samples_)
    if (s.reflectance < 0.0) return true;
  return false;
}

}  // namespace agrignn
