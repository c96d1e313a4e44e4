#pragma once
// Catalog of 52 spectral vegetation indices over reflectance-at-wavelength
// accessors, plus batched computation and the index correlation matrix.

#include <string>
#include <vector>

#include "agrignn/dataset.hpp"
#include "agrignn/matrix.hpp"
#include "agrignn/spectrum.hpp"

namespace agrignn {

struct IndexDefinition {
  const char* name;
  double (*eval)(const BandSpectrum&);
  /// Invariant under uniform positive scaling of the whole spectrum
  /// (normalized differences and pure band ratios).
  bool scale_invariant;
  /// Normalized difference (a-b)/(a+b), bounded to [-1, 1] on positive spectra.
  bool normalized_difference;
};

/// The full catalog, fixed order, exactly 52 uniquely named entries.
const std::vector<IndexDefinition>& index_catalog();

/// Evaluates one catalog index. A zero denominator (or any non-finite
/// result) yields NaN rather than aborting; unknown names are an
/// input_error, as are wavelengths outside the sampled range.
double compute_index(const std::string& name, const BandSpectrum& spectrum);

/// Appends the 52 index columns to the numeric table in catalog order.
/// Records whose spectra cannot resolve an index get NaN (imputed later);
/// returns the number of flagged records.
int compute_all_indices(Dataset& ds);

/// Pairwise-complete Pearson correlations of the 52 index columns.
/// Zero-variance columns get NaN correlations. Requires the index columns.
Matrix index_correlation_matrix(const Dataset& ds);

void write_indices_csv(const std::string& path, const Dataset& ds);
void write_correlation_csv(const std::string& path, const Matrix& corr);

}  // namespace agrignn
