#pragma once

#include <optional>
#include <span>

namespace afp {

struct KdeConfig
{
  double offset = 0.15;
  int grid_points = 512;
  //! Fixed bandwidth; Scott's rule when empty.
  std::optional<double> fixed_bandwidth;

  void validate() const;
};

struct ThresholdReport
{
  double tau = 0.0;
  double peak_p = 0.0;
  double bandwidth = 0.0;
  std::size_t sample_count = 0;

  bool operator==(const ThresholdReport&) const = default;
};

//! Gaussian kernel density estimate at x.
double kde_density(std::span<const double> samples, double bandwidth, double x);

//! Scott's rule h = sd * n^(-1/5) with the unbiased sample standard
//! deviation; falls back to 1e-3 when sd < 1e-9 (including n == 1).
double scott_bandwidth(std::span<const double> samples);

//! Clustering threshold from the mode of the pairwise visual distance
//! distribution: tau = argmax KDE + offset.
//!
//! The density is evaluated on grid_points uniform points spanning
//! [max(0, min - 3h), max + 3h]; the lowest argmax wins ties and is clamped
//! into [min sample, max sample]. Throws InsufficientSamplesError on an empty
//! sample list.
ThresholdReport adaptive_threshold(std::span<const double> d_cos_upper,
                                   const KdeConfig& cfg);

} // namespace afp
