#include "afp/threshold.hpp"

#include "afp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace afp {

void KdeConfig::validate() const
{
  if (!(offset >= 0.0) || !std::isfinite(offset))
    throw RangeError("kde offset must be a finite value >= 0");
  if (grid_points < 16)
    throw RangeError("kde grid_points must be >= 16");
  if (fixed_bandwidth &&
      !(*fixed_bandwidth > 0.0 && std::isfinite(*fixed_bandwidth)))
    throw RangeError("kde bandwidth must be a finite positive value");
}

double kde_density(std::span<const double> samples, double bandwidth, double x)
{
  if (samples.empty())
    return 0.0;
  const double inv_h = 1.0 / bandwidth;
  double sum = 0.0;
  for (double s : samples) {
    const double z = (x - s) * inv_h;
    sum += std::exp(-0.5 * z * z);
  }
  const double n = static_cast<double>(samples.size());
  return sum / (n * bandwidth * std::sqrt(2.0 * std::numbers::pi));
}

double scott_bandwidth(std::span<const double> samples)
{
  const std::size_t n = samples.size();
  double sd = 0.0;
  if (n > 1) {
    double mean = 0.0;
    for (double s : samples)
      mean += s;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double s : samples)
      ss += (s - mean) * (s - mean);
    sd = std::sqrt(ss / static_cast<double>(n - 1));
  }
  if (sd < 1e-9)
    return 1e-3;
  return sd * std::pow(static_cast<double>(n), -0.2);
}

ThresholdReport adaptive_threshold(std::span<const double> d_cos_upper,
                                   const KdeConfig& cfg)
{
  cfg.validate();
  if (d_cos_upper.empty())
    throw InsufficientSamplesError(
      "adaptive threshold needs at least one pairwise distance");

  const double h =
    cfg.fixed_bandwidth ? *cfg.fixed_bandwidth : scott_bandwidth(d_cos_upper);
  const auto [lo_it, hi_it] =
    std::minmax_element(d_cos_upper.begin(), d_cos_upper.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double grid_lo = std::max(0.0, lo - 3.0 * h);
  const double grid_hi = hi + 3.0 * h;
  const int m = cfg.grid_points;
  const double step = (grid_hi - grid_lo) / static_cast<double>(m - 1);

  double best_x = grid_lo;
  double best_density = -1.0;
  for (int k = 0; k < m; ++k) {
    const double x = grid_lo + step * static_cast<double>(k);
    const double density = kde_density(d_cos_upper, h, x);
    if (density > best_density) {
      best_density = density;
      best_x = x;
    }
  }

  ThresholdReport r;
  r.peak_p = std::clamp(best_x, lo, hi);
  r.tau = r.peak_p + cfg.offset;
  r.bandwidth = h;
  r.sample_count = d_cos_upper.size();
  return r;
}

} // namespace afp
