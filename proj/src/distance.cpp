#include "afp/distance.hpp"

#include "afp/errors.hpp"

#include <algorithm>
#include <cmath>

namespace afp {

namespace {

constexpr double kMinNorm = 1e-12;

double norm_of(std::span<const double> v)
{
  double s = 0.0;
  for (double x : v)
    s += x * x;
  return std::sqrt(s);
}

} // namespace

std::vector<double> DistanceTables::cos_upper_triangle() const
{
  std::vector<double> out;
  if (n < 2)
    return out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      out.push_back(d_cos(static_cast<Eigen::Index>(i),
                          static_cast<Eigen::Index>(j)));
  return out;
}

double cosine_distance(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size())
    throw ShapeError("cosine_distance: vectors differ in dimension");
  const double na = norm_of(a);
  const double nb = norm_of(b);
  if (!(na > kMinNorm) || !(nb > kMinNorm))
    throw ZeroVectorError("cosine_distance: zero-norm vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    dot += a[i] * b[i];
  return std::clamp(1.0 - dot / (na * nb), 0.0, 2.0);
}

double temporal_distance(double t_i, double t_j, TimeSpan span)
{
  const double width = span.t_max - span.t_min;
  if (!(width > 0.0))
    return 0.0;
  return std::abs(t_i - t_j) / width;
}

double combined_distance(double d_cos, double d_temp, double beta)
{
  if (!(beta >= 0.0 && beta <= 1.0))
    throw RangeError("beta must lie in [0, 1]");
  return beta * d_cos + (1.0 - beta) * d_temp;
}

DistanceTables build_tables(std::span<const TimedFeature> frames, double beta)
{
  if (frames.empty())
    throw InsufficientSamplesError("build_tables needs at least one frame");
  if (!(beta >= 0.0 && beta <= 1.0))
    throw RangeError("beta must lie in [0, 1]");

  const std::size_t n = frames.size();
  DistanceTables t;
  t.n = n;
  const auto [lo, hi] = std::minmax_element(
    frames.begin(), frames.end(),
    [](const auto& a, const auto& b) { return a.timestamp_s < b.timestamp_s; });
  t.t_span = { lo->timestamp_s, hi->timestamp_s };

  for (std::size_t i = 0; i < n; ++i)
    if (!(norm_of(frames[i].feature->vec) > kMinNorm))
      throw ZeroVectorError("frame index " + std::to_string(i) +
                            " has a zero-norm fused feature");

  const auto sz = static_cast<Eigen::Index>(n);
  t.d_cos = Eigen::MatrixXd::Zero(sz, sz);
  t.d_comb = Eigen::MatrixXd::Zero(sz, sz);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dc =
        cosine_distance(frames[i].feature->vec, frames[j].feature->vec);
      const double dt = temporal_distance(frames[i].timestamp_s,
                                          frames[j].timestamp_s, t.t_span);
      const double dd = combined_distance(dc, dt, beta);
      const auto a = static_cast<Eigen::Index>(i);
      const auto b = static_cast<Eigen::Index>(j);
      t.d_cos(a, b) = t.d_cos(b, a) = dc;
      t.d_comb(a, b) = t.d_comb(b, a) = dd;
    }
  }
  return t;
}

DistanceTables build_tables(std::span<const FusedFeature> features,
                            std::span<const double> timestamps,
                            double beta)
{
  if (features.size() != timestamps.size())
    throw ShapeError("build_tables: feature and timestamp counts differ");
  std::vector<TimedFeature> frames;
  frames.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i)
    frames.push_back({ &features[i], timestamps[i] });
  return build_tables(frames, beta);
}

} // namespace afp
