#pragma once

#include "afp/fusion.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace afp {

struct TimeSpan
{
  double t_min = 0.0;
  double t_max = 0.0;
};

//! Pairwise visual and combined distances over the N candidate frames.
struct DistanceTables
{
  std::size_t n = 0;
  Eigen::MatrixXd d_cos;
  Eigen::MatrixXd d_comb;
  TimeSpan t_span;

  //! Strict upper triangle of d_cos, row-major (each unordered pair once).
  std::vector<double> cos_upper_triangle() const;
};

//! 1 - cos(angle), clamped to [0, 2]. Throws ZeroVectorError if either norm
//! is at most 1e-12.
double cosine_distance(std::span<const double> a, std::span<const double> b);

//! |t_i - t_j| / (t_max - t_min); zero for a degenerate span.
double temporal_distance(double t_i, double t_j, TimeSpan span);

//! beta * d_cos + (1 - beta) * d_temp. Throws RangeError for beta outside
//! [0, 1].
double combined_distance(double d_cos, double d_temp, double beta);

struct TimedFeature
{
  const FusedFeature* feature = nullptr;
  double timestamp_s = 0.0;
};

DistanceTables build_tables(std::span<const TimedFeature> frames, double beta);

//! Convenience overload pairing features[i] with timestamps[i].
DistanceTables build_tables(std::span<const FusedFeature> features,
                            std::span<const double> timestamps,
                            double beta);

} // namespace afp
