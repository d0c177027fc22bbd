#pragma once

#include "afp/clustering.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace afp {

enum class SelectionStrategy
{
  highest_score,
  centroid
};

std::string_view to_string(SelectionStrategy s) noexcept;
SelectionStrategy parse_strategy(std::string_view text);

struct Representative
{
  std::size_t cluster_index = 0;
  std::size_t frame_index = 0;
  std::string frame_id;

  bool operator==(const Representative&) const = default;
};

//! One representative per cluster, ordered by representative timestamp
//! ascending (frame index on equal timestamps).
struct PrunedSet
{
  std::vector<Representative> representatives;
};

//! Highest-scoring member. Ties go to the earliest timestamp, then to the
//! lowest frame index.
std::size_t select_highest_score(const Cluster& cluster,
                                 std::span<const double> scores,
                                 std::span<const double> timestamps);

//! Member with the smallest mean visual distance to the other members
//! (zero for a singleton). Same tie-break as select_highest_score.
std::size_t select_centroid(const Cluster& cluster,
                            const Eigen::MatrixXd& d_cos,
                            std::span<const double> timestamps);

PrunedSet select_representatives(const ClusterSet& cs,
                                 SelectionStrategy strategy,
                                 std::span<const std::string> frame_ids,
                                 std::span<const double> timestamps,
                                 std::span<const double> scores,
                                 const Eigen::MatrixXd& d_cos);

} // namespace afp
