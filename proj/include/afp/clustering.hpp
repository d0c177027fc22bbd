#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace afp {

using Cluster = std::vector<std::size_t>;

struct Merge
{
  Cluster a;
  Cluster b;
  double linkage = 0.0;

  bool operator==(const Merge&) const = default;
};

//! Partition of frame indices. Each cluster is sorted ascending and clusters
//! are ordered by their smallest member.
struct ClusterSet
{
  std::vector<Cluster> clusters;
  std::vector<Merge> merge_log;

  bool operator==(const ClusterSet&) const = default;
};

//! Average-linkage agglomerative clustering over a precomputed distance
//! matrix. Pairs are merged while the smallest linkage is strictly below tau.
//!
//! Among equal minimal linkages, the pair (A, B) with min(A) < min(B) that is
//! lexicographically smallest in (min(A), min(B)) wins. Throws ShapeError
//! unless d is square and symmetric within 1e-12.
ClusterSet agglomerate(const Eigen::MatrixXd& d, double tau);

//! Folds every cluster of fewer than two frames into its nearest cluster by
//! average visual distance, lowest singleton first, until no singleton is
//! left or a single cluster remains. Identity when disabled.
ClusterSet refine_clusters(const ClusterSet& cs,
                           const Eigen::MatrixXd& d_cos,
                           bool enabled);

//! Average of d over all cross pairs, summed in (a, b) member order.
double average_linkage(const Eigen::MatrixXd& d,
                       const Cluster& a,
                       const Cluster& b);

//! One line per merge: "<height> | a-members | b-members".
std::string format_dendrogram(const ClusterSet& cs);

} // namespace afp
