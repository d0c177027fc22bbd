#include "afp/selection.hpp"

#include "afp/errors.hpp"

#include <algorithm>

namespace afp {

namespace {

// True when candidate (value, index) should replace the incumbent under
// "better value, then earlier timestamp, then lower index".
template<typename Better>
bool beats(double value,
           std::size_t index,
           double best_value,
           std::size_t best_index,
           std::span<const double> timestamps,
           Better better)
{
  if (better(value, best_value))
    return true;
  if (value != best_value)
    return false;
  if (timestamps[index] != timestamps[best_index])
    return timestamps[index] < timestamps[best_index];
  return index < best_index;
}

void require_non_empty(const Cluster& cluster)
{
  if (cluster.empty())
    throw EmptySelectionError("cannot select from an empty cluster");
}

} // namespace

std::string_view to_string(SelectionStrategy s) noexcept
{
  return s == SelectionStrategy::centroid ? "centroid" : "highest_score";
}

SelectionStrategy parse_strategy(std::string_view text)
{
  if (text == "centroid")
    return SelectionStrategy::centroid;
  if (text == "highest_score" || text == "highest-score")
    return SelectionStrategy::highest_score;
  throw ValidationError("unknown selection strategy '" + std::string(text) + "'");
}

std::size_t select_highest_score(const Cluster& cluster,
                                 std::span<const double> scores,
                                 std::span<const double> timestamps)
{
  require_non_empty(cluster);
  std::size_t best = cluster.front();
  for (std::size_t idx : cluster)
    if (beats(scores[idx], idx, scores[best], best, timestamps,
              [](double a, double b) { return a > b; }))
      best = idx;
  return best;
}

std::size_t select_centroid(const Cluster& cluster,
                            const Eigen::MatrixXd& d_cos,
                            std::span<const double> timestamps)
{
  require_non_empty(cluster);
  if (cluster.size() == 1)
    return cluster.front();

  const double others = static_cast<double>(cluster.size() - 1);
  std::size_t best = cluster.front();
  double best_mean = 0.0;
  bool first = true;
  for (std::size_t idx : cluster) {
    double sum = 0.0;
    for (std::size_t other : cluster)
      if (other != idx)
        sum += d_cos(static_cast<Eigen::Index>(idx),
                     static_cast<Eigen::Index>(other));
    const double mean = sum / others;
    if (first || beats(mean, idx, best_mean, best, timestamps,
                       [](double a, double b) { return a < b; })) {
      best = idx;
      best_mean = mean;
      first = false;
    }
  }
  return best;
}

PrunedSet select_representatives(const ClusterSet& cs,
                                 SelectionStrategy strategy,
                                 std::span<const std::string> frame_ids,
                                 std::span<const double> timestamps,
                                 std::span<const double> scores,
                                 const Eigen::MatrixXd& d_cos)
{
  PrunedSet out;
  out.representatives.reserve(cs.clusters.size());
  for (std::size_t c = 0; c < cs.clusters.size(); ++c) {
    const Cluster& cluster = cs.clusters[c];
    const std::size_t idx =
      strategy == SelectionStrategy::centroid
        ? select_centroid(cluster, d_cos, timestamps)
        : select_highest_score(cluster, scores, timestamps);
    out.representatives.push_back({ c, idx, frame_ids[idx] });
  }
  std::sort(out.representatives.begin(), out.representatives.end(),
            [&](const Representative& a, const Representative& b) {
              if (timestamps[a.frame_index] != timestamps[b.frame_index])
                return timestamps[a.frame_index] < timestamps[b.frame_index];
              return a.frame_index < b.frame_index;
            });
  return out;
}

} // namespace afp
