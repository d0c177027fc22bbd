#include "afp/clustering.hpp"

#include "afp/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace afp {

namespace {

void check_square_symmetric(const Eigen::MatrixXd& d)
{
  if (d.rows() != d.cols())
    throw ShapeError("distance matrix is " + std::to_string(d.rows()) + "x" +
                     std::to_string(d.cols()) + ", expected square");
  if (d.rows() == 0)
    throw ShapeError("distance matrix is empty");
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d.cols(); ++j)
      if (!(std::abs(d(i, j) - d(j, i)) <= 1e-12))
        throw ShapeError("distance matrix is not symmetric at (" +
                         std::to_string(i) + ", " + std::to_string(j) + ")");
}

Cluster merged(const Cluster& a, const Cluster& b)
{
  Cluster out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void sort_by_smallest_member(std::vector<Cluster>& clusters)
{
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& x, const Cluster& y) { return x.front() < y.front(); });
}

} // namespace

double average_linkage(const Eigen::MatrixXd& d,
                       const Cluster& a,
                       const Cluster& b)
{
  double sum = 0.0;
  for (std::size_t i : a)
    for (std::size_t j : b)
      sum += d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return sum / static_cast<double>(a.size() * b.size());
}

ClusterSet agglomerate(const Eigen::MatrixXd& d, double tau)
{
  check_square_symmetric(d);
  const auto n = static_cast<std::size_t>(d.rows());

  // Clusters stay ordered by smallest member: a merge keeps the lower slot
  // and erases the higher one, which preserves that order.
  ClusterSet cs;
  cs.clusters.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    cs.clusters.push_back({ i });

  // Cross-pair sums between current clusters; linkage = sum / (|A| |B|).
  std::vector<std::vector<double>> sums(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      sums[i][j] = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  while (cs.clusters.size() > 1) {
    const std::size_t m = cs.clusters.size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0;
    std::size_t best_b = 0;
    for (std::size_t a = 0; a < m; ++a) {
      const double size_a = static_cast<double>(cs.clusters[a].size());
      for (std::size_t b = a + 1; b < m; ++b) {
        const double link =
          sums[a][b] / (size_a * static_cast<double>(cs.clusters[b].size()));
        if (link < best) {
          best = link;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (!(best < tau))
      break;

    cs.merge_log.push_back({ cs.clusters[best_a], cs.clusters[best_b], best });
    cs.clusters[best_a] = merged(cs.clusters[best_a], cs.clusters[best_b]);
    cs.clusters.erase(cs.clusters.begin() + static_cast<std::ptrdiff_t>(best_b));

    for (std::size_t k = 0; k < m; ++k) {
      sums[best_a][k] += sums[best_b][k];
      sums[k][best_a] = sums[best_a][k];
    }
    sums.erase(sums.begin() + static_cast<std::ptrdiff_t>(best_b));
    for (auto& row : sums)
      row.erase(row.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  return cs;
}

ClusterSet refine_clusters(const ClusterSet& cs,
                           const Eigen::MatrixXd& d_cos,
                           bool enabled)
{
  if (!enabled)
    return cs;

  ClusterSet out = cs;
  sort_by_smallest_member(out.clusters);
  for (;;) {
    if (out.clusters.size() <= 1)
      break;
    // Ordered by smallest member, so the first small cluster holds the
    // lowest singleton frame index.
    const auto small = std::find_if(out.clusters.begin(), out.clusters.end(),
                                    [](const Cluster& c) { return c.size() < 2; });
    if (small == out.clusters.end())
      break;
    const auto s = static_cast<std::size_t>(small - out.clusters.begin());

    double best = std::numeric_limits<double>::infinity();
    std::size_t target = 0;
    for (std::size_t k = 0; k < out.clusters.size(); ++k) {
      if (k == s)
        continue;
      const double link = average_linkage(d_cos, out.clusters[s], out.clusters[k]);
      if (link < best) {
        best = link;
        target = k;
      }
    }
    out.clusters[target] = merged(out.clusters[target], out.clusters[s]);
    out.clusters.erase(out.clusters.begin() + static_cast<std::ptrdiff_t>(s));
    sort_by_smallest_member(out.clusters);
  }
  return out;
}

std::string format_dendrogram(const ClusterSet& cs)
{
  const auto members = [](const Cluster& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i)
        s += ',';
      s += std::to_string(c[i]);
    }
    return s;
  };
  std::string out;
  for (const Merge& m : cs.merge_log) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, m.linkage);
    out.append(buf, res.ptr);
    out += " | " + members(m.a) + " | " + members(m.b) + '\n';
  }
  return out;
}

} // namespace afp
