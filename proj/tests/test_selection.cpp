#include "afp/selection.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace afp;
using testutil::to_eigen;

TEST_CASE("highest score selection")
{
  std::vector<double> scores(10, 0.0);
  std::vector<double> ts(10);
  for (std::size_t i = 0; i < ts.size(); ++i)
    ts[i] = static_cast<double>(i);

  CHECK(select_highest_score({ 3 }, scores, ts) == 3);

  scores[4] = 0.2;
  scores[7] = 0.9;
  scores[9] = 0.5;
  CHECK(select_highest_score({ 4, 7, 9 }, scores, ts) == 7);

  // Equal scores: the 3 s frame beats the 10 s frame.
  ts[1] = 10.0;
  ts[2] = 3.0;
  scores[1] = scores[2] = 0.5;
  CHECK(select_highest_score({ 1, 2 }, scores, ts) == 2);

  // Equal score and timestamp: lowest index.
  ts[5] = ts[6] = 1.0;
  scores[5] = scores[6] = 0.1;
  CHECK(select_highest_score({ 6, 5 }, scores, ts) == 5);
}

TEST_CASE("centroid selection")
{
  std::vector<double> ts{ 0.0, 1.0, 2.0, 3.0 };
  oracle::Matrix d(4, std::vector<double>(4, 0.0));
  CHECK(select_centroid({ 2 }, to_eigen(d), ts) == 2);

  // Two members always tie; the earlier timestamp wins.
  d[0][3] = d[3][0] = 0.7;
  ts = { 5.0, 1.0, 2.0, 4.0 };
  CHECK(select_centroid({ 0, 3 }, to_eigen(d), ts) == 3);

  // Row means (0.4, 0.2, 0.4) over members {0, 1, 2}.
  oracle::Matrix m{ { 0.0, 0.2, 0.6, 0.0 }, { 0.2, 0.0, 0.2, 0.0 }, { 0.6, 0.2, 0.0, 0.0 }, { 0, 0, 0, 0 } };
  const std::vector<std::size_t> members{ 0, 1, 2 };
  std::size_t brute = 0;
  double best = 1e9;
  for (std::size_t i : members) {
    double s = 0.0;
    for (std::size_t j : members)
      if (i != j)
        s += m[i][j];
    if (s / 2.0 < best) {
      best = s / 2.0;
      brute = i;
    }
  }
  CHECK(brute == 1);
  CHECK(select_centroid(members, to_eigen(m), std::vector<double>{ 0, 1, 2, 3 }) == brute);
}

TEST_CASE("selection invariances on random clusters")
{
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 8);
    std::vector<double> scores(n);
    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = u(rng);
      ts[i] = u(rng) * 100.0;
    }
    Cluster all(n);
    std::iota(all.begin(), all.end(), 0);

    // Strictly monotone transform of scores keeps the argmax.
    std::vector<double> transformed(n);
    for (std::size_t i = 0; i < n; ++i)
      transformed[i] = std::exp(3.0 * scores[i]) - 7.0;
    CHECK(select_highest_score(all, scores, ts) == select_highest_score(all, transformed, ts));

    // Adding a constant to in-cluster distances keeps the centroid.
    const auto d = oracle::random_distance_matrix(n, rng);
    auto shifted = d;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j)
          shifted[i][j] += 0.25;
    CHECK(select_centroid(all, to_eigen(d), ts) == select_centroid(all, to_eigen(shifted), ts));
  }
}

TEST_CASE("select_representatives orders by timestamp and keeps one per cluster")
{
  const std::vector<std::string> ids{ "a", "b", "c", "d", "e" };
  const std::vector<double> ts{ 9.0, 1.0, 5.0, 3.0, 7.0 };
  const std::vector<double> scores{ 0.1, 0.9, 0.3, 0.8, 0.2 };
  ClusterSet cs{ { { 0, 2 }, { 1, 3, 4 } }, {} };
  const Eigen::MatrixXd d = Eigen::MatrixXd::Constant(5, 5, 0.5);
  const auto pruned =
    select_representatives(cs, SelectionStrategy::highest_score, ids, ts, scores, d);
  REQUIRE(pruned.representatives.size() == 2);
  CHECK(pruned.representatives[0].frame_id == "b");
  CHECK(pruned.representatives[0].cluster_index == 1);
  CHECK(pruned.representatives[1].frame_id == "c");
  CHECK(pruned.representatives[1].cluster_index == 0);
}

TEST_CASE("strategy names")
{
  CHECK(parse_strategy("centroid") == SelectionStrategy::centroid);
  CHECK(parse_strategy("highest-score") == SelectionStrategy::highest_score);
  CHECK(parse_strategy("highest_score") == SelectionStrategy::highest_score);
  CHECK(to_string(SelectionStrategy::centroid) == "centroid");
  CHECK_THROWS(parse_strategy("random"));
}
