#include "hsg/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace hsg;

namespace {

// Points on a coarse lattice so that kNN distances tie often.
PointCloud lattice_cloud(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> u(0, 6);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.emplace_back(u(rng) * 0.1f, u(rng) * 0.1f, u(rng) * 0.1f);
  return c;
}

}  // namespace

TEST(Metrics, TransferLabelsMatchesFullSort) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    LabeledCloud pred;
    pred.cloud = lattice_cloud(rng, 20 + trial % 30);
    for (std::size_t i = 0; i < pred.cloud.size(); ++i) pred.labels.push_back(static_cast<int>(rng() % 4));
    const auto gt = lattice_cloud(rng, 15);
    const std::size_t k = 1 + trial % 7;
    EXPECT_EQ(transfer_labels(pred, gt, k), oracle::knn_majority(pred.cloud, pred.labels, gt, k));
  }
}

TEST(Metrics, SegMetricsMatchConfusionMatrix) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 2 + trial % 6;
    std::vector<int> gt, pred;
    for (int i = 0; i < 50; ++i) {
      gt.push_back(static_cast<int>(rng() % c));
      pred.push_back(static_cast<int>(rng() % (c + 2)) - 1);  // includes -1 and c
    }
    const auto got = seg_metrics(pred, gt, c);
    const auto exp = oracle::confusion_metrics(pred, gt, c);
    EXPECT_NEAR(got.miou, exp.miou, 1e-9);
    EXPECT_NEAR(got.fmiou, exp.fmiou, 1e-9);
    EXPECT_NEAR(got.macc, exp.macc, 1e-9);
  }
}

TEST(Metrics, SegMetricsPerfectAndRejectsBadInput) {
  const std::vector<int> a{0, 1, 2, 2};
  const auto m = seg_metrics(a, a, 5);
  EXPECT_DOUBLE_EQ(m.miou, 1.0);
  EXPECT_DOUBLE_EQ(m.fmiou, 1.0);
  EXPECT_THROW(seg_metrics(std::vector<int>{0}, a, 3), Error);
  EXPECT_THROW(seg_metrics(std::vector<int>{0}, std::vector<int>{7}, 3), Error);
}

TEST(Metrics, TopkRankAndAucMatchOracles) {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 12;
    std::vector<Embedding> cats;
    for (int j = 0; j < n; ++j) cats.push_back(test::random_unit(rng, 8));
    if (n > 3) cats[n - 1] = cats[0];  // exact tie
    std::vector<int> ranks;
    for (int q = 0; q < 20; ++q) {
      const int gt = static_cast<int>(rng() % n);
      const auto pred = q % 5 == 0 ? cats[gt] : test::random_unit(rng, 8);
      const int r = topk_rank(pred, gt, cats);
      EXPECT_EQ(r, oracle::full_sort_rank(pred, gt, cats));
      ranks.push_back(r);
    }
    const auto curve = aggregate_ranks(ranks, n);
    EXPECT_NEAR(curve.auc, oracle::auc_from_ranks(ranks, n), 1e-12);
    EXPECT_DOUBLE_EQ(curve.accuracy.back(), 1.0);
    for (std::size_t k = 1; k < curve.accuracy.size(); ++k) EXPECT_GE(curve.accuracy[k], curve.accuracy[k - 1]);
  }
}

TEST(Metrics, AucExtremes) {
  EXPECT_DOUBLE_EQ(aggregate_ranks(std::vector<int>{1, 1, 1}, 5).auc, 1.0);
  EXPECT_DOUBLE_EQ(aggregate_ranks(std::vector<int>{5, 5}, 5).auc, 0.125);
  EXPECT_DOUBLE_EQ(aggregate_ranks(std::vector<int>{1}, 1).auc, 1.0);
  EXPECT_THROW(aggregate_ranks(std::vector<int>{6}, 5), Error);
}

TEST(Metrics, RegionPrMatchesDoubleLoop) {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PointCloud> pred, gt;
    for (int i = 0; i < 1 + trial % 4; ++i) pred.push_back(test::random_cloud(rng, 20, 0.0, 1.0 + i));
    for (int i = 0; i < 1 + trial % 3; ++i) gt.push_back(test::random_cloud(rng, 25, 0.5 * i, 1.5 + 0.5 * i));
    if (trial % 10 == 0) pred.push_back(PointCloud{});
    const auto got = region_pr(pred, gt, 0.1);
    const auto [p, r] = oracle::region_pr(pred, gt, 0.1);
    EXPECT_NEAR(got.precision, p, 1e-9);
    EXPECT_NEAR(got.recall, r, 1e-9);
  }
}

TEST(Metrics, VoxelIouAndRetrievalMatchVoxelSets) {
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = test::random_cloud(rng, 40, 0.0, 1.0);
    const auto b = test::random_cloud(rng, 40, 0.2 * (trial % 6), 1.0 + 0.2 * (trial % 6));
    const double v = 0.1 + 0.05 * (trial % 5);
    const double iou = oracle::voxel_iou(a, b, v);
    EXPECT_NEAR(voxel_iou(a, b, v), iou, 1e-9);
    EXPECT_EQ(retrieval_success(a, b, v), iou > 0.1);
  }
  EXPECT_DOUBLE_EQ(voxel_iou(PointCloud{}, PointCloud{}, 0.1), 0.0);
  EXPECT_THROW(voxel_iou(PointCloud{}, PointCloud{}, 0.0), Error);
}

TEST(Metrics, FloorAccuracyTolerance) {
  const std::vector<FloorInterval> gt{{0.0, 2.8}, {3.1, 5.9}};
  EXPECT_DOUBLE_EQ(floor_accuracy(std::vector<FloorInterval>{{0.3, 2.7}, {3.0, 6.3}}, gt).acc, 1.0);
  EXPECT_DOUBLE_EQ(floor_accuracy(std::vector<FloorInterval>{{0.6, 2.7}, {3.0, 6.3}}, gt).acc, 0.0);
  const auto miss = floor_accuracy(std::vector<FloorInterval>{{0.0, 2.8}}, gt);
  EXPECT_DOUBLE_EQ(miss.acc, 0.0);
  EXPECT_EQ(miss.n_pred, 1);
  EXPECT_EQ(miss.n_gt, 2);
}

TEST(Metrics, HungarianMatchesPermutationSearch) {
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = 1 + trial % 5, cols = 1 + (trial / 5) % 5;
    std::vector<std::vector<double>> cost(rows, std::vector<double>(cols));
    for (auto& r : cost) {
      for (auto& c : r) c = u(rng);
    }
    const auto got = hungarian(cost);
    double got_cost = 0.0;
    std::set<int> used;
    for (int i = 0; i < rows; ++i) {
      if (got[i] >= 0) {
        got_cost += cost[i][got[i]];
        EXPECT_TRUE(used.insert(got[i]).second);
      }
    }
    EXPECT_EQ(static_cast<int>(used.size()), std::min(rows, cols));
    // Exhaustive: assign the smaller side injectively into the larger.
    const int small = std::min(rows, cols), large = std::max(rows, cols);
    std::vector<int> perm(large);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (int i = 0; i < small; ++i) c += rows <= cols ? cost[i][perm[i]] : cost[perm[i]][i];
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(got_cost, best, 1e-9);
  }
}

TEST(Metrics, MatchObjectsDiscardsLowIou) {
  const auto a = test::plane(0, 1, 0, 1, 0.01, 0.05);
  const auto b = test::plane(5, 6, 0, 1, 0.01, 0.05);
  const std::vector<PointCloud> pred{b, a, test::plane(9, 10, 9, 10, 0.01, 0.05)};
  const std::vector<PointCloud> gt{a, b};
  EXPECT_EQ(match_objects(pred, gt, 0.05), (std::vector<int>{1, 0, -1}));
}
