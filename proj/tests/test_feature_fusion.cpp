#include "hsg/feature_fusion.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace hsg;

TEST(Fusion, WeightsMustSumToOne) {
  EXPECT_NO_THROW(FusionWeights{}.validate());
  EXPECT_THROW((FusionWeights{0.5, 0.5, 0.5}.validate()), Error);
  EXPECT_THROW((FusionWeights{-0.5, 1.0, 0.5}.validate()), Error);
}

TEST(Fusion, MatchesNormalizedWeightedSum) {
  std::mt19937_64 rng(21);
  const FusionWeights w;
  for (int i = 0; i < 20; ++i) {
    const auto a = test::random_unit(rng, 8), b = test::random_unit(rng, 8), c = test::random_unit(rng, 8);
    const Eigen::VectorXd sum = 0.25 * a.values().cast<double>() + 0.5 * b.values().cast<double>() +
                                0.25 * c.values().cast<double>();
    const Eigen::VectorXd expected = sum / sum.norm();
    const Embedding got = fuse_embeddings(a, b, c, w);
    EXPECT_LT((got.values().cast<double>() - expected).norm(), 1e-6);
  }
}

TEST(Fusion, CancellingInputsAreDegenerate) {
  const auto e = test::basis(4, 0);
  Eigen::VectorXf neg = -e.values();
  EXPECT_THROW(fuse_embeddings(e, Embedding::from_unit(neg), e, {}), Error);
}

TEST(Fusion, OnlyLocalWeightReturnsLocal) {
  const auto a = test::basis(4, 0), b = test::basis(4, 1);
  EXPECT_EQ(fuse_embeddings(a, b, a, {0.0, 1.0, 0.0}), b);
}

TEST(PointFeatureMap, SplatsToNearestWithinDistance) {
  PointFeatureMap map(PointCloud({Point3(0, 0, 0), Point3(1, 0, 0)}), 4);
  map.splat(PointCloud({Point3(0.01f, 0, 0), Point3(0.5f, 0, 0), Point3(0.99f, 0, 0)}), test::basis(4, 0), 0.05);
  map.splat(PointCloud({Point3(0.0f, 0.02f, 0)}), test::basis(4, 1), 0.05);
  EXPECT_EQ(map.count(0), 2u);
  EXPECT_EQ(map.count(1), 1u);
  map.finalize();
  const auto f0 = map.feature(0).values();
  EXPECT_NEAR(f0[0], std::sqrt(0.5), 1e-6);
  EXPECT_NEAR(f0[1], std::sqrt(0.5), 1e-6);
  EXPECT_EQ(map.feature(1), test::basis(4, 0));
  EXPECT_EQ(map.featured_count(), 2u);
}

TEST(PointFeatureMap, StatesAfterFinalize) {
  PointFeatureMap map(PointCloud({Point3(0, 0, 0), Point3(1, 0, 0), Point3(2, 0, 0)}), 2);
  const auto e = test::basis(2, 0);
  Eigen::VectorXf neg = -e.values();
  map.splat(PointCloud({Point3(0, 0, 0)}), e, 0.1);
  map.splat(PointCloud({Point3(1, 0, 0)}), e, 0.1);
  map.splat(PointCloud({Point3(1, 0, 0)}), Embedding::from_unit(neg), 0.1);
  map.finalize();
  EXPECT_EQ(map.state(0), PointFeatureState::kFeatured);
  EXPECT_EQ(map.state(1), PointFeatureState::kDegenerate);
  EXPECT_EQ(map.state(2), PointFeatureState::kFeatureless);
  EXPECT_THROW(map.feature(2), Error);
  EXPECT_THROW(map.splat(PointCloud({Point3(0, 0, 0)}), e, 0.1), Error);
}

TEST(DensityCluster, MatchesTextbookDbscan) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Embedding> f;
    const int centers = 1 + trial % 4;
    for (int i = 0; i < 30; ++i) f.push_back(test::near_axis(rng, 6, i % centers, 0.15 + 0.01 * (trial % 10)));
    for (int i = 0; i < 5; ++i) f.push_back(test::random_unit(rng, 6));
    std::vector<Eigen::VectorXd> x;
    for (const auto& e : f) x.push_back(e.values().cast<double>());
    EXPECT_EQ(density_cluster(f, 0.2, 4), oracle::dbscan(x, 0.2, 4)) << "trial " << trial;
  }
}

TEST(DensityCluster, WeightsActAsCopies) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Embedding> f;
    std::vector<double> w;
    std::vector<Embedding> expanded;
    std::vector<std::size_t> first_copy;
    for (int i = 0; i < 12; ++i) {
      f.push_back(test::near_axis(rng, 4, i % 2, 0.2));
      w.push_back(1 + static_cast<int>(rng() % 3));
      first_copy.push_back(expanded.size());
      for (int c = 0; c < w.back(); ++c) expanded.push_back(f.back());
    }
    const auto weighted = density_cluster(f, w, 0.15, 4);
    const auto copies = density_cluster(expanded, 0.15, 4);
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_EQ(weighted[i] < 0, copies[first_copy[i]] < 0);
    }
  }
}

TEST(RepresentativeFeature, OutliersDoNotMoveTheChoice) {
  std::mt19937_64 rng(24);
  const auto e1 = test::basis(16, 0);
  int mean_failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Embedding> f;
    for (int i = 0; i < 20; ++i) f.push_back(test::near_axis(rng, 16, 0, 0.05));
    const int outliers = trial % 6;
    for (int i = 0; i < outliers; ++i) f.push_back(test::basis(16, 1 + trial % 3));
    const std::vector<double> w(f.size(), 1.0);
    SegmentFeatureParams p;
    EXPECT_GE(representative_feature(f, w, p).cosine(e1), 0.99);
    p.use_clustering = false;
    mean_failures += representative_feature(f, w, p).cosine(e1) < 0.99;
  }
  EXPECT_GE(mean_failures, 15);
}

TEST(RepresentativeFeature, AllNoiseFallsBackToClosestToMean) {
  const std::vector<Embedding> f{test::basis(3, 0), test::basis(3, 1), test::tilted(3, 0, 1, 0.8)};
  const std::vector<double> w{1, 1, 1};
  EXPECT_EQ(representative_feature(f, w, {}), f[2]);
}

TEST(RepresentativeFeature, EqualClustersPickLowestIndex) {
  std::vector<Embedding> f;
  for (int i = 0; i < 5; ++i) f.push_back(test::basis(3, 1));
  for (int i = 0; i < 5; ++i) f.push_back(test::basis(3, 0));
  const std::vector<double> w(f.size(), 1.0);
  EXPECT_EQ(representative_feature(f, w, {}), test::basis(3, 1));
}

TEST(SegmentFeature, GathersNearestReferenceFeatures) {
  const auto ref = test::plane(0, 1, 0, 1, 0, 0.1);
  PointFeatureMap map(ref, 4);
  map.splat(ref, test::basis(4, 2), 0.01);
  map.finalize();
  EXPECT_EQ(segment_feature(test::plane(0, 0.5, 0, 0.5, 0.01, 0.1), map, {}), test::basis(4, 2));

  PointFeatureMap empty(ref, 4);
  empty.finalize();
  EXPECT_THROW(segment_feature(ref, empty, {}), Error);
}
