#include "hsg/hierarchy.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace hsg;

namespace {

RoomNode box_room(int id, int floor, double x0, double x1) {
  RoomNode r;
  r.id = id;
  r.floor_index = floor;
  r.mask = MaskGrid(GridFrame{0, 0, 0.5, 16, 8}, 0);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 16; ++x) {
      const double cx = (x + 0.5) * 0.5;
      if (cx >= x0 && cx < x1) r.mask.at(x, y) = 1;
    }
  }
  return r;
}

std::vector<LabelledEmbedding> labels(int dim, std::initializer_list<std::string> names) {
  std::vector<LabelledEmbedding> out;
  int axis = 0;
  for (const auto& n : names) out.push_back({n, test::basis(dim, axis++)});
  return out;
}

ObjectCandidate candidate(const PointCloud& cloud, const Embedding& f, int room) {
  ObjectCandidate c;
  c.cloud = cloud;
  c.feature = f;
  c.room_id = room;
  return c;
}

}  // namespace

TEST(RoomSemantics, ViewsFollowMaskAndFloor) {
  const std::vector<RoomNode> rooms{box_room(0, 0, 0, 4), box_room(1, 0, 4, 8), box_room(2, 1, 0, 8)};
  const std::vector<FloorInterval> floors{{0.0, 2.8}, {3.0, 5.8}};
  const std::vector<Pose> poses{Pose::from_xyz_yaw(1, 1, 1.5, 0), Pose::from_xyz_yaw(6, 1, 1.5, 0),
                                Pose::from_xyz_yaw(6, 1, 4.5, 0), Pose::from_xyz_yaw(20, 1, 1.5, 0),
                                Pose::from_xyz_yaw(1, 1, 2.9, 0)};
  const auto v = assign_views(poses, rooms, floors);
  EXPECT_EQ(v[0], std::vector<std::size_t>{0});
  EXPECT_EQ(v[1], std::vector<std::size_t>{1});
  EXPECT_EQ(v[2], std::vector<std::size_t>{2});
}

TEST(RoomSemantics, FewViewsReturnedAsIs) {
  const std::vector<Embedding> v{test::basis(4, 0), test::basis(4, 1)};
  EXPECT_EQ(representative_view_embeddings(v, 5), v);
  EXPECT_THROW(representative_view_embeddings(v, 0), Error);
}

TEST(RoomSemantics, KMeansRecoversClusters) {
  std::mt19937_64 rng(41);
  std::vector<Embedding> views;
  std::normal_distribution<double> g(0.0, 0.05);
  for (int i = 0; i < 60; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
    v[i % 3] = 1.0;
    for (int d = 0; d < 8; ++d) v[d] += g(rng);
    views.push_back(Embedding::normalized(v));
  }
  const auto reps = representative_view_embeddings(views, 3, 7);
  ASSERT_EQ(reps.size(), 3u);
  std::vector<int> hit(3, 0);
  for (const auto& r : reps) {
    int axis = 0;
    r.values().maxCoeff(&axis);
    ASSERT_LT(axis, 3);
    EXPECT_GE(r.cosine(test::basis(8, axis)), 0.95);
    ++hit[axis];
  }
  EXPECT_EQ(hit, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(representative_view_embeddings(views, 3, 7), reps);
}

TEST(RoomSemantics, MaxAndMajorityVotesDiffer) {
  const auto cats = labels(4, {"bathroom", "kitchen", "office"});
  const std::vector<Embedding> reps{test::tilted(4, 0, 3, 0.6), test::tilted(4, 0, 3, 0.65),
                                    test::tilted(4, 1, 3, 0.95)};
  EXPECT_EQ(classify_room(reps, cats, VoteMode::kMax), "kitchen");
  EXPECT_EQ(classify_room(reps, cats, VoteMode::kMajority), "bathroom");
  EXPECT_EQ(classify_room({}, cats, VoteMode::kMax), "");
  EXPECT_THROW(classify_room(reps, {}, VoteMode::kMax), Error);
}

TEST(RoomSemantics, MajorityTieGoesToStrongerLabel) {
  const auto cats = labels(4, {"bathroom", "kitchen"});
  const std::vector<Embedding> reps{test::tilted(4, 0, 3, 0.6), test::tilted(4, 1, 3, 0.9)};
  EXPECT_EQ(classify_room(reps, cats, VoteMode::kMajority), "kitchen");
}

TEST(Objects, Top1TiesToLowerIndex) {
  const auto cats = labels(4, {"a", "b"});
  const auto f = Embedding::normalized(Eigen::VectorXd((Eigen::VectorXd(4) << 1, 1, 0, 0).finished()));
  EXPECT_EQ(top1_label(f, cats), 0u);
  EXPECT_EQ(top1_label(test::basis(4, 1), cats), 1u);
}

TEST(Objects, AssignByMaskThenNearestCentroid) {
  const std::vector<RoomNode> rooms{box_room(0, 0, 0, 4), box_room(1, 0, 4, 8)};
  const std::vector<FloorInterval> floors{{0.0, 2.8}};
  const auto e = test::basis(4, 0);
  std::vector<ObjectCandidate> objs;
  // Mostly in room 1, straddling the boundary.
  PointCloud straddle = test::plane(3.5, 6, 1, 2, 0.5, 0.1);
  objs.push_back(candidate(straddle, e, -1));
  // Outside both masks but nearer room 0.
  objs.push_back(candidate(PointCloud({Point3(1, 9, 1)}), e, -1));
  const auto a = assign_objects(objs, rooms, floors);
  EXPECT_EQ(a, (std::vector<int>{1, 0}));
}

TEST(Objects, MergeSameLabelOnly) {
  const auto cats = labels(4, {"chair", "table"});
  const auto chair = test::tilted(4, 0, 2, 0.9);
  const auto chair2 = test::tilted(4, 0, 3, 0.9);
  const auto table = test::basis(4, 1);
  const auto a = test::plane(0, 1, 0, 1, 0.5, 0.05);
  PointCloud b = test::plane(0.1, 1.1, 0, 1, 0.5, 0.05);
  std::vector<ObjectCandidate> objs{candidate(a, chair, 0), candidate(b, chair2, 0), candidate(a, table, 0),
                                    candidate(a, chair, 1)};
  const auto out = merge_same_label_objects(objs, cats, 0.025, 0.4);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].label, "chair");
  EXPECT_EQ(out[0].room_id, 0);
  EXPECT_GT(out[0].cloud.size(), a.size());
  const Eigen::VectorXd mean = static_cast<double>(a.size()) * chair.values().cast<double>() +
                               static_cast<double>(b.size()) * chair2.values().cast<double>();
  EXPECT_NEAR(out[0].feature.cosine(Embedding::normalized(mean)), 1.0, 1e-6);
  EXPECT_EQ(out[1].label, "table");
  EXPECT_EQ(out[2].room_id, 1);
}

TEST(Objects, StairRunsAreMaximal) {
  const std::vector<std::uint8_t> flags{0, 1, 1, 0, 1, 0, 0, 1};
  const auto runs = stair_runs(flags);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[0], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(runs[2], (std::vector<std::size_t>{7}));
}

TEST(Objects, StairFramesOutsideRoomsOrInStairRooms) {
  std::vector<RoomNode> rooms{box_room(0, 0, 0, 4), box_room(1, 0, 4, 8)};
  rooms[1].category = "stairs";
  const std::vector<FloorInterval> floors{{0.0, 2.8}};
  const std::vector<Pose> poses{Pose::from_xyz_yaw(1, 1, 1.5, 0), Pose::from_xyz_yaw(6, 1, 1.5, 0),
                                Pose::from_xyz_yaw(1, 1, 3.5, 0)};
  const std::vector<std::string> stair_labels{"stairs"};
  EXPECT_EQ(infer_stair_frames(poses, rooms, floors, stair_labels), (std::vector<std::uint8_t>{0, 1, 1}));
}
