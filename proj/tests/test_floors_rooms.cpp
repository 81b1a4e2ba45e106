#include "hsg/hierarchy.hpp"
#include "hsg/metrics.hpp"
#include "hsg/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace hsg;

namespace {

// Two 4 x 4 m rooms side by side, split by a wall at x = 4 with a 0.8 m door
// (topped by a lintel from 2.0 m).
PointCloud two_room_cloud() {
  PointCloud c = test::plane(0, 8, 0, 4, 0.0, 0.05);
  c.append(test::plane(0, 8, 0, 4, 2.8, 0.05));
  c.append(test::wall(0, 0, 8, 0, 0, 2.8, 0.05));
  c.append(test::wall(0, 4, 8, 4, 0, 2.8, 0.05));
  c.append(test::wall(0, 0, 0, 4, 0, 2.8, 0.05));
  c.append(test::wall(8, 0, 8, 4, 0, 2.8, 0.05));
  c.append(test::wall(4, 0, 4, 1.6, 0, 2.8, 0.05));
  c.append(test::wall(4, 2.4, 4, 4, 0, 2.8, 0.05));
  c.append(test::wall(4, 1.6, 4, 2.4, 2.0, 2.8, 0.05));
  return c;
}

MaskGrid random_mask(std::mt19937_64& rng, int w, int h, double p) {
  MaskGrid m(GridFrame{0, 0, 0.1, w, h}, 0);
  std::bernoulli_distribution b(p);
  for (auto& v : m.cells) v = b(rng);
  return m;
}

}  // namespace

TEST(Floors, TextIsOneBased) {
  EXPECT_EQ(floor_text(0), "floor 1");
  EXPECT_EQ(floor_text(2), "floor 3");
}

TEST(Floors, SingleSlabPairFound) {
  const auto c = two_room_cloud();
  const auto floors = segment_floors(c);
  ASSERT_EQ(floors.size(), 1u);
  EXPECT_NEAR(floors[0].z_floor, 0.0, 0.02);
  EXPECT_NEAR(floors[0].z_ceiling, 2.8, 0.02);
}

TEST(Floors, RandomBuildingsMatchGroundTruth) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto spec = synth::random_building(seed, 1 + static_cast<int>(seed % 3));
    const auto gt = synth::ground_truth(spec);
    const auto floors = segment_floors(gt.cloud);
    ASSERT_EQ(floors.size(), gt.floors.size()) << "seed " << seed;
    for (std::size_t i = 0; i < floors.size(); ++i) {
      EXPECT_NEAR(floors[i].z_floor, gt.floors[i].z_floor, 0.05);
      EXPECT_NEAR(floors[i].z_ceiling, gt.floors[i].z_ceiling, 0.05);
    }
  }
}

TEST(Floors, EmptyAndFlatInputsThrow) {
  EXPECT_THROW(segment_floors(PointCloud{}), Error);
  EXPECT_THROW(segment_floors(test::plane(0, 1, 0, 1, 0, 0.05)), Error);
}

TEST(Floors, CropAndNearest) {
  const PointCloud c({Point3(0, 0, 0.5f), Point3(0, 0, 1.5f), Point3(0, 0, 2.5f)});
  EXPECT_EQ(crop_height(c, 1.0, 2.0).size(), 1u);
  const std::vector<FloorInterval> floors{{0.0, 2.8}, {3.1, 5.9}};
  EXPECT_EQ(nearest_floor(floors, 1.0), 0);
  EXPECT_EQ(nearest_floor(floors, 3.0), 1);
  EXPECT_EQ(nearest_floor(floors, 9.0), 1);
  EXPECT_EQ(nearest_floor(floors, 2.9), 0);
}

TEST(Grid, DistanceFieldMatchesBruteForce) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_mask(rng, 17 + trial, 23, 0.05);
    const auto d = distance_field(m);
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (int v = 0; v < m.height(); ++v) {
          for (int u = 0; u < m.width(); ++u) {
            if (m.at(u, v)) best = std::min(best, std::hypot(u - x, v - y) * 0.1);
          }
        }
        EXPECT_NEAR(d.at(x, y), best, 1e-5);
      }
    }
  }
}

TEST(Grid, DistanceFieldWithoutSourcesIsInfinite) {
  const MaskGrid m(GridFrame{0, 0, 0.1, 3, 3}, 0);
  for (float v : distance_field(m).cells) EXPECT_TRUE(std::isinf(v));
}

TEST(Grid, DilateIsDiskMinkowskiSum) {
  std::mt19937_64 rng(32);
  const auto m = random_mask(rng, 20, 15, 0.03);
  const auto out = dilate(m, 2);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool expect = false;
      for (int v = 0; v < m.height(); ++v) {
        for (int u = 0; u < m.width(); ++u) expect = expect || (m.at(u, v) && (u - x) * (u - x) + (v - y) * (v - y) <= 4);
      }
      EXPECT_EQ(out.at(x, y) != 0, expect);
    }
  }
}

TEST(Grid, ConnectedComponentsFourConnected) {
  MaskGrid m(GridFrame{0, 0, 1, 4, 3}, 0);
  // 1 1 0 1
  // 0 1 0 1
  // 1 0 0 0
  m.at(0, 0) = m.at(1, 0) = m.at(3, 0) = m.at(1, 1) = m.at(3, 1) = m.at(0, 2) = 1;
  const auto l = connected_components(m);
  EXPECT_EQ(l.at(0, 0), 0);
  EXPECT_EQ(l.at(1, 1), 0);
  EXPECT_EQ(l.at(3, 0), 1);
  EXPECT_EQ(l.at(3, 1), 1);
  EXPECT_EQ(l.at(0, 2), 2);
  EXPECT_EQ(l.at(2, 2), -1);
}

TEST(Grid, WatershedMatchesFrontierFlood) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<float> f(0.0f, 3.0f);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = 5 + static_cast<int>(rng() % 46), h = 5 + static_cast<int>(rng() % 46);
    const GridFrame frame{0, 0, 0.05, w, h};
    const auto walls = random_mask(rng, w, h, 0.2);
    MaskGrid walls_f(frame, 0);
    walls_f.cells = walls.cells;
    FieldGrid field(frame, 0.0f);
    // Quantized so that ties occur.
    for (auto& v : field.cells) v = std::round(f(rng) * 2.0f) / 2.0f;
    LabelGrid seeds(frame, -1);
    for (int s = 0; s < 4; ++s) {
      const std::size_t i = rng() % seeds.cells.size();
      if (!walls_f[i]) seeds[i] = s;
    }
    const auto got = watershed(field, seeds, walls_f);
    const auto expected = oracle::flood(w, h, field.cells, seeds.cells, walls_f.cells);
    EXPECT_EQ(got.cells, expected) << "trial " << trial;
  }
}

TEST(Grid, WatershedSeedOnWallThrows) {
  const GridFrame frame{0, 0, 1, 2, 2};
  MaskGrid walls(frame, 0);
  walls[0] = 1;
  LabelGrid seeds(frame, -1);
  seeds[0] = 0;
  EXPECT_THROW(watershed(FieldGrid(frame, 0.0f), seeds, walls), Error);
}

TEST(Rooms, DoorSplitsTwoRooms) {
  const auto c = two_room_cloud();
  const auto seg = segment_rooms(c, {0.0, 2.8});
  ASSERT_EQ(seg.clouds.size(), 2u);
  const std::vector<PointCloud> gt{crop_height(test::plane(0, 4, 0, 4, 0, 0.05), -1, 1),
                                   crop_height(test::plane(4, 8, 0, 4, 0, 0.05), -1, 1)};
  std::vector<PointCloud> pred;
  for (const auto& r : seg.clouds) pred.push_back(crop_height(r, -0.1, 0.1));
  const auto pr = region_pr(pred, gt, 0.1);
  EXPECT_GE(pr.precision, 0.9);
  EXPECT_GE(pr.recall, 0.9);
}

TEST(Rooms, OpenHallIsOneRoom) {
  PointCloud c = test::plane(0, 6, 0, 4, 0.0, 0.05);
  c.append(test::wall(0, 0, 6, 0, 0, 2.8, 0.05));
  c.append(test::wall(0, 4, 6, 4, 0, 2.8, 0.05));
  c.append(test::wall(0, 0, 0, 4, 0, 2.8, 0.05));
  c.append(test::wall(6, 0, 6, 4, 0, 2.8, 0.05));
  EXPECT_EQ(segment_rooms(c, {0.0, 2.8}).clouds.size(), 1u);
}

TEST(Rooms, InvalidIntervalThrows) {
  EXPECT_THROW(segment_rooms(two_room_cloud(), {2.0, 1.0}), Error);
  EXPECT_THROW(segment_rooms(PointCloud{}, {0.0, 1.0}), Error);
}
