#include "hsg/io.hpp"
#include "hsg/metrics.hpp"
#include "hsg/pipeline.hpp"
#include "hsg/synth.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace hsg;

namespace {

struct Built {
  synth::SynthScene scene;
  std::vector<FrameRecord> frames;
  Config config;
  BuildResult result;
};

const Built& four_rooms() {
  static const Built built = [] {
    Built b;
    auto spec = synth::four_room_scene();
    spec.frame_stride = 4;
    b.scene = synth::generate(spec);
    for (const auto& f : b.scene.frames) b.frames.push_back(f.record);
    b.config = synth::scene_config(b.scene);
    b.result = build_from_frames(b.frames, b.config, *b.scene.embedder);
    return b;
  }();
  return built;
}

}  // namespace

TEST(Pipeline, FusedEmbeddingPerMask) {
  const auto& b = four_rooms();
  const auto fused = fuse_frames(b.frames, b.config.fusion);
  ASSERT_EQ(fused.size(), b.frames.size());
  for (std::size_t i = 0; i < fused.size(); ++i) EXPECT_EQ(fused[i].size(), b.frames[i].masks.size());
}

TEST(Pipeline, FourRoomHierarchy) {
  const auto& b = four_rooms();
  const auto& g = b.result.graph;
  EXPECT_NO_THROW(g.validate());
  ASSERT_EQ(g.floors.size(), 1u);
  ASSERT_EQ(g.rooms.size(), 4u);
  EXPECT_EQ(g.floors[0].index, 0);
  EXPECT_EQ(g.root_floor_edges(), std::vector<int>{0});
  EXPECT_EQ(g.floor_room_edges().size(), 4u);
  EXPECT_EQ(g.room_object_edges().size(), g.objects.size());
  EXPECT_EQ(g.rooms_on_floor(0).size(), 4u);

  // Every GT room is recovered with its category.
  for (const auto& gt_room : b.scene.gt.rooms) {
    const double cx = 0.5 * (gt_room.rect.x0 + gt_room.rect.x1);
    const double cy = 0.5 * (gt_room.rect.y0 + gt_room.rect.y1);
    int found = -1;
    for (const auto& r : g.rooms) {
      const auto idx = r.mask.frame.index_of(cx, cy);
      if (idx && r.mask[*idx]) found = r.id;
    }
    ASSERT_GE(found, 0) << gt_room.category;
    EXPECT_EQ(g.rooms[found].category, gt_room.category);
  }
}

TEST(Pipeline, ObjectsMatchGroundTruth) {
  const auto& b = four_rooms();
  const auto& g = b.result.graph;
  std::vector<PointCloud> pred, gt;
  for (const auto& o : g.objects) pred.push_back(o.cloud);
  for (const auto& o : b.scene.gt.objects) gt.push_back(o.cloud);
  const auto match = match_objects(pred, gt, 0.05, 0.1);
  std::vector<int> hit(gt.size(), 0);
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] < 0) continue;
    ++hit[match[i]];
    EXPECT_EQ(g.objects[i].top1_label, b.scene.gt.objects[match[i]].category);
  }
  for (std::size_t j = 0; j < gt.size(); ++j) EXPECT_EQ(hit[j], 1) << b.scene.gt.objects[j].category;
}

TEST(Pipeline, NavigationIsConnected) {
  const auto& b = four_rooms();
  const auto& g = b.result.graph;
  EXPECT_FALSE(g.nav.empty());
  EXPECT_EQ(g.nav.component_count(), 1);
  ASSERT_EQ(g.free_space.size(), 1u);
  for (const auto& n : g.nav.nodes()) EXPECT_TRUE(g.free_space[0].is_free(n.position.x(), n.position.y()));
}

TEST(Pipeline, BuildIsDeterministic) {
  const auto& b = four_rooms();
  const auto again = build_from_frames(b.frames, b.config, *b.scene.embedder);
  std::ostringstream x, y;
  save_graph(x, b.result.graph);
  save_graph(y, again.graph);
  EXPECT_EQ(x.str(), y.str());
}

TEST(Pipeline, CompactnessAgainstDenseMap) {
  const auto& b = four_rooms();
  ASSERT_TRUE(b.result.dense);
  const auto report = representation_size(b.result.graph, *b.result.dense);
  EXPECT_GT(report.dense_bytes, 0u);
  EXPECT_LT(report.ratio, 1.0);
}

TEST(SceneGraph, ValidateCatchesBrokenReferences) {
  auto g = four_rooms().result.graph;
  g.objects[0].room_id = 99;
  EXPECT_THROW(g.validate(), Error);
  g = four_rooms().result.graph;
  g.rooms[0].floor_index = 3;
  EXPECT_THROW(g.validate(), Error);
  g = four_rooms().result.graph;
  g.floors[0].interval = {1.0, 1.0};
  EXPECT_THROW(g.validate(), Error);
}

TEST(Pipeline, EmptyInputThrows) {
  const auto& b = four_rooms();
  EXPECT_THROW(build_from_frames(std::vector<FrameRecord>{}, b.config, *b.scene.embedder), Error);
}
