#include "hsg/synth.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace hsg;
namespace fs = std::filesystem;

TEST(SceneSpec, PresetsAreValid) {
  EXPECT_TRUE(synth::two_floor_scene().validate().empty());
  EXPECT_TRUE(synth::four_room_scene().validate().empty());
}

TEST(SceneSpec, ValidationCatchesBadInput) {
  auto s = synth::four_room_scene();
  s.spacing = 0.0;
  EXPECT_FALSE(s.validate().empty());
  s = synth::four_room_scene();
  s.floors[0].rooms[1].rect.x0 = 3.0;  // overlaps room 0
  EXPECT_FALSE(s.validate().empty());
  s = synth::four_room_scene();
  s.floors.push_back(s.floors[0]);  // second floor without stairs
  EXPECT_FALSE(s.validate().empty());
  s = synth::four_room_scene();
  s.floors[0].rooms[3].rect = {10.0, 10.0, 13.0, 13.0};  // unreachable room
  EXPECT_FALSE(s.validate().empty());
  EXPECT_THROW(synth::generate(s), Error);
}

TEST(SceneSpec, JsonRoundTrip) {
  auto s = synth::two_floor_scene();
  s.sigma = 0.2;
  s.frame_stride = 3;
  const auto back = synth::parse_scene_spec(synth::scene_spec_json(s));
  EXPECT_EQ(synth::scene_spec_json(back), synth::scene_spec_json(s));
  EXPECT_EQ(back.floors.size(), 2u);
  EXPECT_TRUE(back.stairwell.has_value());
  EXPECT_THROW(synth::parse_scene_spec(R"({"floors": [], "unknown": 1})"), Error);
}

TEST(SynthEmbedder, OrthogonalVocabularyAndPrompt) {
  const synth::SynthEmbedder e({"chair", "table", "sofa"}, 8, 1);
  EXPECT_NEAR(e.encode("chair").cosine(e.encode("table")), 0.0, 1e-6);
  EXPECT_NEAR(e.encode("There is the chair in the scene.").cosine(e.encode("chair")), 1.0, 1e-6);
  EXPECT_NEAR(e.encode("CHAIR").cosine(e.encode("chair")), 1.0, 1e-6);
  EXPECT_EQ(e.encode("chair"), synth::SynthEmbedder({"chair", "table", "sofa"}, 8, 1).encode("chair"));
}

TEST(SynthEmbedder, CrowdedVocabularyStaysSeparated) {
  std::vector<std::string> vocab;
  for (int i = 0; i < 40; ++i) vocab.push_back("w" + std::to_string(i));
  const synth::SynthEmbedder e(vocab, 16, 2);
  for (int i = 0; i < 40; ++i) {
    for (int j = i + 1; j < 40; ++j) EXPECT_LE(e.encode(vocab[i]).cosine(e.encode(vocab[j])), 0.3 + 1e-6);
  }
}

TEST(SynthEmbedder, NoiseNormMatchesSigma) {
  const synth::SynthEmbedder e({"chair"}, 64, 3);
  std::mt19937_64 rng(4);
  double mean_cos = 0.0;
  for (int i = 0; i < 200; ++i) mean_cos += e.noisy("chair", 0.3, rng).cosine(e.encode("chair"));
  mean_cos /= 200;
  // cos = 1 / sqrt(1 + sigma^2) for noise orthogonal to the label vector.
  EXPECT_NEAR(mean_cos, 1.0 / std::sqrt(1.09), 0.01);
  std::mt19937_64 zero(5);
  EXPECT_NEAR(e.noisy("chair", 0.0, zero).cosine(e.encode("chair")), 1.0, 1e-6);
}

TEST(GroundTruth, GeometryAndLabelsConsistent) {
  const auto spec = synth::two_floor_scene();
  const auto gt = synth::ground_truth(spec);
  ASSERT_EQ(gt.floors.size(), 2u);
  EXPECT_DOUBLE_EQ(gt.floors[0].z_floor, spec.base_z);
  EXPECT_DOUBLE_EQ(gt.floors[0].z_ceiling, spec.base_z + spec.floors[0].height);
  EXPECT_DOUBLE_EQ(gt.floors[1].z_floor, gt.floors[0].z_ceiling + spec.slab);
  EXPECT_EQ(gt.labels.size(), gt.cloud.size());
  EXPECT_EQ(gt.point_objects.size(), gt.cloud.size());
  EXPECT_EQ(gt.objects.size(), 12u);
  for (const auto& o : gt.objects) {
    ASSERT_FALSE(o.cloud.empty());
    for (const auto& p : o.cloud.points) {
      EXPECT_GE(p.x(), o.lo.x() - 0.05);
      EXPECT_LE(p.x(), o.hi.x() + 0.05);
      EXPECT_GE(p.z(), o.lo.z() - 0.05);
      EXPECT_LE(p.z(), o.hi.z() + 0.05);
    }
  }
  int door_count = 0;
  for (const auto& d : gt.doors) door_count += d.room_a >= 0 && d.room_b >= 0;
  EXPECT_GE(door_count, 2);
}

TEST(Generate, DeterministicAndStrided) {
  auto spec = synth::four_room_scene();
  spec.frame_stride = 5;
  const auto a = synth::generate(spec);
  const auto b = synth::generate(spec);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) EXPECT_EQ(a.frames[i].record, b.frames[i].record);
  EXPECT_EQ(a.frames.size(), (a.trajectory.size() + 4) / 5);
  spec.frame_stride = 10;
  EXPECT_LT(synth::generate(spec).frames.size(), a.frames.size());
}

TEST(Generate, TrajectoryVisitsEveryRoom) {
  const auto scene = synth::generate(synth::two_floor_scene(), {false});
  EXPECT_TRUE(scene.frames.empty());
  std::vector<int> visits(scene.gt.rooms.size(), 0);
  for (const auto& pose : scene.trajectory) {
    const auto& t = pose.translation;
    for (std::size_t r = 0; r < scene.gt.rooms.size(); ++r) {
      const auto& room = scene.gt.rooms[r];
      if (room.rect.interior(t.x(), t.y()) && scene.gt.floors[room.floor].contains(t.z())) ++visits[r];
    }
  }
  for (std::size_t r = 0; r < visits.size(); ++r) EXPECT_GT(visits[r], 0) << "room " << r;
  bool climbs = false;
  for (auto s : scene.trajectory_stairs) climbs = climbs || s;
  EXPECT_TRUE(climbs);
}

TEST(Generate, MasksCarryLabelsAndPoints) {
  auto spec = synth::four_room_scene();
  spec.frame_stride = 20;
  const auto scene = synth::generate(spec);
  ASSERT_FALSE(scene.frames.empty());
  std::size_t masks = 0;
  for (const auto& f : scene.frames) {
    EXPECT_EQ(f.mask_labels.size(), f.record.masks.size());
    EXPECT_EQ(f.record.global.dim(), spec.dim);
    for (const auto& m : f.record.masks) EXPECT_FALSE(m.points.empty());
    masks += f.record.masks.size();
  }
  EXPECT_GT(masks, scene.frames.size());
}

TEST(RandomBuilding, FloorCountsAndValidity) {
  for (std::uint64_t seed = 0; seed < 9; ++seed) {
    const int floors = 1 + static_cast<int>(seed % 3);
    const auto spec = synth::random_building(seed, floors);
    EXPECT_EQ(static_cast<int>(spec.floors.size()), floors);
    EXPECT_TRUE(spec.validate().empty());
    for (const auto& f : spec.floors) {
      EXPECT_GE(f.rooms.size(), 2u);
      EXPECT_LE(f.rooms.size(), 6u);
    }
  }
  EXPECT_THROW(synth::random_building(0, 4), Error);
}

TEST(Dataset, WriteAndReloadGroundTruth) {
  auto spec = synth::four_room_scene();
  spec.frame_stride = 25;
  const auto scene = synth::generate(spec);
  const auto dir = fs::temp_directory_path() / "hsg_test_dataset";
  fs::remove_all(dir);
  synth::write_dataset(scene, dir);
  EXPECT_TRUE(fs::exists(dir / "config.json"));
  EXPECT_EQ(list_frame_files(dir / "frames").size(), scene.frames.size());
  const auto gt = synth::load_ground_truth(dir);
  EXPECT_EQ(gt.floors, scene.gt.floors);
  EXPECT_EQ(gt.cloud.points, scene.gt.cloud.points);
  EXPECT_EQ(gt.labels, scene.gt.labels);
  ASSERT_EQ(gt.rooms.size(), scene.gt.rooms.size());
  for (std::size_t r = 0; r < gt.rooms.size(); ++r) EXPECT_EQ(gt.rooms[r].cloud.size(), scene.gt.rooms[r].cloud.size());
  ASSERT_EQ(gt.objects.size(), scene.gt.objects.size());
  for (std::size_t o = 0; o < gt.objects.size(); ++o) EXPECT_EQ(gt.objects[o].category, scene.gt.objects[o].category);
  fs::remove_all(dir);
}
