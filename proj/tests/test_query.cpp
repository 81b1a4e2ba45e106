#include "hsg/query.hpp"
#include "hsg/synth.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace hsg;

namespace {

struct Fixture {
  std::shared_ptr<synth::SynthEmbedder> enc;
  SceneGraph graph;
};

// Two floors with a bathroom and a kitchen each. Both bathrooms hold a
// toilet; the kitchens hold a sink and a fridge.
Fixture make_graph() {
  Fixture f;
  f.enc = std::make_shared<synth::SynthEmbedder>(
      std::vector<std::string>{"floor 1", "floor 2", "bathroom", "kitchen", "toilet", "sink", "fridge"}, 16, 3);
  auto& g = f.graph;
  g.dim = 16;
  for (int i = 0; i < 2; ++i) {
    FloorNode fl;
    fl.index = i;
    fl.interval = {i * 3.0, i * 3.0 + 2.8};
    fl.text_embedding = floor_text_embedding(i, *f.enc);
    g.floors.push_back(fl);
  }
  const std::vector<std::pair<int, std::string>> rooms{{0, "bathroom"}, {0, "kitchen"}, {1, "bathroom"}, {1, "kitchen"}};
  for (const auto& [floor, cat] : rooms) {
    RoomNode r;
    r.id = static_cast<int>(g.rooms.size());
    r.floor_index = floor;
    r.category = cat;
    r.view_embeddings = {category_embedding(*f.enc, cat)};
    g.rooms.push_back(r);
  }
  const std::vector<std::pair<int, std::string>> objects{
      {0, "toilet"}, {1, "sink"}, {1, "fridge"}, {2, "toilet"}, {3, "sink"}};
  for (const auto& [room, cat] : objects) {
    ObjectNode o;
    o.id = static_cast<int>(g.objects.size());
    o.room_id = room;
    o.cloud = PointCloud({Point3(0, 0, 0)});
    o.feature = category_embedding(*f.enc, cat);
    o.top1_label = cat;
    g.objects.push_back(o);
  }
  g.validate();
  return f;
}

}  // namespace

TEST(ParseQuery, GrammarForms) {
  EXPECT_EQ(parse_query("toilet"), (ParsedQuery{"toilet", std::nullopt, std::nullopt}));
  EXPECT_EQ(parse_query("Find the toilet in the bathroom on floor 2."),
            (ParsedQuery{"toilet", "bathroom", "floor 2"}));
  EXPECT_EQ(parse_query("show me a sink on floor 1"), (ParsedQuery{"sink", std::nullopt, "floor 1"}));
  EXPECT_EQ(parse_query("coffee table in living room"), (ParsedQuery{"coffee table", "living room", std::nullopt}));
  EXPECT_EQ(parse_query("go to floor 3"), (ParsedQuery{"", std::nullopt, "floor 3"}));
  EXPECT_EQ(parse_query("navigate to the kitchen on floor 2"), (ParsedQuery{"", "kitchen", "floor 2"}));
  EXPECT_THROW(parse_query("  ?  "), Error);
}

TEST(ParseQuery, UnparseableTextIsTheObject) {
  EXPECT_EQ(parse_query("in the"), (ParsedQuery{"in the", std::nullopt, std::nullopt}));
  EXPECT_EQ(parse_query("chair by floor 2"), (ParsedQuery{"chair by floor 2", std::nullopt, std::nullopt}));
}

TEST(ParseQuery, FormatRoundTrip) {
  const std::vector<ParsedQuery> qs{{"toilet", "bathroom", "floor 2"}, {"sink", std::nullopt, "floor 1"},
                                    {"bed", "bedroom", std::nullopt},   {"", std::nullopt, "floor 4"},
                                    {"", "kitchen", "floor 1"},         {"tv", std::nullopt, std::nullopt}};
  for (const auto& q : qs) EXPECT_EQ(parse_query(format_query(q)), q) << format_query(q);
}

TEST(ExternalDecomposer, ReadsThreeLines) {
  const ExternalDecomposer d("cat >/dev/null; printf 'toilet\\nbathroom\\n2\\n'");
  EXPECT_EQ(d.decompose("whatever"), (ParsedQuery{"toilet", "bathroom", "floor 2"}));
  const ExternalDecomposer none("cat >/dev/null; printf 'sink\\nnone\\n\\n'");
  EXPECT_EQ(none.decompose("x"), (ParsedQuery{"sink", std::nullopt, std::nullopt}));
  EXPECT_THROW(ExternalDecomposer("cat >/dev/null; printf 'one\\n'").decompose("x"), Error);
  EXPECT_THROW(ExternalDecomposer("cat >/dev/null; exit 4").decompose("x"), Error);
}

TEST(Retrieve, HardModeFollowsFloorAndRoom) {
  const auto f = make_graph();
  const auto q = encode_query(parse_query("toilet in the bathroom on floor 2"), *f.enc);
  const auto r = retrieve(f.graph, q);
  EXPECT_EQ(r.floor_id, 1);
  ASSERT_FALSE(r.rooms.empty());
  EXPECT_EQ(r.rooms[0].first, 2);
  ASSERT_FALSE(r.objects.empty());
  EXPECT_EQ(r.objects[0].first, 3);
  for (const auto& [id, s] : r.objects) EXPECT_EQ(f.graph.floor_of_object(id), 1);
}

TEST(Retrieve, ObjectOnlyRanksAllObjects) {
  const auto f = make_graph();
  const auto r = retrieve(f.graph, encode_query(parse_query("sink"), *f.enc));
  EXPECT_EQ(r.floor_id, -1);
  ASSERT_EQ(r.objects.size(), 5u);
  EXPECT_EQ(r.objects[0].first, 1);
  EXPECT_EQ(r.objects[1].first, 4);
  for (std::size_t i = 1; i < r.objects.size(); ++i) EXPECT_GE(r.objects[i - 1].second, r.objects[i].second);
}

TEST(Retrieve, TopLimitsApply) {
  const auto f = make_graph();
  RetrievalParams p;
  p.top_objects = 2;
  p.top_rooms = 1;
  const auto r = retrieve(f.graph, encode_query(parse_query("sink in kitchen"), *f.enc), p);
  EXPECT_EQ(r.rooms.size(), 1u);
  EXPECT_LE(r.objects.size(), 2u);
  EXPECT_EQ(r.rooms[0].first, 1);
}

TEST(Retrieve, EmptySelectionHasDiagnostic) {
  auto f = make_graph();
  // Remove the toilet from the floor 2 bathroom.
  f.graph.objects.erase(f.graph.objects.begin() + 3);
  f.graph.objects[3].id = 3;
  RetrievalParams p;
  p.top_rooms = 1;
  const auto r = retrieve(f.graph, encode_query(parse_query("toilet in bathroom on floor 2"), *f.enc), p);
  EXPECT_TRUE(r.objects.empty());
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(Retrieve, SoftModeProductOfLevels) {
  const auto f = make_graph();
  RetrievalParams p;
  p.mode = ScoreMode::kSoft;
  const auto q = encode_query(parse_query("toilet in bathroom on floor 2"), *f.enc);
  const auto r = retrieve(f.graph, q, p);
  ASSERT_EQ(r.objects.size(), 5u);
  EXPECT_EQ(r.objects[0].first, 3);
  for (const auto& [id, s] : r.objects) {
    const auto& obj = f.graph.objects[id];
    const auto& room = f.graph.rooms[obj.room_id];
    auto unit = [](double c) { return std::clamp((c + 1.0) / 2.0, 0.0, 1.0); };
    const double expected = unit(q.object->cosine(obj.feature)) * unit(q.room->cosine(room.view_embeddings[0])) *
                            unit(q.floor->cosine(f.graph.floors[room.floor_index].text_embedding));
    EXPECT_NEAR(s, expected, 1e-12);
  }
}

TEST(Retrieve, FloorOnlyQuery) {
  const auto f = make_graph();
  const auto r = retrieve(f.graph, encode_query(parse_query("go to floor 2"), *f.enc));
  EXPECT_EQ(r.floor_id, 1);
  EXPECT_TRUE(r.objects.empty());
  EXPECT_EQ(r.rooms.size(), 2u);
}
