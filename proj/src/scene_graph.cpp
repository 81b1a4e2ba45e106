#include "hsg/hierarchy.hpp"
#include "hsg/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace hsg {

std::vector<int> SceneGraph::root_floor_edges() const {
  std::vector<int> out;
  for (const auto& f : floors) out.push_back(f.index);
  return out;
}

std::vector<std::pair<int, int>> SceneGraph::floor_room_edges() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& r : rooms) out.push_back({r.floor_index, r.id});
  return out;
}

std::vector<std::pair<int, int>> SceneGraph::room_object_edges() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& o : objects) out.push_back({o.room_id, o.id});
  return out;
}

std::vector<int> SceneGraph::rooms_on_floor(int floor_index) const {
  std::vector<int> out;
  for (const auto& r : rooms) {
    if (r.floor_index == floor_index) out.push_back(r.id);
  }
  return out;
}

std::vector<int> SceneGraph::objects_in_room(int room_id) const {
  std::vector<int> out;
  for (const auto& o : objects) {
    if (o.room_id == room_id) out.push_back(o.id);
  }
  return out;
}

void SceneGraph::validate() const {
  auto check_embedding = [&](const Embedding& e, const std::string& what) {
    if (e.dim() != dim) throw Error(what + " has dimension " + std::to_string(e.dim()));
    if (std::abs(e.values().norm() - 1.0f) > 1e-4f) throw Error(what + " is not unit norm");
  };
  for (std::size_t i = 0; i < floors.size(); ++i) {
    const auto& f = floors[i];
    if (f.index != static_cast<int>(i)) throw Error("floor ids are not consecutive");
    if (!(f.interval.z_floor < f.interval.z_ceiling)) throw Error("floor " + std::to_string(i) + " has an empty interval");
    if (i > 0 && floors[i - 1].interval.z_ceiling > f.interval.z_floor) throw Error("floor intervals overlap");
    check_embedding(f.text_embedding, "floor " + std::to_string(i) + " embedding");
  }
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const auto& r = rooms[i];
    if (r.id != static_cast<int>(i)) throw Error("room ids are not consecutive");
    if (r.floor_index < 0 || r.floor_index >= static_cast<int>(floors.size())) {
      throw Error("room " + std::to_string(i) + " references a missing floor");
    }
    for (const auto& v : r.view_embeddings) check_embedding(v, "room " + std::to_string(i) + " view embedding");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (o.id != static_cast<int>(i)) throw Error("object ids are not consecutive");
    if (o.room_id < 0 || o.room_id >= static_cast<int>(rooms.size())) {
      throw Error("object " + std::to_string(i) + " references a missing room");
    }
    if (o.cloud.empty()) throw Error("object " + std::to_string(i) + " has no points");
    check_embedding(o.feature, "object " + std::to_string(i) + " feature");
  }
  for (const auto& n : nav.nodes()) {
    if (n.floor_index < -1 || n.floor_index >= static_cast<int>(floors.size())) {
      throw Error("nav node " + std::to_string(n.id) + " references a missing floor");
    }
  }
}

std::vector<std::uint8_t> infer_stair_frames(std::span<const Pose> poses, std::span<const RoomNode> rooms,
                                             std::span<const FloorInterval> floors,
                                             std::span<const std::string> stair_labels) {
  const auto views = assign_views(poses, rooms, floors);
  std::vector<int> room_of(poses.size(), -1);
  for (std::size_t r = 0; r < views.size(); ++r) {
    for (auto f : views[r]) room_of[f] = static_cast<int>(r);
  }
  std::vector<std::uint8_t> out(poses.size(), 0);
  for (std::size_t f = 0; f < poses.size(); ++f) {
    if (room_of[f] < 0) {
      out[f] = 1;
      continue;
    }
    const auto& category = rooms[room_of[f]].category;
    if (std::find(stair_labels.begin(), stair_labels.end(), category) != stair_labels.end()) out[f] = 1;
  }
  return out;
}

std::vector<std::vector<std::size_t>> stair_runs(std::span<const std::uint8_t> flags) {
  std::vector<std::vector<std::size_t>> runs;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!flags[i]) continue;
    if (i == 0 || !flags[i - 1]) runs.emplace_back();
    runs.back().push_back(i);
  }
  return runs;
}

NavBuild build_navigation(const PointCloud& global_cloud, std::span<const FloorInterval> floors,
                          std::span<const Pose> poses, std::span<const std::uint8_t> stair_flags,
                          const NavParams& params) {
  NavBuild out;
  out.free_space.resize(floors.size());
  std::vector<NavGraph> floor_graphs(floors.size());
  parallel_for(floors.size(), [&](std::size_t f) {
    const auto& interval = floors[f];
    const PointCloud cloud = crop_height(global_cloud, interval.z_floor - params.delta_low, interval.z_ceiling);
    if (cloud.empty()) {
      out.free_space[f] = FreeSpaceMap{static_cast<int>(f), interval.z_floor, MaskGrid(GridFrame{}, 0)};
      return;
    }
    const GridFrame frame = GridFrame::covering(cloud, params.cell, 1);
    const MaskGrid obstacles = obstacle_map(cloud, interval.z_floor, params.delta_low, params.delta_high, frame);
    const CountGrid ground =
        project_bev(cloud, frame, interval.z_floor - params.delta_low, interval.z_floor + 0.5 * params.delta_low);
    MaskGrid floor_bev(frame, 0);
    for (std::size_t i = 0; i < floor_bev.cells.size(); ++i) floor_bev[i] = ground[i] > 0 ? 1 : 0;

    std::vector<Eigen::Vector2d> xy;
    std::vector<double> heights;
    for (std::size_t p = 0; p < poses.size(); ++p) {
      const auto& t = poses[p].translation;
      if (!interval.contains(t.z())) continue;
      if (p < stair_flags.size() && stair_flags[p]) continue;
      xy.push_back(t.head<2>());
      heights.push_back(t.z());
    }
    double z = interval.z_floor;
    if (!heights.empty()) {
      std::nth_element(heights.begin(), heights.begin() + heights.size() / 2, heights.end());
      z = heights[heights.size() / 2];
    }
    out.free_space[f] = free_space_map(xy, params.pose_radius, floor_bev, obstacles, static_cast<int>(f), z);
    floor_graphs[f] = voronoi_graph(out.free_space[f], params.spur_cells);
  });

  std::vector<NavGraph> fragments;
  for (const auto& run : stair_runs(stair_flags)) {
    std::vector<Pose> chain;
    for (auto i : run) chain.push_back(poses[i]);
    fragments.push_back(stairs_graph(chain, -1));
  }
  std::vector<std::pair<double, double>> bounds;
  for (const auto& interval : floors) bounds.push_back({interval.z_floor, interval.z_ceiling});
  if (!floors.empty()) out.graph = connect_floors(floor_graphs, fragments, bounds, params.max_link, &out.report);
  return out;
}

SceneGraph build_scene_graph(const HierarchyInputs& inputs, const TextEncoder& encoder,
                             const HierarchyParams& params) {
  if (inputs.poses.size() != inputs.frame_globals.size()) throw Error("poses and frame embeddings differ in count");
  SceneGraph g;
  g.dim = encoder.dim();

  const auto intervals = segment_floors(inputs.global_cloud, params.floors);
  for (std::size_t f = 0; f < intervals.size(); ++f) {
    FloorNode node;
    node.index = static_cast<int>(f);
    node.interval = intervals[f];
    node.cloud = crop_height(inputs.global_cloud, intervals[f].z_floor - params.crop_margin,
                             intervals[f].z_ceiling + params.crop_margin);
    node.text_embedding = floor_text_embedding(node.index, encoder);
    g.floors.push_back(std::move(node));
  }

  std::vector<RoomSegmentation> segs(g.floors.size());
  parallel_for(g.floors.size(), [&](std::size_t f) {
    if (g.floors[f].cloud.empty()) return;
    segs[f] = segment_rooms(g.floors[f].cloud, g.floors[f].interval, params.rooms);
  });
  for (std::size_t f = 0; f < segs.size(); ++f) {
    for (std::size_t r = 0; r < segs[f].masks.size(); ++r) {
      RoomNode room;
      room.id = static_cast<int>(g.rooms.size());
      room.floor_index = static_cast<int>(f);
      room.mask = std::move(segs[f].masks[r]);
      room.cloud = std::move(segs[f].clouds[r]);
      g.rooms.push_back(std::move(room));
    }
  }

  const auto views = assign_views(inputs.poses, g.rooms, intervals);
  parallel_for(g.rooms.size(), [&](std::size_t r) {
    std::vector<Embedding> embeddings;
    for (auto f : views[r]) embeddings.push_back(inputs.frame_globals[f]);
    if (embeddings.empty()) return;
    g.rooms[r].view_embeddings = representative_view_embeddings(embeddings, params.view_k, params.kmeans_seed);
    if (!inputs.room_categories.empty()) {
      g.rooms[r].category = classify_room(g.rooms[r].view_embeddings, inputs.room_categories, params.vote);
    }
  });

  std::vector<ObjectCandidate> candidates = inputs.objects;
  const auto owners = assign_objects(candidates, g.rooms, intervals);
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].room_id = owners[i];
  std::erase_if(candidates, [](const ObjectCandidate& c) { return c.room_id < 0; });
  if (!inputs.object_labels.empty()) {
    candidates = merge_same_label_objects(std::move(candidates), inputs.object_labels, params.object_merge_dist,
                                          params.object_merge_tau, params.voxel);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const ObjectCandidate& a, const ObjectCandidate& b) { return a.room_id < b.room_id; });
  for (auto& c : candidates) {
    ObjectNode node;
    node.id = static_cast<int>(g.objects.size());
    node.room_id = c.room_id;
    node.cloud = std::move(c.cloud);
    node.feature = c.feature;
    if (!inputs.object_labels.empty()) node.top1_label = inputs.object_labels[top1_label(c.feature, inputs.object_labels)].label;
    g.objects.push_back(std::move(node));
  }

  std::vector<std::uint8_t> stairs = inputs.stair_frames;
  if (stairs.empty()) stairs = infer_stair_frames(inputs.poses, g.rooms, intervals, params.stair_labels);
  auto nav = build_navigation(inputs.global_cloud, intervals, inputs.poses, stairs, params.nav);
  g.nav = std::move(nav.graph);
  g.free_space = std::move(nav.free_space);
  return g;
}

}  // namespace hsg
