#include "hsg/hierarchy.hpp"
#include "hsg/spatial_index.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace hsg {

std::size_t top1_label(const Embedding& feature, std::span<const LabelledEmbedding> labels) {
  if (labels.empty()) throw Error("label set is empty");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double s = feature.cosine(labels[i].embedding);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

namespace {

Point3 room_centroid(const RoomNode& room, const FloorInterval& interval) {
  if (!room.cloud.empty()) return room.cloud.centroid();
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  std::size_t n = 0;
  for (std::size_t i = 0; i < room.mask.cells.size(); ++i) {
    if (!room.mask[i]) continue;
    sum += room.mask.frame.center(i);
    ++n;
  }
  if (n > 0) sum /= static_cast<double>(n);
  return {static_cast<float>(sum.x()), static_cast<float>(sum.y()),
          static_cast<float>(0.5 * (interval.z_floor + interval.z_ceiling))};
}

}  // namespace

std::vector<int> assign_objects(std::span<const ObjectCandidate> objects, std::span<const RoomNode> rooms,
                                std::span<const FloorInterval> floors) {
  std::vector<int> out(objects.size(), -1);
  if (rooms.empty()) return out;
  std::vector<Point3> centroids;
  centroids.reserve(rooms.size());
  for (const auto& room : rooms) centroids.push_back(room_centroid(room, floors[room.floor_index]));

  for (std::size_t o = 0; o < objects.size(); ++o) {
    const auto& cloud = objects[o].cloud;
    std::vector<std::size_t> counts(rooms.size(), 0);
    for (const auto& p : cloud.points) {
      for (std::size_t r = 0; r < rooms.size(); ++r) {
        if (!floors[rooms[r].floor_index].contains(p.z())) continue;
        const auto idx = rooms[r].mask.frame.index_of(p.x(), p.y());
        if (idx && rooms[r].mask[*idx]) ++counts[r];
      }
    }
    const auto best = std::max_element(counts.begin(), counts.end());
    if (*best > 0) {
      out[o] = static_cast<int>(best - counts.begin());
      continue;
    }
    const Point3 c = cloud.centroid();
    const int floor = floors.empty() ? -1 : nearest_floor(floors, c.z());
    double best_d = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 2 && out[o] < 0; ++pass) {
      for (std::size_t r = 0; r < rooms.size(); ++r) {
        if (pass == 0 && rooms[r].floor_index != floor) continue;
        const double d = squared_distance(c, centroids[r]);
        if (d < best_d) {
          best_d = d;
          out[o] = static_cast<int>(r);
        }
      }
    }
  }
  return out;
}

std::vector<ObjectCandidate> merge_same_label_objects(std::vector<ObjectCandidate> objects,
                                                      std::span<const LabelledEmbedding> label_set, double dist,
                                                      double tau, double voxel) {
  if (label_set.empty()) throw Error("label set is empty");
  const std::size_t n = objects.size();
  std::vector<std::size_t> labels(n);
  std::vector<Aabb> boxes(n);
  std::vector<std::unique_ptr<SpatialIndex>> indices(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = top1_label(objects[i].feature, label_set);
    boxes[i] = Aabb::of(objects[i].cloud);
  }
  auto index_of = [&](std::size_t i) -> const SpatialIndex& {
    if (!indices[i]) indices[i] = std::make_unique<SpatialIndex>(objects[i].cloud);
    return *indices[i];
  };

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (objects[i].room_id != objects[j].room_id || labels[i] != labels[j]) continue;
      if (!boxes[i].near(boxes[j], dist)) continue;
      const double r = std::max(overlap(index_of(i), index_of(j), dist), overlap(index_of(j), index_of(i), dist));
      if (r < tau) continue;
      const std::size_t a = find(i);
      const std::size_t b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<ObjectCandidate> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) {
    if (members.size() == 1) {
      out.push_back(std::move(objects[root]));
      out.back().label = label_set[labels[root]].label;
      continue;
    }
    ObjectCandidate merged;
    merged.room_id = objects[root].room_id;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(objects[root].feature.dim());
    for (std::size_t m : members) {
      sum += static_cast<double>(objects[m].cloud.size()) * objects[m].feature.values().cast<double>();
      merged.cloud.append(objects[m].cloud);
    }
    merged.cloud = voxel_downsample(merged.cloud, voxel);
    if (auto f = Embedding::try_normalized(sum)) {
      merged.feature = *f;
    } else {
      merged.feature = objects[root].feature;
    }
    merged.label = label_set[top1_label(merged.feature, label_set)].label;
    out.push_back(std::move(merged));
  }
  return out;
}

}  // namespace hsg
