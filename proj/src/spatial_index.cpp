#include "hsg/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace hsg {

namespace {
constexpr std::uint32_t kLeafSize = 12;
}

SpatialIndex::SpatialIndex(const PointCloud& cloud) : SpatialIndex(cloud.points) {}

SpatialIndex::SpatialIndex(std::vector<Point3> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error("empty input");
  build();
}

void SpatialIndex::build() {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build_node(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t SpatialIndex::build_node(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  for (std::uint32_t i = begin; i < end; ++i) {
    box.min = box.min.cwiseMin(points_[order_[i]]);
    box.max = box.max.cwiseMax(points_[order_[i]]);
  }
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  nodes_[id].box = box;
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  (box.max - box.min).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const float va = points_[a][axis];
                     const float vb = points_[b][axis];
                     return va < vb || (va == vb && a < b);
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const auto left = build_node(begin, mid);
  const auto right = build_node(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double SpatialIndex::box_distance2(const Aabb& box, const Point3& q) const {
  double d2 = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double v = q[d];
    if (v < box.min[d]) {
      const double t = box.min[d] - v;
      d2 += t * t;
    } else if (v > box.max[d]) {
      const double t = v - box.max[d];
      d2 += t * t;
    }
  }
  return d2;
}

std::size_t SpatialIndex::nearest(const Point3& query) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (box_distance2(node.box, query) > best_d2) continue;
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const double d2 = squared_distance(points_[idx], query);
        if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
          best_d2 = d2;
          best = idx;
        }
      }
      continue;
    }
    // Visit the nearer child first (pushed last).
    const bool go_left = query[node.axis] < node.split;
    stack.push_back(go_left ? node.right : node.left);
    stack.push_back(go_left ? node.left : node.right);
  }
  return best;
}

std::optional<std::size_t> SpatialIndex::nearest_within(const Point3& query, double radius) const {
  const std::size_t idx = nearest(query);
  if (squared_distance(points_[idx], query) <= radius * radius) return idx;
  return std::nullopt;
}

std::vector<std::size_t> SpatialIndex::radius(const Point3& query, double radius) const {
  std::vector<std::size_t> out;
  const double r2 = radius * radius;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (box_distance2(node.box, query) > r2) continue;
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if (squared_distance(points_[order_[i]], query) <= r2) out.push_back(order_[i]);
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool SpatialIndex::any_within(const Point3& query, double radius) const {
  const double r2 = radius * radius;
  std::vector<std::int32_t> stack{0};
  stack.reserve(64);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (box_distance2(node.box, query) > r2) continue;
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if (squared_distance(points_[order_[i]], query) <= r2) return true;
      }
      continue;
    }
    const bool go_left = query[node.axis] < node.split;
    stack.push_back(go_left ? node.right : node.left);
    stack.push_back(go_left ? node.left : node.right);
  }
  return false;
}

std::vector<std::size_t> SpatialIndex::knn(const Point3& query, std::size_t k) const {
  if (k == 0) return {};
  using Entry = std::pair<double, std::uint32_t>;  // max-heap on (d2, idx)
  std::priority_queue<Entry> heap;
  std::vector<std::int32_t> stack{0};
  auto worst = [&]() {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first;
  };
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (box_distance2(node.box, query) > worst()) continue;
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const Entry e{squared_distance(points_[order_[i]], query), order_[i]};
        if (heap.size() < k) {
          heap.push(e);
        } else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      continue;
    }
    const bool go_left = query[node.axis] < node.split;
    stack.push_back(go_left ? node.right : node.left);
    stack.push_back(go_left ? node.left : node.right);
  }
  std::vector<std::size_t> out(heap.size());
  for (auto i = out.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

std::vector<std::size_t> SpatialIndex::in_box(const Aabb& box) const {
  std::vector<std::size_t> out;
  std::vector<std::int32_t> stack{0};
  auto disjoint = [&](const Aabb& b) {
    for (int d = 0; d < 3; ++d) {
      if (b.max[d] < box.min[d] || b.min[d] > box.max[d]) return true;
    }
    return false;
  };
  auto inside = [&](const Point3& p) {
    return (p.array() >= box.min.array()).all() && (p.array() <= box.max.array()).all();
  };
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (disjoint(node.box)) continue;
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if (inside(points_[order_[i]])) out.push_back(order_[i]);
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  return out;
}

}  // namespace hsg
