#pragma once

#include "hsg/geometry.hpp"

#include <memory>
#include <vector>

namespace hsg {

/// Static kd-tree over a point cloud. Results are identical to a brute-force
/// scan; ties on distance resolve to the lowest point index.
class SpatialIndex {
 public:
  /// Throws "empty input" for an empty cloud.
  explicit SpatialIndex(const PointCloud& cloud);
  explicit SpatialIndex(std::vector<Point3> points);

  std::size_t size() const { return points_.size(); }
  const Point3& point(std::size_t i) const { return points_[i]; }

  std::size_t nearest(const Point3& query) const;
  /// Nearest point within `radius`, if any.
  std::optional<std::size_t> nearest_within(const Point3& query, double radius) const;
  /// Indices with distance <= radius, ascending index order.
  std::vector<std::size_t> radius(const Point3& query, double radius) const;
  bool any_within(const Point3& query, double radius) const;
  /// Up to k indices sorted by (distance, index).
  std::vector<std::size_t> knn(const Point3& query, std::size_t k) const;
  /// Indices of points inside the closed box, unordered.
  std::vector<std::size_t> in_box(const Aabb& box) const;
  const Aabb& bounds() const { return nodes_.front().box; }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;  // -1 for leaves
    float split = 0.0f;
    Aabb box;
  };

  void build();
  std::int32_t build_node(std::uint32_t begin, std::uint32_t end);
  double box_distance2(const Aabb& box, const Point3& q) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace hsg
