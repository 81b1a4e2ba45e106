#include "hsg/geometry.hpp"
#include "hsg/spatial_index.hpp"

#include <Eigen/LU>
#include <cmath>
#include <unordered_map>

namespace hsg {

void PointCloud::append(const PointCloud& other) {
  if (has_colors() != other.has_colors() && !empty() && !other.empty()) {
    colors.clear();
  } else if (other.has_colors()) {
    colors.insert(colors.end(), other.colors.begin(), other.colors.end());
  }
  points.insert(points.end(), other.points.begin(), other.points.end());
  if (!colors.empty() && colors.size() != points.size()) colors.clear();
}

Point3 PointCloud::centroid() const {
  if (points.empty()) throw Error("empty input");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : points) sum += p.cast<double>();
  return (sum / static_cast<double>(points.size())).cast<float>();
}

void PointCloud::validate() const {
  if (!colors.empty() && colors.size() != points.size()) {
    throw Error("color count " + std::to_string(colors.size()) + " != point count " +
                std::to_string(points.size()));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) throw Error("non-finite coordinate at point " + std::to_string(i));
  }
}

Aabb Aabb::of(const PointCloud& cloud) {
  Aabb box;
  for (const auto& p : cloud.points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

bool Aabb::near(const Aabb& other, double margin) const {
  if (empty() || other.empty()) return false;
  for (int d = 0; d < 3; ++d) {
    if (static_cast<double>(other.min[d]) - max[d] > margin) return false;
    if (static_cast<double>(min[d]) - other.max[d] > margin) return false;
  }
  return true;
}

Pose Pose::from_xyz_yaw(double x, double y, double z, double yaw) {
  Pose pose;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  pose.rotation << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  pose.translation = {x, y, z};
  return pose;
}

Point3 Pose::apply(const Point3& p) const {
  return (rotation * p.cast<double>() + translation).cast<float>();
}

PointCloud Pose::apply(const PointCloud& cloud) const {
  PointCloud out = cloud;
  for (auto& p : out.points) p = apply(p);
  return out;
}

double Pose::yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

bool Pose::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

GridFrame GridFrame::covering(const PointCloud& cloud, double cell, int pad) {
  if (cell <= 0.0) throw Error("cell size must be positive");
  GridFrame frame;
  frame.cell = cell;
  if (cloud.empty()) return frame;
  double min_x = cloud.points[0].x(), max_x = min_x;
  double min_y = cloud.points[0].y(), max_y = min_y;
  for (const auto& p : cloud.points) {
    min_x = std::min(min_x, static_cast<double>(p.x()));
    max_x = std::max(max_x, static_cast<double>(p.x()));
    min_y = std::min(min_y, static_cast<double>(p.y()));
    max_y = std::max(max_y, static_cast<double>(p.y()));
  }
  frame.origin_x = (std::floor(min_x / cell) - pad) * cell;
  frame.origin_y = (std::floor(min_y / cell) - pad) * cell;
  frame.width = static_cast<int>(std::floor((max_x - frame.origin_x) / cell)) + 1 + pad;
  frame.height = static_cast<int>(std::floor((max_y - frame.origin_y) / cell)) + 1 + pad;
  return frame;
}

std::optional<std::size_t> GridFrame::index_of(double x, double y) const {
  const double fx = std::floor((x - origin_x) / cell);
  const double fy = std::floor((y - origin_y) / cell);
  if (fx < 0 || fy < 0 || fx >= width || fy >= height) return std::nullopt;
  return index(static_cast<int>(fx), static_cast<int>(fy));
}

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (voxel <= 0.0) throw Error("voxel size must be positive");
  struct Accum {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    std::size_t count = 0;
  };
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot;
  slot.reserve(cloud.size());
  std::vector<Accum> acc;
  const bool colored = cloud.has_colors();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x() / voxel)),
                       static_cast<std::int64_t>(std::floor(p.y() / voxel)),
                       static_cast<std::int64_t>(std::floor(p.z() / voxel))};
    auto [it, inserted] = slot.try_emplace(key, acc.size());
    if (inserted) acc.emplace_back();
    Accum& a = acc[it->second];
    a.sum += p.cast<double>();
    if (colored) {
      a.color += Eigen::Vector3d(cloud.colors[i][0], cloud.colors[i][1], cloud.colors[i][2]);
    }
    ++a.count;
  }
  PointCloud out;
  out.points.reserve(acc.size());
  for (const auto& a : acc) {
    // Single members are copied verbatim so grids already coarser than the
    // voxel pass through bit-exact.
    out.points.push_back((a.sum / static_cast<double>(a.count)).cast<float>());
    if (colored) {
      const Eigen::Vector3d c = a.color / static_cast<double>(a.count);
      out.colors.push_back({static_cast<std::uint8_t>(std::lround(c.x())),
                            static_cast<std::uint8_t>(std::lround(c.y())),
                            static_cast<std::uint8_t>(std::lround(c.z()))});
    }
  }
  return out;
}

CountGrid project_bev(const PointCloud& cloud, double cell, double zmin, double zmax) {
  return project_bev(cloud, GridFrame::covering(cloud, cell), zmin, zmax);
}

CountGrid project_bev(const PointCloud& cloud, const GridFrame& frame, double zmin, double zmax) {
  if (!(zmin < zmax)) throw Error("project_bev requires zmin < zmax");
  CountGrid grid(frame, 0);
  for (const auto& p : cloud.points) {
    if (p.z() < zmin || p.z() > zmax) continue;
    if (auto idx = frame.index_of(p.x(), p.y())) ++grid[*idx];
  }
  return grid;
}

double overlap(const PointCloud& a, const SpatialIndex& index_b, double dist) {
  if (a.empty()) throw Error("overlap of empty cloud");
  if (dist <= 0.0) throw Error("overlap distance must be positive");
  std::size_t hits = 0;
  for (const auto& p : a.points) {
    if (index_b.any_within(p, dist)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(a.size());
}

double overlap(const SpatialIndex& index_a, const SpatialIndex& index_b, double dist) {
  if (dist <= 0.0) throw Error("overlap distance must be positive");
  Aabb box = index_b.bounds();
  const float margin = static_cast<float>(dist) + 1e-4f;
  box.min.array() -= margin;
  box.max.array() += margin;
  std::size_t hits = 0;
  for (std::size_t i : index_a.in_box(box)) {
    if (index_b.any_within(index_a.point(i), dist)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(index_a.size());
}

double pair_overlap_ratio(const PointCloud& /*a*/, const SpatialIndex& index_a, const PointCloud& /*b*/,
                          const SpatialIndex& index_b, double dist) {
  return std::max(overlap(index_a, index_b, dist), overlap(index_b, index_a, dist));
}

double pair_overlap_ratio(const PointCloud& a, const PointCloud& b, double dist) {
  const SpatialIndex ia(a);
  const SpatialIndex ib(b);
  return pair_overlap_ratio(a, ia, b, ib, dist);
}

}  // namespace hsg
