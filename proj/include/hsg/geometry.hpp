#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsg {

/// Library-wide error type. Messages are one-line diagnostics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Meters, z is the height axis.
using Point3 = Eigen::Vector3f;
using Color = std::array<std::uint8_t, 3>;

/// Squared distance evaluated in double so that every code path (index,
/// brute force, tests) agrees bit for bit.
inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = static_cast<double>(a.x()) - b.x();
  const double dy = static_cast<double>(a.y()) - b.y();
  const double dz = static_cast<double>(a.z()) - b.z();
  return dx * dx + dy * dy + dz * dz;
}

struct PointCloud {
  std::vector<Point3> points;
  std::vector<Color> colors;  // empty or same length as points

  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }

  void append(const PointCloud& other);
  Point3 centroid() const;

  /// Throws if colors are misaligned or any coordinate is not finite.
  void validate() const;

  bool operator==(const PointCloud& other) const = default;
};

struct Aabb {
  Point3 min = Point3::Constant(std::numeric_limits<float>::infinity());
  Point3 max = Point3::Constant(-std::numeric_limits<float>::infinity());

  static Aabb of(const PointCloud& cloud);
  bool empty() const { return min.x() > max.x(); }
  /// True when the boxes are closer than `margin` along every axis.
  bool near(const Aabb& other, double margin) const;
};

/// Rigid transform, rotation orthonormal with det +1.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose from_xyz_yaw(double x, double y, double z, double yaw);
  Point3 apply(const Point3& p) const;
  PointCloud apply(const PointCloud& cloud) const;
  double yaw() const;
  bool is_valid(double tol = 1e-6) const;

  bool operator==(const Pose& other) const = default;
};

/// Placement of a regular 2D grid in the ground plane. Cell (ix, iy) covers
/// [origin_x + ix*cell, origin_x + (ix+1)*cell) and likewise in y.
struct GridFrame {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell = 0.05;
  int width = 1;
  int height = 1;

  /// Frame covering the xy bounding box of `cloud`, snapped to `cell`.
  static GridFrame covering(const PointCloud& cloud, double cell, int pad = 0);

  std::size_t cell_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool contains(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < width && iy < height; }
  std::optional<std::size_t> index_of(double x, double y) const;
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(width) + static_cast<std::size_t>(ix);
  }
  Eigen::Vector2d center(int ix, int iy) const {
    return {origin_x + (ix + 0.5) * cell, origin_y + (iy + 0.5) * cell};
  }
  Eigen::Vector2d center(std::size_t idx) const {
    return center(static_cast<int>(idx % width), static_cast<int>(idx / width));
  }

  bool operator==(const GridFrame& other) const = default;
};

/// Bird's-eye-view raster over a GridFrame.
template <typename T>
struct BevGrid {
  GridFrame frame;
  std::vector<T> cells;

  BevGrid() : cells(1, T{}) {}
  explicit BevGrid(const GridFrame& f, T fill = T{}) : frame(f), cells(f.cell_count(), fill) {
    if (f.cell <= 0.0 || f.width < 1 || f.height < 1) throw Error("invalid grid frame");
  }

  int width() const { return frame.width; }
  int height() const { return frame.height; }
  T& at(int ix, int iy) { return cells[frame.index(ix, iy)]; }
  const T& at(int ix, int iy) const { return cells[frame.index(ix, iy)]; }
  T& operator[](std::size_t i) { return cells[i]; }
  const T& operator[](std::size_t i) const { return cells[i]; }

  bool operator==(const BevGrid& other) const = default;
};

using CountGrid = BevGrid<std::int32_t>;
using MaskGrid = BevGrid<std::uint8_t>;
using FieldGrid = BevGrid<float>;
using LabelGrid = BevGrid<std::int32_t>;

class SpatialIndex;

/// At most one point per occupied voxel, placed at the centroid of the voxel's
/// members. Output order follows the first appearance of each voxel.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Per-cell counts of points with z in [zmin, zmax]. The frame covers the xy
/// extent of the whole cloud.
CountGrid project_bev(const PointCloud& cloud, double cell, double zmin, double zmax);
CountGrid project_bev(const PointCloud& cloud, const GridFrame& frame, double zmin, double zmax);

/// Fraction of points in `a` that have a point of `b` within `dist`.
double overlap(const PointCloud& a, const SpatialIndex& index_b, double dist);
inline double overlap(const PointCloud& a, const PointCloud& /*b*/, const SpatialIndex& index_b,
                      double dist) {
  return overlap(a, index_b, dist);
}

/// Directed overlap of the cloud held by `index_a` onto `index_b`; only points of
/// `a` inside the expanded bounds of `b` are tested.
double overlap(const SpatialIndex& index_a, const SpatialIndex& index_b, double dist);

/// Symmetric max of the two directed overlaps.
double pair_overlap_ratio(const PointCloud& a, const SpatialIndex& index_a, const PointCloud& b,
                          const SpatialIndex& index_b, double dist);
double pair_overlap_ratio(const PointCloud& a, const PointCloud& b, double dist);

}  // namespace hsg
