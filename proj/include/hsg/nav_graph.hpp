#pragma once

#include "hsg/geometry.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hsg {

struct FreeSpaceMap {
  int floor_index = 0;
  double z = 0.0;  // height assigned to nodes built on this map
  MaskGrid free;   // 1 = traversable

  bool is_free(double x, double y) const;
  bool operator==(const FreeSpaceMap&) const = default;
};

struct NavNode {
  int id = 0;
  Point3 position = Point3::Zero();
  int floor_index = 0;
  bool operator==(const NavNode&) const = default;
};

struct NavEdge {
  int a = 0;
  int b = 0;
  double length = 0.0;
  bool stairs = false;
  bool operator==(const NavEdge&) const = default;
};

/// Undirected roadmap. Edge length is the Euclidean distance between its
/// endpoints; node ids equal their position in `nodes`.
class NavGraph {
 public:
  int add_node(const Point3& position, int floor_index);
  void add_edge(int a, int b, bool stairs = false);

  const std::vector<NavNode>& nodes() const { return nodes_; }
  const std::vector<NavEdge>& edges() const { return edges_; }
  const std::vector<std::vector<std::pair<int, double>>>& adjacency() const { return adjacency_; }
  bool empty() const { return nodes_.empty(); }

  /// Appends `other`, shifting its ids; returns the id offset.
  int append(const NavGraph& other);

  /// Component id per node, numbered by lowest member.
  std::vector<int> components() const;
  int component_count() const;

  /// Nearest node by 3D distance (ties to the lower id), optionally limited
  /// to one floor.
  int nearest_node(const Point3& p, int floor_index = -1) const;

  bool operator==(const NavGraph& other) const { return nodes_ == other.nodes_ && edges_ == other.edges_; }

 private:
  std::vector<NavNode> nodes_;
  std::vector<NavEdge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

struct NavParams {
  double cell = 0.05;
  double delta_low = 0.2;    // obstacle slice starts this far above the lowest floor point
  double delta_high = 1.5;   // and ends here
  double pose_radius = 0.5;
  int spur_cells = 3;        // skeleton branches shorter than this are pruned
  double max_link = 3.0;     // max stair-to-floor connection distance
};

/// Cells holding any point with height in [y_min + d_low, y_min + d_high].
MaskGrid obstacle_map(const PointCloud& floor_cloud, double y_min, double delta_low, double delta_high,
                      const GridFrame& frame);
MaskGrid obstacle_map(const PointCloud& floor_cloud, double y_min, double delta_low, double delta_high,
                      double cell);

/// (pose disks U floor footprint) minus obstacles, restricted to the cells
/// 4-connected to a pose.
FreeSpaceMap free_space_map(std::span<const Eigen::Vector2d> pose_xy, double radius, const MaskGrid& floor_bev,
                            const MaskGrid& obstacles, int floor_index = 0, double z = 0.0);

/// Skeleton of the free space (distance-guided thinning, spur pruning) turned
/// into a graph. Nodes sit at junctions, endpoints and polyline vertices so
/// that every edge is a straight segment inside free space.
NavGraph voronoi_graph(const FreeSpaceMap& free, int spur_cells = 3);

/// One-pixel-wide skeleton of the free cells.
MaskGrid skeletonize(const MaskGrid& free);

/// Chain over consecutive pose positions; fewer than two poses give an empty
/// fragment.
NavGraph stairs_graph(std::span<const Pose> stair_poses, int floor_index = -1);

struct StairLinkReport {
  int linked = 0;
  int dangling = 0;
  std::vector<std::string> warnings;
};

/// Concatenates the floor graphs and stair fragments, linking each fragment
/// endpoint to the nearest node of the floor chosen by the endpoint height.
NavGraph connect_floors(std::span<const NavGraph> floor_graphs, std::span<const NavGraph> stair_fragments,
                        std::span<const std::pair<double, double>> floor_bounds, double max_link,
                        StairLinkReport* report = nullptr);

/// Shortest path between the nodes nearest to start and goal, as node ids.
/// Throws "unreachable" when they lie in different components.
std::vector<int> plan_path_ids(const NavGraph& graph, const Point3& start, const Point3& goal);
std::vector<Point3> plan_path(const NavGraph& graph, const Point3& start, const Point3& goal);
double path_length(const NavGraph& graph, std::span<const int> ids);

/// Grid cells crossed by the segment between two cell centers (Bresenham).
std::vector<std::pair<int, int>> raster_line(int x0, int y0, int x1, int y1);

/// "node id x y z floor" and "edge a b length stairs" lines.
void write_edge_list(std::ostream& out, const NavGraph& graph);
NavGraph read_edge_list(std::istream& in);

}  // namespace hsg
