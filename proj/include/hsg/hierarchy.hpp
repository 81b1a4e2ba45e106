#pragma once

#include "hsg/embedding.hpp"
#include "hsg/geometry.hpp"
#include "hsg/nav_graph.hpp"
#include "hsg/segment_merger.hpp"
#include "hsg/text_encoder.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hsg {

// ---------------------------------------------------------------------------
// Scene graph
// ---------------------------------------------------------------------------

struct FloorInterval {
  double z_floor = 0.0;
  double z_ceiling = 0.0;

  bool contains(double z) const { return z >= z_floor && z <= z_ceiling; }
  bool operator==(const FloorInterval&) const = default;
};

struct FloorNode {
  int index = 0;
  FloorInterval interval;
  PointCloud cloud;
  Embedding text_embedding;
  bool operator==(const FloorNode&) const = default;
};

struct RoomNode {
  int id = 0;
  int floor_index = 0;
  MaskGrid mask;  // 1 inside the room
  PointCloud cloud;
  std::vector<Embedding> view_embeddings;
  std::string category;  // empty when unclassified
  bool operator==(const RoomNode&) const = default;
};

struct ObjectNode {
  int id = 0;
  int room_id = 0;
  PointCloud cloud;
  Embedding feature;
  std::string top1_label;
  bool operator==(const ObjectNode&) const = default;
};

/// Root -> floors -> rooms -> objects, plus the navigation graph. Node ids
/// are positions in their vectors; the root is implicit.
struct SceneGraph {
  int dim = 0;
  std::vector<FloorNode> floors;
  std::vector<RoomNode> rooms;
  std::vector<ObjectNode> objects;
  NavGraph nav;
  std::vector<FreeSpaceMap> free_space;  // one per floor

  /// Root-floor, floor-room and room-object edges derived from parent fields.
  std::vector<int> root_floor_edges() const;
  std::vector<std::pair<int, int>> floor_room_edges() const;
  std::vector<std::pair<int, int>> room_object_edges() const;

  std::vector<int> rooms_on_floor(int floor_index) const;
  std::vector<int> objects_in_room(int room_id) const;
  int floor_of_object(int object_id) const { return rooms.at(objects.at(object_id).room_id).floor_index; }

  /// Throws on broken references or invariant violations.
  void validate() const;

  bool operator==(const SceneGraph&) const = default;
};

// ---------------------------------------------------------------------------
// Floors
// ---------------------------------------------------------------------------

struct FloorSegParams {
  double bin = 0.01;           // histogram bin, meters
  double peak_window = 0.2;    // peaks must dominate this height range
  double peak_ratio = 0.9;     // fraction of the strongest peak to keep
  double cluster_eps = 0.5;    // height clustering radius, meters
  int smoothing_bins = 3;      // box filter width applied to the histogram
};

/// Floor/ceiling height pairs from peaks of the height histogram, ascending.
std::vector<FloorInterval> segment_floors(const PointCloud& cloud, const FloorSegParams& params = {});

/// Floors are named from 1 upwards: index 0 is "floor 1".
Embedding floor_text_embedding(int index, const TextEncoder& encoder);
std::string floor_text(int index);

/// Points with z inside the interval.
PointCloud crop_height(const PointCloud& cloud, double zmin, double zmax);

/// Floor whose interval contains z, otherwise the one with the nearest bound.
int nearest_floor(std::span<const FloorInterval> floors, double z);

// ---------------------------------------------------------------------------
// Rooms
// ---------------------------------------------------------------------------

struct RoomSegParams {
  double cell = 0.05;
  double wall_band_low = 1.5;    // wall evidence taken from [z_floor + low, z_ceiling - high]
  double wall_band_high = 0.1;
  double wall_ratio = 0.2;       // cells >= ratio * max count become wall
  int dilation_cells = 3;
  double seed_distance = 1.0;    // EDF threshold for seeds, meters
  std::size_t min_room_cells = 0;
};

struct RoomSegmentation {
  GridFrame frame;
  MaskGrid walls;        // undilated wall evidence plus cells outside the floor footprint
  FieldGrid distance;    // meters to the nearest dilated wall cell
  LabelGrid seeds;       // -1 where not a seed
  LabelGrid labels;      // -1 where unassigned
  std::vector<MaskGrid> masks;
  std::vector<PointCloud> clouds;
};

/// Cells holding no point of `floor_cloud` count as wall.
/// Wall mask -> dilation -> distance field -> seed regions -> watershed. Each
/// resulting label yields a mask and the floor points inside it.
RoomSegmentation segment_rooms(const PointCloud& floor_cloud, const FloorInterval& interval,
                               const RoomSegParams& params = {});

/// Euclidean distance (meters) from each cell to the nearest cell where
/// `sources` is nonzero; +inf when there are no sources.
FieldGrid distance_field(const MaskGrid& sources);

MaskGrid dilate(const MaskGrid& mask, int radius_cells);

/// 4-connected components of nonzero cells, labelled in row-major discovery
/// order; -1 elsewhere.
LabelGrid connected_components(const MaskGrid& mask);

/// Priority flood from the seed labels in order of decreasing field value
/// (ties by lower cell index). Wall cells are never entered. Cells
/// unreachable from any seed stay -1.
LabelGrid watershed(const FieldGrid& field, const LabelGrid& seeds, const MaskGrid& walls);

// ---------------------------------------------------------------------------
// Room semantics
// ---------------------------------------------------------------------------

/// Frame indices per room: the pose must lie in the room's mask and its z in
/// the room's floor interval. Frames outside every room are dropped.
std::vector<std::vector<std::size_t>> assign_views(std::span<const Pose> poses, std::span<const RoomNode> rooms,
                                                   std::span<const FloorInterval> floors);

/// k-means++ seeded with `seed`, at most 100 Lloyd iterations; returns
/// normalized centroids. Inputs with at most k views are returned as is.
std::vector<Embedding> representative_view_embeddings(std::span<const Embedding> views, int k,
                                                      std::uint64_t seed = 0);

enum class VoteMode { kMax, kMajority };

struct LabelledEmbedding {
  std::string label;
  Embedding embedding;
};

std::string classify_room(std::span<const Embedding> reps, std::span<const LabelledEmbedding> categories,
                          VoteMode mode);

// ---------------------------------------------------------------------------
// Objects
// ---------------------------------------------------------------------------

struct ObjectCandidate {
  PointCloud cloud;
  Embedding feature;
  std::string label;
  int room_id = -1;
};

/// Index of the label whose embedding has the highest cosine with `feature`
/// (ties to the lower index).
std::size_t top1_label(const Embedding& feature, std::span<const LabelledEmbedding> labels);

/// Room id per candidate: the room whose mask holds the most of its points
/// (restricted to the room's floor interval); with no overlap, the room on
/// the candidate's floor with the nearest centroid.
std::vector<int> assign_objects(std::span<const ObjectCandidate> objects, std::span<const RoomNode> rooms,
                                std::span<const FloorInterval> floors);

/// Merges pairs in the same room whose overlap ratio is >= tau and whose top-1
/// label against `label_set` agrees. Merged features are the point-count
/// weighted mean, renormalized.
std::vector<ObjectCandidate> merge_same_label_objects(std::vector<ObjectCandidate> objects,
                                                      std::span<const LabelledEmbedding> label_set, double dist,
                                                      double tau, double voxel = 0.02);

// ---------------------------------------------------------------------------
// Whole graph
// ---------------------------------------------------------------------------

struct HierarchyParams {
  FloorSegParams floors;
  RoomSegParams rooms;
  int view_k = 10;
  std::uint64_t kmeans_seed = 0;
  VoteMode vote = VoteMode::kMajority;
  double object_merge_tau = 0.4;
  double object_merge_dist = 0.025;
  double voxel = 0.02;
  double crop_margin = 0.1;  // floor clouds extend this far past the interval
  NavParams nav;
  std::vector<std::string> stair_labels{"stairs", "staircase"};
};

struct HierarchyInputs {
  PointCloud global_cloud;
  std::vector<ObjectCandidate> objects;  // segments with features
  std::vector<Pose> poses;
  std::vector<Embedding> frame_globals;
  std::vector<LabelledEmbedding> room_categories;
  std::vector<LabelledEmbedding> object_labels;
  std::vector<std::uint8_t> stair_frames;  // optional per-frame flags; inferred from rooms when empty
};

SceneGraph build_scene_graph(const HierarchyInputs& inputs, const TextEncoder& encoder,
                             const HierarchyParams& params);

/// Frames on stairs: those outside every room or inside a room whose category
/// is one of `stair_labels`.
std::vector<std::uint8_t> infer_stair_frames(std::span<const Pose> poses, std::span<const RoomNode> rooms,
                                             std::span<const FloorInterval> floors,
                                             std::span<const std::string> stair_labels);

/// Maximal runs of consecutive flagged frames, as pose index lists.
std::vector<std::vector<std::size_t>> stair_runs(std::span<const std::uint8_t> flags);

/// Per-floor free space and Voronoi graphs joined through the stair runs.
struct NavBuild {
  std::vector<FreeSpaceMap> free_space;
  NavGraph graph;
  StairLinkReport report;
};
NavBuild build_navigation(const PointCloud& global_cloud, std::span<const FloorInterval> floors,
                          std::span<const Pose> poses, std::span<const std::uint8_t> stair_flags,
                          const NavParams& params);

}  // namespace hsg
