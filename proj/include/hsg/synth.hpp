#pragma once

#include "hsg/config.hpp"
#include "hsg/embedding.hpp"
#include "hsg/feature_fusion.hpp"
#include "hsg/geometry.hpp"
#include "hsg/hierarchy.hpp"
#include "hsg/io.hpp"
#include "hsg/localization.hpp"
#include "hsg/text_encoder.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace hsg::synth {

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double depth() const { return y1 - y0; }
  bool contains(double x, double y, double margin = 0.0) const {
    return x >= x0 - margin && x <= x1 + margin && y >= y0 - margin && y <= y1 + margin;
  }
  bool interior(double x, double y) const { return x > x0 && x < x1 && y > y0 && y < y1; }
  bool operator==(const Rect&) const = default;
};

/// Axis-aligned box; z is measured from the floor surface.
struct BoxSpec {
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();
  Eigen::Vector3d hi = Eigen::Vector3d::Zero();
  std::string category;
};

struct RoomSpec {
  Rect rect;
  std::string category;
  std::vector<BoxSpec> objects;
};

struct FloorSpec {
  double height = 2.8;  // floor surface to ceiling surface
  std::vector<RoomSpec> rooms;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  std::vector<FloorSpec> floors;
  std::optional<Rect> stairwell;  // same footprint on every floor, ramp along y
  double base_z = 0.0;
  double slab = 0.3;              // ceiling surface to the next floor surface
  double spacing = 0.05;          // surface sampling step
  double height_noise = 0.005;    // std of z jitter on sampled points
  double door_width = 0.9;
  double door_height = 2.0;
  double camera_height = 1.5;
  double step = 0.2;              // trajectory translation per frame
  double turn_deg = 5.0;          // trajectory rotation per frame
  int frame_stride = 1;           // keep every n-th pose
  int dim = 64;
  double sigma = 0.0;             // embedding noise norm
  double fov_deg = 90.0;
  double range = 5.0;
  bool structure_masks = true;    // emit wall, floor and ceiling masks

  /// Validation errors, empty when the spec is usable.
  std::vector<std::string> validate() const;
};

SceneSpec parse_scene_spec(const std::string& json_text);
SceneSpec load_scene_spec(const std::filesystem::path& path);
std::string scene_spec_json(const SceneSpec& spec);

/// Stand-in for a vision-language encoder: every vocabulary entry maps to a
/// fixed unit vector. Entries are mutually orthogonal while they fit in the
/// dimension, beyond that pairwise cosines stay <= 0.3. The prompt
/// "There is the X in the scene." encodes like X; unknown text falls back to
/// a hashed vector.
class SynthEmbedder final : public TextEncoder {
 public:
  SynthEmbedder(std::vector<std::string> vocabulary, int dim, std::uint64_t seed);

  Embedding encode(std::string_view text) const override;
  int dim() const override { return dim_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

  /// Label vector plus Gaussian noise of expected norm `sigma`.
  Embedding noisy(const std::string& label, double sigma, std::mt19937_64& rng) const;

 private:
  std::vector<std::string> vocabulary_;
  std::map<std::string, Embedding> vectors_;
  int dim_;
  HashTextEncoder fallback_;
};

struct DoorGeom {
  int floor = 0;
  int room_a = 0;  // GT room ids
  int room_b = 0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  bool along_x = true;  // wall runs along x (door normal is y)
};

struct GtRoom {
  int floor = 0;
  Rect rect;
  std::string category;
  PointCloud cloud;  // floor-interval points strictly inside the rect
  bool stairwell = false;
};

struct GtObject {
  int floor = 0;
  int room = 0;
  std::string category;
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();  // absolute
  Eigen::Vector3d hi = Eigen::Vector3d::Zero();
  PointCloud cloud;
};

struct GroundTruth {
  std::vector<FloorInterval> floors;
  std::vector<GtRoom> rooms;
  std::vector<GtObject> objects;
  std::vector<DoorGeom> doors;
  PointCloud cloud;                 // every sampled surface point
  std::vector<int> labels;          // index into `categories`, per point
  std::vector<int> point_objects;   // GT object per point or -1
  std::vector<std::string> categories;
};

struct SynthFrame {
  FrameRecord record;
  std::vector<std::string> mask_labels;
  int floor = 0;
  int room = -1;  // GT room holding the pose
  bool stairs = false;
};

struct SynthScene {
  SceneSpec spec;
  GroundTruth gt;
  std::vector<Pose> trajectory;  // every pose, before striding
  std::vector<std::uint8_t> trajectory_stairs;
  std::vector<SynthFrame> frames;
  std::vector<std::string> room_categories;
  std::vector<std::string> object_categories;
  std::vector<std::string> ignore_labels;
  std::shared_ptr<const SynthEmbedder> embedder;
};

struct GenerateOptions {
  bool frames = true;  // false: ground truth and trajectory only
};

/// Throws with the joined validation errors when the spec is invalid.
SynthScene generate(const SceneSpec& spec, const GenerateOptions& options = {});

/// Geometry only: the labelled GT cloud, floors, rooms, objects and doors.
GroundTruth ground_truth(const SceneSpec& spec);

/// Vocabulary of a spec: room and object categories, structure labels and
/// floor names.
std::vector<std::string> vocabulary(const SceneSpec& spec);

/// Random Manhattan floor plan with 2 to 6 rooms of at least 3 m per side.
FloorSpec random_layout(std::mt19937_64& rng, int min_rooms = 2, int max_rooms = 6, bool with_objects = true);

/// Random building with 1 to 3 floors sharing one footprint.
SceneSpec random_building(std::uint64_t seed, int floors);

/// Two floors, two rooms each, joined by a stairwell.
SceneSpec two_floor_scene();

/// One floor of four rooms in a 2 x 2 grid.
SceneSpec four_room_scene();

/// Build configuration for a generated scene: its room and object labels
/// (structure labels included and ignored) and the matching synth encoder.
Config scene_config(const SynthScene& scene);

/// Writes frames/*.hsgf, gt.json, gt_points.bin, labels and config.json.
void write_dataset(const SynthScene& scene, const std::filesystem::path& dir);

/// Reads gt.json and gt_points.bin back; room clouds are rebuilt from the
/// points.
GroundTruth load_ground_truth(const std::filesystem::path& dir);

/// Observations for the particle filter: odometry between consecutive
/// frames, frame embeddings and the fused embeddings of object masks.
std::vector<LocalizationObservation> localization_observations(std::span<const SynthFrame> frames,
                                                               const FusionWeights& weights,
                                                               std::span<const std::string> ignore_labels);

}  // namespace hsg::synth
