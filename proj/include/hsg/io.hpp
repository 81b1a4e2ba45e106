#pragma once

#include "hsg/embedding.hpp"
#include "hsg/feature_fusion.hpp"
#include "hsg/geometry.hpp"
#include "hsg/hierarchy.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace hsg {

// ---------------------------------------------------------------------------
// Frame files: "HSGF", u32 version, u64 frame id, 12 f64 pose (row-major
// rotation, translation), u32 dim, f32[dim] global embedding, u32 mask count,
// then per mask u32 n, f32[3n] xyz, f32[dim] local, f32[dim] mask-only.
// All little endian.
// ---------------------------------------------------------------------------

struct MaskRecord {
  PointCloud points;
  Embedding local;
  Embedding maskonly;
  bool operator==(const MaskRecord&) const = default;
};

struct FrameRecord {
  std::uint64_t frame_id = 0;
  Pose pose;
  Embedding global;
  std::vector<MaskRecord> masks;
  bool operator==(const FrameRecord&) const = default;
};

inline constexpr std::uint32_t kFrameVersion = 1;
inline constexpr std::uint32_t kGraphVersion = 1;
inline constexpr std::uint32_t kDenseVersion = 1;

void write_frame(std::ostream& out, const FrameRecord& frame);
void write_frame(const std::filesystem::path& path, const FrameRecord& frame);
/// `name` labels errors, which carry the byte offset and field.
FrameRecord read_frame(std::istream& in, const std::string& name);
FrameRecord read_frame(const std::filesystem::path& path);

/// *.hsgf files of a directory in lexicographic filename order.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);
std::vector<FrameRecord> load_frames(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Graph files: "HSGG", u32 version, u32 dim, then floors, rooms, objects,
// navigation graph and free-space maps with embedded float32 point clouds.
// Binary masks are run-length encoded.
// ---------------------------------------------------------------------------

void save_graph(std::ostream& out, const SceneGraph& graph);
void save_graph(const std::filesystem::path& path, const SceneGraph& graph);
SceneGraph load_graph(std::istream& in, const std::string& name);
SceneGraph load_graph(const std::filesystem::path& path);
std::uint64_t graph_byte_size(const SceneGraph& graph);

// ---------------------------------------------------------------------------
// Dense baseline: "HSGD", u32 version, u32 dim, u64 count, then per featured
// reference point f32 xyz and f32[dim] feature.
// ---------------------------------------------------------------------------

void write_dense_dump(std::ostream& out, const PointFeatureMap& map);
std::uint64_t dense_dump_byte_size(const PointFeatureMap& map);

// ---------------------------------------------------------------------------
// Label sets: one label per line ('#' comments and blank lines ignored).
// Text embeddings: "text<TAB>v0 v1 ..." per line.
// ---------------------------------------------------------------------------

std::vector<std::string> load_labels(const std::filesystem::path& path);
std::vector<std::pair<std::string, Embedding>> load_text_embeddings(const std::filesystem::path& path);
void save_text_embeddings(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, Embedding>>& entries);

/// Bytes written to a stream that discards them.
class ByteCounter {
 public:
  ByteCounter();
  ~ByteCounter();
  std::ostream& stream();
  std::uint64_t count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hsg
