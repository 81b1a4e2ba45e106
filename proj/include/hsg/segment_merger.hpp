#pragma once

#include "hsg/embedding.hpp"
#include "hsg/geometry.hpp"
#include "hsg/spatial_index.hpp"

#include <map>
#include <memory>
#include <span>
#include <vector>

namespace hsg {

/// Global 3D object hypothesis accumulated across frames.
struct Segment {
  int id = 0;
  PointCloud cloud;
  std::vector<Embedding> embeddings;
  int frame_count = 1;
};

struct OverlapEdge {
  int a = 0;  // a < b
  int b = 0;
  double weight = 0.0;
};

/// Undirected graph over segment ids weighted by the pairwise overlap ratio.
struct OverlapGraph {
  std::vector<int> nodes;
  std::vector<OverlapEdge> edges;
};

struct MergeParams {
  double dist = 0.025;       // neighbor distance for overlap, meters
  double tau_merge = 0.75;   // minimum edge weight kept in the overlap graph
  double voxel = 0.02;       // downsampling applied to merged clouds
  std::size_t min_points = 10;
};

double pair_overlap_ratio(const Segment& a, const Segment& b, double dist);

/// All pairwise edges with weight > 0.
OverlapGraph build_overlap_graph(std::span<const Segment> segments, double dist);

/// Connected components of the graph restricted to edges with weight >= tau.
/// Components are listed by smallest member id; members ascending.
std::vector<std::vector<int>> thresholded_components(const OverlapGraph& graph, double tau);

/// Union of clouds (then voxel downsampled), concatenated embeddings, summed
/// frame counts. The result carries the smallest member id.
Segment merge_segments(std::span<const Segment> parts, double voxel);

/// Registers one frame of segments (already in the global frame) against the
/// global set: every connected component of the thresholded overlap graph over
/// global and frame segments becomes one segment. Frame segments with fewer
/// than `min_points` points after downsampling are dropped. Output is sorted by
/// id; frame segment ids must not collide with global ids.
std::vector<Segment> register_frame(std::vector<Segment> global, std::vector<Segment> frame_segs,
                                    const MergeParams& params);

/// Stateful driver for frame-by-frame registration. Assigns fresh ids to
/// incoming segments and caches spatial indices and pairwise ratios of
/// segments that did not change between frames; results match
/// register_frame exactly.
class SegmentMerger {
 public:
  explicit SegmentMerger(MergeParams params = {}) : params_(params) {}

  void add_frame(std::vector<Segment> frame_segs);
  const std::vector<Segment>& segments() const { return segments_; }
  std::vector<Segment> release() { return std::move(segments_); }
  const MergeParams& params() const { return params_; }

 private:
  MergeParams params_;
  std::vector<Segment> segments_;
  int next_id_ = 0;
  std::map<int, std::shared_ptr<const SpatialIndex>> indices_;
  std::map<std::pair<int, int>, double> ratios_;
};

}  // namespace hsg
