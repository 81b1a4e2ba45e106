#pragma once

#include "hsg/config.hpp"
#include "hsg/feature_fusion.hpp"
#include "hsg/hierarchy.hpp"
#include "hsg/io.hpp"
#include "hsg/segment_merger.hpp"

#include <memory>
#include <span>
#include <vector>

namespace hsg {

/// Fused embedding per mask of each frame.
std::vector<std::vector<Embedding>> fuse_frames(std::span<const FrameRecord> frames, const FusionWeights& weights);

/// Reference cloud (voxel-downsampled union of all mask points) with every
/// fused mask embedding splatted onto it, finalized.
PointFeatureMap build_feature_map(std::span<const FrameRecord> frames,
                                  std::span<const std::vector<Embedding>> fused, const Config& config);

/// Frame-by-frame segment registration.
std::vector<Segment> merge_frames(std::span<const FrameRecord> frames,
                                  std::span<const std::vector<Embedding>> fused, const MergeParams& params);

struct BuildResult {
  SceneGraph graph;
  std::unique_ptr<PointFeatureMap> dense;
  std::size_t segments = 0;
  std::size_t dropped_featureless = 0;
  std::size_t dropped_ignored = 0;
};

/// Frames -> segments -> features -> floors, rooms, objects and navigation.
BuildResult build_from_frames(std::span<const FrameRecord> frames, const Config& config,
                              const TextEncoder& encoder);

std::vector<LabelledEmbedding> label_embeddings(std::span<const std::string> labels, const TextEncoder& encoder);

}  // namespace hsg
