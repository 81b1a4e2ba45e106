#include "hsg/pipeline.hpp"
#include "hsg/parallel.hpp"

#include <algorithm>
#include <optional>
#include <set>

namespace hsg {

std::vector<std::vector<Embedding>> fuse_frames(std::span<const FrameRecord> frames, const FusionWeights& weights) {
  std::vector<std::vector<Embedding>> out(frames.size());
  parallel_for(frames.size(), [&](std::size_t f) {
    for (const auto& m : frames[f].masks) out[f].push_back(fuse_embeddings(frames[f].global, m.local, m.maskonly, weights));
  });
  return out;
}

PointFeatureMap build_feature_map(std::span<const FrameRecord> frames, std::span<const std::vector<Embedding>> fused,
                                  const Config& config) {
  if (frames.empty()) throw Error("no frames");
  PointCloud all;
  for (const auto& f : frames) {
    for (const auto& m : f.masks) all.append(m.points);
  }
  if (all.empty()) throw Error("frames contain no mask points");
  PointFeatureMap map(voxel_downsample(all, config.reference_voxel), frames.front().global.dim());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (std::size_t m = 0; m < frames[f].masks.size(); ++m) map.splat(frames[f].masks[m].points, fused[f][m], config.splat_dist);
  }
  map.finalize();
  return map;
}

std::vector<Segment> merge_frames(std::span<const FrameRecord> frames, std::span<const std::vector<Embedding>> fused,
                                  const MergeParams& params) {
  SegmentMerger merger(params);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    std::vector<Segment> segs;
    for (std::size_t m = 0; m < frames[f].masks.size(); ++m) {
      if (frames[f].masks[m].points.empty()) continue;
      Segment s;
      s.cloud = frames[f].masks[m].points;
      s.embeddings = {fused[f][m]};
      segs.push_back(std::move(s));
    }
    merger.add_frame(std::move(segs));
  }
  return merger.release();
}

std::vector<LabelledEmbedding> label_embeddings(std::span<const std::string> labels, const TextEncoder& encoder) {
  std::vector<LabelledEmbedding> out;
  for (const auto& l : labels) out.push_back({l, category_embedding(encoder, l)});
  return out;
}

BuildResult build_from_frames(std::span<const FrameRecord> frames, const Config& config, const TextEncoder& encoder) {
  config.validate();
  if (frames.empty()) throw Error("no frames");
  const int dim = frames.front().global.dim();
  if (encoder.dim() != dim) {
    throw Error("encoder dimension " + std::to_string(encoder.dim()) + " differs from frame dimension " +
                std::to_string(dim));
  }
  for (const auto& f : frames) {
    if (f.global.dim() != dim) throw Error("frame " + std::to_string(f.frame_id) + " has a different embedding dimension");
  }

  const auto fused = fuse_frames(frames, config.fusion);
  BuildResult result;
  result.dense = std::make_unique<PointFeatureMap>(build_feature_map(frames, fused, config));
  const auto segments = merge_frames(frames, fused, config.merge);
  result.segments = segments.size();

  HierarchyInputs in;
  in.global_cloud = result.dense->reference();
  in.room_categories = label_embeddings(config.room_labels, encoder);
  in.object_labels = label_embeddings(config.object_labels, encoder);
  for (const auto& f : frames) {
    in.poses.push_back(f.pose);
    in.frame_globals.push_back(f.global);
  }

  std::vector<std::optional<Embedding>> features(segments.size());
  parallel_for(segments.size(), [&](std::size_t i) {
    try {
      features[i] = segment_feature(segments[i], *result.dense, config.feature);
    } catch (const Error&) {
      features[i].reset();
    }
  });
  const std::set<std::string> ignore(config.ignore_labels.begin(), config.ignore_labels.end());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!features[i]) {
      ++result.dropped_featureless;
      continue;
    }
    ObjectCandidate c;
    c.cloud = segments[i].cloud;
    c.feature = *features[i];
    if (!in.object_labels.empty()) {
      c.label = in.object_labels[top1_label(c.feature, in.object_labels)].label;
      if (ignore.count(c.label)) {
        ++result.dropped_ignored;
        continue;
      }
    }
    in.objects.push_back(std::move(c));
  }

  result.graph = build_scene_graph(in, encoder, config.hierarchy);
  return result;
}

}  // namespace hsg
