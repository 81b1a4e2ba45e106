#pragma once

#include "hsg/embedding.hpp"
#include "hsg/geometry.hpp"
#include "hsg/segment_merger.hpp"
#include "hsg/spatial_index.hpp"

#include <memory>
#include <span>
#include <vector>

namespace hsg {

/// Weights for the full-frame, crop and mask-only embeddings; they sum to 1.
struct FusionWeights {
  double global = 0.25;
  double local = 0.5;
  double mask = 0.25;

  void validate() const;
};

struct MaskObservation {
  PointCloud points;  // global frame
  Embedding f_global;
  Embedding f_local;
  Embedding f_maskonly;
};

/// normalize(w_g f_g + w_l f_l + w_m f_m). Throws "degenerate fusion" when the
/// weighted sum vanishes.
Embedding fuse_mask(const MaskObservation& obs, const FusionWeights& w);
Embedding fuse_embeddings(const Embedding& f_global, const Embedding& f_local, const Embedding& f_maskonly,
                          const FusionWeights& w);

enum class PointFeatureState : std::uint8_t { kFeatureless = 0, kFeatured = 1, kDegenerate = 2 };

/// Per-point feature accumulator over a reference cloud. Observations are
/// summed with splat(); finalize() turns the sums into normalized means.
class PointFeatureMap {
 public:
  PointFeatureMap(PointCloud reference, int dim);

  const PointCloud& reference() const { return reference_; }
  const SpatialIndex& index() const { return *index_; }
  int dim() const { return dim_; }
  std::size_t size() const { return reference_.size(); }

  /// Each observed point adds `f` to its nearest reference point within
  /// `dist`. Points with no reference neighbor in range contribute nothing.
  void splat(const PointCloud& obs_points, const Embedding& f, double dist);

  void finalize();
  bool finalized() const { return finalized_; }

  std::uint32_t count(std::size_t i) const { return counts_[i]; }
  PointFeatureState state(std::size_t i) const { return states_[i]; }
  /// Finalized feature of point i; requires state(i) == kFeatured.
  Embedding feature(std::size_t i) const;
  /// Raw column access (sum before finalize, unit feature after).
  Eigen::Map<const Eigen::VectorXf> column(std::size_t i) const;
  std::size_t featured_count() const;

 private:
  PointCloud reference_;
  int dim_;
  std::unique_ptr<SpatialIndex> index_;
  std::vector<float> sums_;  // dim_ floats per point
  std::vector<std::uint32_t> counts_;
  std::vector<PointFeatureState> states_;
  bool finalized_ = false;
};

/// DBSCAN over unit vectors with Euclidean distance. Labels are cluster ids in
/// order of discovery, -1 for noise. Points are visited in input order.
std::vector<int> density_cluster(std::span<const Embedding> features, double eps, int min_pts);

/// Same, where point i stands for weights[i] identical copies (multiset
/// semantics: a point is core when the total weight within eps is >= min_pts).
std::vector<int> density_cluster(std::span<const Embedding> features, std::span<const double> weights,
                                 double eps, int min_pts);

struct SegmentFeatureParams {
  double eps = 0.2;
  int min_pts = 5;
  bool use_clustering = true;     // false: plain normalized mean (ablation)
  std::size_t max_features = 2048;  // unique gathered features kept (strided)
};

/// Picks the member of the heaviest density cluster closest to the cluster's
/// weighted mean. Equal-weight clusters resolve to the one containing the
/// lowest-index feature. All-noise input falls back to the member closest to
/// the overall mean. With clustering disabled, returns the normalized mean.
Embedding representative_feature(std::span<const Embedding> features, std::span<const double> weights,
                                 const SegmentFeatureParams& params);

/// Gathers the feature of the nearest reference point of every segment point
/// (featureless or degenerate reference points are skipped) and reduces them
/// with representative_feature. Throws "featureless segment" when nothing is
/// gathered.
Embedding segment_feature(const Segment& seg, const PointFeatureMap& map, const SegmentFeatureParams& params);
Embedding segment_feature(const PointCloud& cloud, const PointFeatureMap& map, const SegmentFeatureParams& params);

}  // namespace hsg
