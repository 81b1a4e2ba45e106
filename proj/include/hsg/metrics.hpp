#pragma once

#include "hsg/embedding.hpp"
#include "hsg/feature_fusion.hpp"
#include "hsg/geometry.hpp"
#include "hsg/hierarchy.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hsg {

struct LabeledCloud {
  PointCloud cloud;
  std::vector<int> labels;  // one per point, in [0, C)
};

/// Majority label among the k nearest predicted points of each GT point.
/// Count ties go to the label of the nearest tied neighbor.
std::vector<int> transfer_labels(const LabeledCloud& pred, const PointCloud& gt, std::size_t k = 5);

struct SegMetrics {
  double miou = 0.0;
  double fmiou = 0.0;  // IoU weighted by GT class frequency
  double macc = 0.0;
};

/// Confusion-matrix metrics over the classes present in the GT labels.
/// Labels outside [0, C) count as wrong predictions.
SegMetrics seg_metrics(std::span<const int> pred, std::span<const int> gt, int num_classes);

/// 1 + number of categories scoring strictly higher than the GT category,
/// plus tied categories with a lower index.
int topk_rank(const Embedding& pred, int gt_label, std::span<const Embedding> categories);

struct TopKCurve {
  std::vector<double> accuracy;  // accuracy[k - 1] = fraction with rank <= k
  double auc = 0.0;              // trapezoid over x = (k - 1) / (N - 1)
};

TopKCurve aggregate_ranks(std::span<const int> ranks, int num_categories);

struct FloorAccuracy {
  double acc = 0.0;
  int n_pred = 0;
  int n_gt = 0;
};

/// 1 when the counts agree and every boundary of the i-th predicted floor
/// (ascending) lies within `tol` of the i-th GT floor, else 0.
FloorAccuracy floor_accuracy(std::span<const FloorInterval> pred, std::span<const FloorInterval> gt,
                             double tol = 0.5);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// Precision: mean over predicted rooms of the best fraction of their points
/// with a neighbor within `dist` in one GT room. Recall swaps the roles.
PrecisionRecall region_pr(std::span<const PointCloud> pred, std::span<const PointCloud> gt, double dist);

/// Fraction of points in `a` with a neighbor within `dist` in `b`.
double neighbor_fraction(const PointCloud& a, const PointCloud& b, double dist);

/// IoU of the occupied voxel sets.
double voxel_iou(const PointCloud& a, const PointCloud& b, double voxel);
bool retrieval_success(const PointCloud& pred, const PointCloud& gt, double voxel, double min_iou = 0.1);

struct SizeReport {
  std::uint64_t graph_bytes = 0;
  std::uint64_t dense_bytes = 0;
  double ratio = 0.0;
};

/// Serialized graph bytes against the dense per-point feature dump. Throws
/// "empty baseline" when the map has no featured points.
SizeReport representation_size(const SceneGraph& graph, const PointFeatureMap& dense);

/// Minimum-cost assignment (Hungarian method) on a rows x cols cost matrix;
/// returns the column per row or -1.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

/// One-to-one matching maximizing total voxel IoU; pairs at or below
/// `min_iou` are discarded. Returns the GT index per prediction or -1.
std::vector<int> match_objects(std::span<const PointCloud> pred, std::span<const PointCloud> gt, double voxel,
                               double min_iou = 0.5);

}  // namespace hsg
