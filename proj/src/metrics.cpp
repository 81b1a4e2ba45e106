#include "hsg/metrics.hpp"
#include "hsg/io.hpp"
#include "hsg/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace hsg {

std::vector<int> transfer_labels(const LabeledCloud& pred, const PointCloud& gt, std::size_t k) {
  if (pred.cloud.empty()) throw Error("empty input");
  if (pred.labels.size() != pred.cloud.size()) throw Error("label count does not match point count");
  if (k == 0) throw Error("k must be positive");
  const SpatialIndex index(pred.cloud);
  std::vector<int> out;
  out.reserve(gt.size());
  for (const auto& p : gt.points) {
    const auto nn = index.knn(p, k);
    std::map<int, int> votes;
    int top = 0;
    for (auto i : nn) top = std::max(top, ++votes[pred.labels[i]]);
    for (auto i : nn) {
      if (votes[pred.labels[i]] == top) {
        out.push_back(pred.labels[i]);
        break;
      }
    }
  }
  return out;
}

SegMetrics seg_metrics(std::span<const int> pred, std::span<const int> gt, int num_classes) {
  if (pred.size() != gt.size()) throw Error("prediction and ground truth differ in length");
  if (num_classes < 1) throw Error("class count must be positive");
  std::vector<double> tp(num_classes, 0.0), fp(num_classes, 0.0), fn(num_classes, 0.0), support(num_classes, 0.0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int g = gt[i];
    const int p = pred[i];
    if (g < 0 || g >= num_classes) throw Error("ground-truth label out of range");
    support[g] += 1.0;
    if (p == g) {
      tp[g] += 1.0;
      continue;
    }
    fn[g] += 1.0;
    if (p >= 0 && p < num_classes) fp[p] += 1.0;
  }
  SegMetrics m;
  int present = 0;
  const double total = static_cast<double>(gt.size());
  for (int c = 0; c < num_classes; ++c) {
    if (support[c] == 0.0) continue;
    ++present;
    const double iou = tp[c] / (tp[c] + fp[c] + fn[c]);
    m.miou += iou;
    m.fmiou += support[c] / total * iou;
    m.macc += tp[c] / support[c];
  }
  if (present > 0) {
    m.miou /= present;
    m.macc /= present;
  }
  return m;
}

int topk_rank(const Embedding& pred, int gt_label, std::span<const Embedding> categories) {
  if (gt_label < 0 || gt_label >= static_cast<int>(categories.size())) throw Error("ground-truth label out of range");
  const double target = pred.cosine(categories[gt_label]);
  int rank = 1;
  for (int j = 0; j < static_cast<int>(categories.size()); ++j) {
    if (j == gt_label) continue;
    const double s = pred.cosine(categories[j]);
    if (s > target || (s == target && j < gt_label)) ++rank;
  }
  return rank;
}

TopKCurve aggregate_ranks(std::span<const int> ranks, int num_categories) {
  if (num_categories < 1) throw Error("category count must be positive");
  TopKCurve curve;
  curve.accuracy.assign(num_categories, 0.0);
  if (ranks.empty()) return curve;
  std::vector<double> hist(num_categories + 1, 0.0);
  for (int r : ranks) {
    if (r < 1 || r > num_categories) throw Error("rank out of range");
    hist[r] += 1.0;
  }
  double running = 0.0;
  for (int k = 1; k <= num_categories; ++k) {
    running += hist[k];
    curve.accuracy[k - 1] = running / static_cast<double>(ranks.size());
  }
  if (num_categories == 1) {
    curve.auc = curve.accuracy[0];
    return curve;
  }
  double area = 0.0;
  for (int k = 1; k < num_categories; ++k) area += 0.5 * (curve.accuracy[k - 1] + curve.accuracy[k]);
  curve.auc = area / static_cast<double>(num_categories - 1);
  return curve;
}

FloorAccuracy floor_accuracy(std::span<const FloorInterval> pred, std::span<const FloorInterval> gt, double tol) {
  FloorAccuracy out{0.0, static_cast<int>(pred.size()), static_cast<int>(gt.size())};
  if (pred.size() != gt.size()) return out;
  auto sorted = [](std::span<const FloorInterval> v) {
    std::vector<FloorInterval> s(v.begin(), v.end());
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.z_floor < b.z_floor; });
    return s;
  };
  const auto p = sorted(pred);
  const auto g = sorted(gt);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p[i].z_floor - g[i].z_floor) > tol || std::abs(p[i].z_ceiling - g[i].z_ceiling) > tol) return out;
  }
  out.acc = 1.0;
  return out;
}

double neighbor_fraction(const PointCloud& a, const PointCloud& b, double dist) {
  if (a.empty()) throw Error("empty input");
  if (b.empty()) return 0.0;
  const SpatialIndex index(b);
  return overlap(a, index, dist);
}

PrecisionRecall region_pr(std::span<const PointCloud> pred, std::span<const PointCloud> gt, double dist) {
  if (pred.empty() || gt.empty()) throw Error("empty input");
  std::vector<std::unique_ptr<SpatialIndex>> pred_index, gt_index;
  for (const auto& c : pred) pred_index.push_back(c.empty() ? nullptr : std::make_unique<SpatialIndex>(c));
  for (const auto& c : gt) gt_index.push_back(c.empty() ? nullptr : std::make_unique<SpatialIndex>(c));
  auto side = [&](std::span<const PointCloud> from, const std::vector<std::unique_ptr<SpatialIndex>>& to) {
    double sum = 0.0;
    for (const auto& room : from) {
      double best = 0.0;
      if (!room.empty()) {
        for (const auto& idx : to) {
          if (idx) best = std::max(best, overlap(room, *idx, dist));
        }
      }
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  return {side(pred, gt_index), side(gt, pred_index)};
}

namespace {

std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> voxels(const PointCloud& c, double voxel) {
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> out;
  for (const auto& p : c.points) {
    out.insert({static_cast<std::int64_t>(std::floor(p.x() / voxel)), static_cast<std::int64_t>(std::floor(p.y() / voxel)),
                static_cast<std::int64_t>(std::floor(p.z() / voxel))});
  }
  return out;
}

}  // namespace

double voxel_iou(const PointCloud& a, const PointCloud& b, double voxel) {
  if (voxel <= 0.0) throw Error("voxel size must be positive");
  const auto va = voxels(a, voxel);
  const auto vb = voxels(b, voxel);
  if (va.empty() && vb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& v : va) inter += vb.count(v);
  return static_cast<double>(inter) / static_cast<double>(va.size() + vb.size() - inter);
}

bool retrieval_success(const PointCloud& pred, const PointCloud& gt, double voxel, double min_iou) {
  return voxel_iou(pred, gt, voxel) > min_iou;
}

SizeReport representation_size(const SceneGraph& graph, const PointFeatureMap& dense) {
  if (dense.featured_count() == 0) throw Error("empty baseline");
  SizeReport r;
  r.graph_bytes = graph_byte_size(graph);
  r.dense_bytes = dense_dump_byte_size(dense);
  r.ratio = static_cast<double>(r.graph_bytes) / static_cast<double>(r.dense_bytes);
  return r;
}

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int rows = static_cast<int>(cost.size());
  if (rows == 0) return {};
  const int cols = static_cast<int>(cost[0].size());
  for (const auto& row : cost) {
    if (static_cast<int>(row.size()) != cols) throw Error("cost matrix is ragged");
  }
  if (cols == 0) return std::vector<int>(rows, -1);
  if (rows > cols) {
    std::vector<std::vector<double>> t(cols, std::vector<double>(rows));
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) t[j][i] = cost[i][j];
    }
    const auto col_to_row = hungarian(t);
    std::vector<int> out(rows, -1);
    for (int j = 0; j < cols; ++j) {
      if (col_to_row[j] >= 0) out[col_to_row[j]] = j;
    }
    return out;
  }

  // Shortest augmenting paths with potentials, 1-based as in the classic
  // formulation; rows <= cols.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> p(cols + 1, 0), way(cols + 1, 0);
  for (int i = 1; i <= rows; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> out(rows, -1);
  for (int j = 1; j <= cols; ++j) {
    if (p[j] > 0) out[p[j] - 1] = j - 1;
  }
  return out;
}

std::vector<int> match_objects(std::span<const PointCloud> pred, std::span<const PointCloud> gt, double voxel,
                               double min_iou) {
  std::vector<std::vector<double>> iou(pred.size(), std::vector<double>(gt.size(), 0.0));
  std::vector<std::vector<double>> cost(pred.size(), std::vector<double>(gt.size(), 1.0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      iou[i][j] = voxel_iou(pred[i], gt[j], voxel);
      cost[i][j] = 1.0 - iou[i][j];
    }
  }
  auto match = hungarian(cost);
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] >= 0 && !(iou[i][match[i]] > min_iou)) match[i] = -1;
  }
  return match;
}

}  // namespace hsg
