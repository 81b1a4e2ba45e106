#include "hsg/feature_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace hsg {

void FusionWeights::validate() const {
  if (global < 0.0 || local < 0.0 || mask < 0.0) throw Error("fusion weights must be nonnegative");
  if (std::abs(global + local + mask - 1.0) > 1e-9) throw Error("fusion weights must sum to 1");
}

Embedding fuse_embeddings(const Embedding& f_global, const Embedding& f_local, const Embedding& f_maskonly,
                          const FusionWeights& w) {
  w.validate();
  if (f_global.dim() != f_local.dim() || f_global.dim() != f_maskonly.dim()) {
    throw Error("embedding dimension mismatch");
  }
  const Eigen::VectorXd sum = w.global * f_global.values().cast<double>() +
                              w.local * f_local.values().cast<double>() +
                              w.mask * f_maskonly.values().cast<double>();
  auto fused = Embedding::try_normalized(sum);
  if (!fused) throw Error("degenerate fusion");
  return *fused;
}

Embedding fuse_mask(const MaskObservation& obs, const FusionWeights& w) {
  return fuse_embeddings(obs.f_global, obs.f_local, obs.f_maskonly, w);
}

PointFeatureMap::PointFeatureMap(PointCloud reference, int dim)
    : reference_(std::move(reference)), dim_(dim) {
  if (dim_ < 1) throw Error("feature dimension must be positive");
  index_ = std::make_unique<SpatialIndex>(reference_);
  sums_.assign(reference_.size() * static_cast<std::size_t>(dim_), 0.0f);
  counts_.assign(reference_.size(), 0);
  states_.assign(reference_.size(), PointFeatureState::kFeatureless);
}

void PointFeatureMap::splat(const PointCloud& obs_points, const Embedding& f, double dist) {
  if (finalized_) throw Error("feature map already finalized");
  if (f.dim() != dim_) throw Error("embedding dimension mismatch");
  if (dist <= 0.0) throw Error("splat distance must be positive");
  for (const auto& p : obs_points.points) {
    const auto idx = index_->nearest_within(p, dist);
    if (!idx) continue;
    float* col = sums_.data() + *idx * static_cast<std::size_t>(dim_);
    Eigen::Map<Eigen::VectorXf>(col, dim_) += f.values();
    ++counts_[*idx];
  }
}

void PointFeatureMap::finalize() {
  if (finalized_) return;
  for (std::size_t i = 0; i < reference_.size(); ++i) {
    Eigen::Map<Eigen::VectorXf> col(sums_.data() + i * static_cast<std::size_t>(dim_), dim_);
    if (counts_[i] == 0) {
      states_[i] = PointFeatureState::kFeatureless;
      continue;
    }
    const Eigen::VectorXd mean = col.cast<double>() / static_cast<double>(counts_[i]);
    const double norm = mean.norm();
    if (norm < 1e-9) {
      states_[i] = PointFeatureState::kDegenerate;
      col.setZero();
      continue;
    }
    col = (mean / norm).cast<float>();
    states_[i] = PointFeatureState::kFeatured;
  }
  finalized_ = true;
}

Embedding PointFeatureMap::feature(std::size_t i) const {
  if (!finalized_ || states_[i] != PointFeatureState::kFeatured) {
    throw Error("reference point " + std::to_string(i) + " has no feature");
  }
  return Embedding::from_unit(Eigen::VectorXf(column(i)));
}

Eigen::Map<const Eigen::VectorXf> PointFeatureMap::column(std::size_t i) const {
  return Eigen::Map<const Eigen::VectorXf>(sums_.data() + i * static_cast<std::size_t>(dim_), dim_);
}

std::size_t PointFeatureMap::featured_count() const {
  return static_cast<std::size_t>(
      std::count(states_.begin(), states_.end(), PointFeatureState::kFeatured));
}

std::vector<int> density_cluster(std::span<const Embedding> features, double eps, int min_pts) {
  const std::vector<double> ones(features.size(), 1.0);
  return density_cluster(features, ones, eps, min_pts);
}

std::vector<int> density_cluster(std::span<const Embedding> features, std::span<const double> weights,
                                 double eps, int min_pts) {
  if (eps <= 0.0) throw Error("eps must be positive");
  if (min_pts < 1) throw Error("min_pts must be >= 1");
  const std::size_t n = features.size();
  if (n == 0) return {};
  const int dim = features.front().dim();
  Eigen::MatrixXf stacked(dim, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) stacked.col(static_cast<Eigen::Index>(i)) = features[i].values();
  // Squared Euclidean distance between unit vectors is 2 - 2 cos.
  const double eps2 = eps * eps;
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<bool> core(n, false);
  Eigen::VectorXf dots(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    dots.noalias() = stacked.transpose() * stacked.col(static_cast<Eigen::Index>(i));
    double mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d2 = std::max(0.0, 2.0 - 2.0 * static_cast<double>(dots[static_cast<Eigen::Index>(j)]));
      if (d2 <= eps2 || i == j) {
        neighbors[i].push_back(j);
        mass += weights[j];
      }
    }
    core[i] = mass >= static_cast<double>(min_pts);
  }

  std::vector<int> labels(n, -2);  // -2 unvisited
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != -2) continue;
    if (!core[i]) {
      labels[i] = -1;
      continue;
    }
    const int cluster = next++;
    labels[i] = cluster;
    std::deque<std::size_t> queue{i};
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      if (!core[p]) continue;
      for (std::size_t q : neighbors[p]) {
        if (labels[q] == -2 || labels[q] == -1) {
          const bool fresh = labels[q] == -2;
          labels[q] = cluster;
          if (fresh && core[q]) queue.push_back(q);
        }
      }
    }
  }
  return labels;
}

namespace {

std::size_t closest_to(std::span<const Embedding> features, const std::vector<std::size_t>& members,
                       const Eigen::VectorXd& direction) {
  std::size_t best = members.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t m : members) {
    const double s = features[m].values().cast<double>().dot(direction);
    if (s > best_score) {
      best_score = s;
      best = m;
    }
  }
  return best;
}

Eigen::VectorXd weighted_sum(std::span<const Embedding> features, std::span<const double> weights,
                             const std::vector<std::size_t>& members) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(features.front().dim());
  for (std::size_t m : members) sum += weights[m] * features[m].values().cast<double>();
  return sum;
}

}  // namespace

Embedding representative_feature(std::span<const Embedding> features, std::span<const double> weights,
                                 const SegmentFeatureParams& params) {
  if (features.empty()) throw Error("featureless segment");
  std::vector<std::size_t> all(features.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  if (!params.use_clustering) return Embedding::normalized(weighted_sum(features, weights, all));

  const auto labels = density_cluster(features, weights, params.eps, params.min_pts);
  int n_clusters = 0;
  for (int l : labels) n_clusters = std::max(n_clusters, l + 1);
  if (n_clusters == 0) {
    // Compare by direction of the unnormalized mean; cosine ordering is the same.
    return features[closest_to(features, all, weighted_sum(features, weights, all))];
  }
  std::vector<double> mass(n_clusters, 0.0);
  std::vector<std::vector<std::size_t>> members(n_clusters);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    mass[labels[i]] += weights[i];
    members[labels[i]].push_back(i);
  }
  // Cluster ids follow discovery order, so the first maximum holds the lowest index.
  const auto best = static_cast<std::size_t>(std::max_element(mass.begin(), mass.end()) - mass.begin());
  return features[closest_to(features, members[best], weighted_sum(features, weights, members[best]))];
}

Embedding segment_feature(const Segment& seg, const PointFeatureMap& map, const SegmentFeatureParams& params) {
  return segment_feature(seg.cloud, map, params);
}

Embedding segment_feature(const PointCloud& cloud, const PointFeatureMap& map, const SegmentFeatureParams& params) {
  if (!map.finalized()) throw Error("feature map not finalized");
  std::map<std::size_t, double> gathered;
  for (const auto& p : cloud.points) {
    const std::size_t ref = map.index().nearest(p);
    if (map.state(ref) != PointFeatureState::kFeatured) continue;
    gathered[ref] += 1.0;
  }
  if (gathered.empty()) throw Error("featureless segment");

  std::vector<Embedding> features;
  std::vector<double> weights;
  const std::size_t stride =
      params.max_features > 0 ? (gathered.size() + params.max_features - 1) / params.max_features : 1;
  std::size_t k = 0;
  for (const auto& [ref, w] : gathered) {
    if (k++ % stride != 0) continue;
    features.push_back(map.feature(ref));
    weights.push_back(w);
  }
  return representative_feature(features, weights, params);
}

}  // namespace hsg
