#include "hsg/hierarchy.hpp"

#include <algorithm>
#include <cmath>

namespace hsg {

namespace {

struct Peak {
  double height;
  double intensity;
};

// 1D density clustering of peak heights (min_pts = 1): peaks closer than eps
// chain into one cluster.
std::vector<std::vector<Peak>> cluster_heights(std::vector<Peak> peaks, double eps) {
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height < b.height; });
  std::vector<std::vector<Peak>> clusters;
  for (const auto& p : peaks) {
    if (clusters.empty() || p.height - clusters.back().back().height > eps) clusters.emplace_back();
    clusters.back().push_back(p);
  }
  return clusters;
}

std::vector<FloorInterval> pair_up(std::vector<Peak> kept) {
  std::sort(kept.begin(), kept.end(), [](const Peak& a, const Peak& b) { return a.height < b.height; });
  std::vector<FloorInterval> out;
  for (std::size_t i = 0; i + 1 < kept.size(); i += 2) out.push_back({kept[i].height, kept[i + 1].height});
  return out;
}

}  // namespace

std::vector<FloorInterval> segment_floors(const PointCloud& cloud, const FloorSegParams& params) {
  if (cloud.empty()) throw Error("empty input");
  if (params.bin <= 0.0) throw Error("histogram bin must be positive");

  double zmin = cloud.points.front().z();
  double zmax = zmin;
  for (const auto& p : cloud.points) {
    zmin = std::min(zmin, static_cast<double>(p.z()));
    zmax = std::max(zmax, static_cast<double>(p.z()));
  }
  const auto n_bins = static_cast<std::size_t>(std::floor((zmax - zmin) / params.bin)) + 1;
  std::vector<double> hist(n_bins, 0.0);
  for (const auto& p : cloud.points) {
    const auto b = std::min(n_bins - 1, static_cast<std::size_t>(std::floor((p.z() - zmin) / params.bin)));
    hist[b] += 1.0;
  }
  if (params.smoothing_bins > 1) {
    const int half = params.smoothing_bins / 2;
    std::vector<double> smoothed(n_bins, 0.0);
    for (std::size_t i = 0; i < n_bins; ++i) {
      for (int d = -half; d <= half; ++d) {
        const auto j = static_cast<std::ptrdiff_t>(i) + d;
        if (j >= 0 && j < static_cast<std::ptrdiff_t>(n_bins)) smoothed[i] += hist[static_cast<std::size_t>(j)];
      }
    }
    hist = std::move(smoothed);
  }

  // A bin is a peak when it is the leftmost maximum of the window centred on it.
  const auto half_window = static_cast<std::ptrdiff_t>(std::lround(params.peak_window / params.bin / 2.0));
  std::vector<Peak> peaks;
  double strongest = 0.0;
  for (std::size_t i = 0; i < n_bins; ++i) {
    if (hist[i] <= 0.0) continue;
    bool is_peak = true;
    for (std::ptrdiff_t d = -half_window; d <= half_window && is_peak; ++d) {
      const auto j = static_cast<std::ptrdiff_t>(i) + d;
      if (d == 0 || j < 0 || j >= static_cast<std::ptrdiff_t>(n_bins)) continue;
      const double v = hist[static_cast<std::size_t>(j)];
      if (d < 0 ? v >= hist[i] : v > hist[i]) is_peak = false;
    }
    if (!is_peak) continue;
    peaks.push_back({zmin + (static_cast<double>(i) + 0.5) * params.bin, hist[i]});
    strongest = std::max(strongest, hist[i]);
  }
  std::erase_if(peaks, [&](const Peak& p) { return p.intensity < params.peak_ratio * strongest; });

  std::vector<Peak> kept;
  for (auto& cluster : cluster_heights(peaks, params.cluster_eps)) {
    std::stable_sort(cluster.begin(), cluster.end(),
                     [](const Peak& a, const Peak& b) { return a.intensity > b.intensity; });
    for (std::size_t i = 0; i < std::min<std::size_t>(2, cluster.size()); ++i) kept.push_back(cluster[i]);
  }
  if (kept.size() % 2 == 1 && kept.size() > 2) {
    // Drop the weakest peak (the higher one on ties) and pair again.
    auto weakest = kept.begin();
    for (auto it = kept.begin(); it != kept.end(); ++it) {
      if (it->intensity < weakest->intensity ||
          (it->intensity == weakest->intensity && it->height > weakest->height)) {
        weakest = it;
      }
    }
    kept.erase(weakest);
  }
  if (kept.size() < 2) throw Error("cannot determine floors");
  if (kept.size() % 2 == 1) throw Error("cannot determine floors: odd number of height peaks");
  return pair_up(std::move(kept));
}

std::string floor_text(int index) { return "floor " + std::to_string(index + 1); }

Embedding floor_text_embedding(int index, const TextEncoder& encoder) {
  return encoder.encode(floor_text(index));
}

PointCloud crop_height(const PointCloud& cloud, double zmin, double zmax) {
  PointCloud out;
  const bool colored = cloud.has_colors();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double z = cloud.points[i].z();
    if (z < zmin || z > zmax) continue;
    out.points.push_back(cloud.points[i]);
    if (colored) out.colors.push_back(cloud.colors[i]);
  }
  return out;
}

int nearest_floor(std::span<const FloorInterval> floors, double z) {
  if (floors.empty()) throw Error("no floors");
  int best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < floors.size(); ++i) {
    if (floors[i].contains(z)) return static_cast<int>(i);
    const double gap = std::min(std::abs(z - floors[i].z_floor), std::abs(z - floors[i].z_ceiling));
    if (gap < best_gap) {
      best_gap = gap;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace hsg
