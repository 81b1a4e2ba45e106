#pragma once

// Brute-force reference implementations. They share no code with the library
// beyond plain data types and squared_distance.

#include "hsg/embedding.hpp"
#include "hsg/geometry.hpp"
#include "hsg/segment_merger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <vector>

namespace hsg::oracle {

inline bool has_neighbor(const Point3& p, const PointCloud& b, double dist) {
  for (const auto& q : b.points) {
    if (squared_distance(p, q) <= dist * dist) return true;
  }
  return false;
}

inline double directed_overlap(const PointCloud& a, const PointCloud& b, double dist) {
  std::size_t hits = 0;
  for (const auto& p : a.points) hits += has_neighbor(p, b, dist);
  return static_cast<double>(hits) / static_cast<double>(a.size());
}

/// Components of the graph whose edges are pairs with R >= tau, found by
/// repeated relabelling until stable. Components listed by smallest id.
inline std::vector<std::set<int>> merge_partition(const std::vector<Segment>& segs, double dist, double tau) {
  const std::size_t n = segs.size();
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) {
        r[i][j] = std::max(directed_overlap(segs[i].cloud, segs[j].cloud, dist),
                           directed_overlap(segs[j].cloud, segs[i].cloud, dist));
      }
    }
  }
  std::vector<int> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = segs[i].id;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && r[i][j] >= tau && label[j] < label[i]) {
          label[i] = label[j];
          changed = true;
        }
      }
    }
  }
  std::map<int, std::set<int>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[label[i]].insert(segs[i].id);
  std::vector<std::set<int>> out;
  for (auto& [k, g] : groups) out.push_back(g);
  return out;
}

/// Textbook DBSCAN with Euclidean distance, visiting points in input order.
inline std::vector<int> dbscan(const std::vector<Eigen::VectorXd>& x, double eps, int min_pts) {
  const int n = static_cast<int>(x.size());
  auto neighbors = [&](int i) {
    std::vector<int> out;
    for (int j = 0; j < n; ++j) {
      if ((x[i] - x[j]).norm() <= eps) out.push_back(j);
    }
    return out;
  };
  std::vector<int> label(n, -2);  // -2 unvisited
  int cluster = 0;
  for (int i = 0; i < n; ++i) {
    if (label[i] != -2) continue;
    auto nb = neighbors(i);
    if (static_cast<int>(nb.size()) < min_pts) {
      label[i] = -1;
      continue;
    }
    label[i] = cluster;
    std::vector<int> seeds(nb.begin(), nb.end());
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const int j = seeds[s];
      if (label[j] == -1) label[j] = cluster;
      if (label[j] != -2) continue;
      label[j] = cluster;
      auto nj = neighbors(j);
      if (static_cast<int>(nj.size()) >= min_pts) seeds.insert(seeds.end(), nj.begin(), nj.end());
    }
    ++cluster;
  }
  return label;
}

/// Full sort of the prediction by (distance, index); majority of the first
/// k labels, ties to the earliest listed.
inline std::vector<int> knn_majority(const PointCloud& pred, const std::vector<int>& labels, const PointCloud& gt,
                                     std::size_t k) {
  std::vector<int> out;
  for (const auto& g : gt.points) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < pred.size(); ++i) d.push_back({squared_distance(pred.points[i], g), i});
    std::sort(d.begin(), d.end());
    d.resize(std::min(k, d.size()));
    std::map<int, int> votes;
    for (const auto& [dd, i] : d) ++votes[labels[i]];
    int best = labels[d.front().second];
    for (const auto& [dd, i] : d) {
      if (votes[labels[i]] > votes[best]) best = labels[i];
    }
    out.push_back(best);
  }
  return out;
}

struct SegScores {
  double miou, fmiou, macc;
};

inline SegScores confusion_metrics(const std::vector<int>& pred, const std::vector<int>& gt, int c) {
  std::vector<std::vector<double>> m(c, std::vector<double>(c + 1, 0.0));  // column c: out of range
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int p = pred[i] >= 0 && pred[i] < c ? pred[i] : c;
    m[gt[i]][p] += 1.0;
  }
  SegScores s{0, 0, 0};
  int present = 0;
  for (int k = 0; k < c; ++k) {
    double row = 0, col = 0;
    for (int j = 0; j <= c; ++j) row += m[k][j];
    for (int i = 0; i < c; ++i) col += m[i][k];
    if (row == 0) continue;
    ++present;
    const double iou = m[k][k] / (row + col - m[k][k]);
    s.miou += iou;
    s.fmiou += row / static_cast<double>(gt.size()) * iou;
    s.macc += m[k][k] / row;
  }
  s.miou /= present;
  s.macc /= present;
  return s;
}

/// Rank by full sort of (score desc, index asc).
inline int full_sort_rank(const Embedding& pred, int gt, const std::vector<Embedding>& cats) {
  std::vector<std::pair<double, int>> s;
  for (int j = 0; j < static_cast<int>(cats.size()); ++j) {
    s.push_back({-static_cast<double>(pred.values().cast<double>().dot(cats[j].values().cast<double>())), j});
  }
  std::sort(s.begin(), s.end());
  for (int r = 0; r < static_cast<int>(s.size()); ++r) {
    if (s[r].second == gt) return r + 1;
  }
  return -1;
}

/// Area under accuracy(k) on x = (k - 1) / (N - 1), by summing trapezoids
/// with explicit x coordinates.
inline double auc_from_ranks(const std::vector<int>& ranks, int n) {
  std::vector<double> acc(n);
  for (int k = 1; k <= n; ++k) {
    int hit = 0;
    for (int r : ranks) hit += r <= k;
    acc[k - 1] = static_cast<double>(hit) / ranks.size();
  }
  if (n == 1) return acc[0];
  double area = 0.0;
  for (int k = 1; k < n; ++k) {
    const double x0 = static_cast<double>(k - 1) / (n - 1);
    const double x1 = static_cast<double>(k) / (n - 1);
    area += (x1 - x0) * (acc[k - 1] + acc[k]) / 2.0;
  }
  return area;
}

inline std::pair<double, double> region_pr(const std::vector<PointCloud>& pred, const std::vector<PointCloud>& gt,
                                           double dist) {
  auto side = [&](const std::vector<PointCloud>& a, const std::vector<PointCloud>& b) {
    double sum = 0.0;
    for (const auto& x : a) {
      double best = 0.0;
      for (const auto& y : b) {
        if (!x.empty()) best = std::max(best, directed_overlap(x, y, dist));
      }
      sum += best;
    }
    return sum / a.size();
  };
  return {side(pred, gt), side(gt, pred)};
}

inline double voxel_iou(const PointCloud& a, const PointCloud& b, double voxel) {
  auto keys = [&](const PointCloud& c) {
    std::vector<std::tuple<long long, long long, long long>> k;
    for (const auto& p : c.points) {
      k.emplace_back(static_cast<long long>(std::floor(p.x() / voxel)), static_cast<long long>(std::floor(p.y() / voxel)),
                     static_cast<long long>(std::floor(p.z() / voxel)));
    }
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
  };
  const auto ka = keys(a), kb = keys(b);
  std::vector<std::tuple<long long, long long, long long>> inter, uni;
  std::set_intersection(ka.begin(), ka.end(), kb.begin(), kb.end(), std::back_inserter(inter));
  std::set_union(ka.begin(), ka.end(), kb.begin(), kb.end(), std::back_inserter(uni));
  return uni.empty() ? 0.0 : static_cast<double>(inter.size()) / uni.size();
}

/// All-pairs shortest path lengths; +inf when unreachable.
inline std::vector<std::vector<double>> floyd_warshall(int n, const std::vector<std::tuple<int, int, double>>& edges) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& [a, b, w] : edges) {
    d[a][b] = std::min(d[a][b], w);
    d[b][a] = std::min(d[b][a], w);
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  return d;
}

/// Frontier-expansion flood: repeatedly expand the labelled, unexpanded cell
/// with the highest field value (lowest index on ties); its unlabelled
/// non-wall neighbours, in ascending index order, inherit its label.
inline std::vector<int> flood(int w, int h, const std::vector<float>& field, const std::vector<int>& seeds,
                              const std::vector<unsigned char>& walls) {
  const int n = w * h;
  std::vector<int> label(seeds);
  std::vector<char> expanded(n, 0);
  while (true) {
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (label[i] < 0 || expanded[i]) continue;
      if (best < 0 || field[i] > field[best]) best = i;
    }
    if (best < 0) break;
    expanded[best] = 1;
    const int x = best % w, y = best / w;
    std::vector<int> nb;
    if (y > 0) nb.push_back(best - w);
    if (x > 0) nb.push_back(best - 1);
    if (x + 1 < w) nb.push_back(best + 1);
    if (y + 1 < h) nb.push_back(best + w);
    for (int j : nb) {
      if (label[j] < 0 && !walls[j]) label[j] = label[best];
    }
  }
  return label;
}

}  // namespace hsg::oracle
