#include "hsg/segment_merger.hpp"

#include <algorithm>
#include <numeric>

namespace hsg {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct Prepared {
  std::shared_ptr<const SpatialIndex> index;
  Aabb box;
};

// Shared core of register_frame and SegmentMerger. The optional caches hold
// indices and ratios keyed by segment id for segments unchanged since they
// were computed.
std::vector<Segment> register_impl(std::vector<Segment> global, std::vector<Segment> frame_segs,
                                   const MergeParams& params,
                                   std::map<int, std::shared_ptr<const SpatialIndex>>* index_cache,
                                   std::map<std::pair<int, int>, double>* ratio_cache) {
  if (!(params.tau_merge > 0.0 && params.tau_merge <= 1.0)) throw Error("tau_merge must lie in (0, 1]");
  if (params.dist <= 0.0) throw Error("overlap distance must be positive");

  std::vector<Segment> incoming;
  for (auto& seg : frame_segs) {
    seg.cloud = voxel_downsample(seg.cloud, params.voxel);
    if (seg.cloud.size() < params.min_points) continue;
    incoming.push_back(std::move(seg));
  }
  if (incoming.empty()) return global;

  std::vector<Segment> all = std::move(global);
  for (auto& seg : incoming) all.push_back(std::move(seg));
  std::sort(all.begin(), all.end(), [](const Segment& a, const Segment& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].id == all[i - 1].id) throw Error("duplicate segment id " + std::to_string(all[i].id));
  }

  std::vector<Prepared> prep(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].cloud.empty()) throw Error("segment " + std::to_string(all[i].id) + " is empty");
    std::shared_ptr<const SpatialIndex> idx;
    if (index_cache) {
      if (auto it = index_cache->find(all[i].id); it != index_cache->end()) idx = it->second;
    }
    if (!idx) {
      idx = std::make_shared<const SpatialIndex>(all[i].cloud);
      if (index_cache) (*index_cache)[all[i].id] = idx;
    }
    prep[i] = {idx, idx->bounds()};
  }

  UnionFind uf(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (!prep[i].box.near(prep[j].box, params.dist)) continue;
      const std::pair<int, int> key{all[i].id, all[j].id};
      double r = 0.0;
      bool cached = false;
      if (ratio_cache) {
        if (auto it = ratio_cache->find(key); it != ratio_cache->end()) {
          r = it->second;
          cached = true;
        }
      }
      if (!cached) {
        r = std::max(overlap(*prep[i].index, *prep[j].index, params.dist),
                     overlap(*prep[j].index, *prep[i].index, params.dist));
        if (ratio_cache) (*ratio_cache)[key] = r;
      }
      if (r >= params.tau_merge) uf.unite(i, j);
    }
  }

  // Members are ascending by id, so the root of each set is its smallest id.
  std::vector<std::vector<std::size_t>> groups(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) groups[uf.find(i)].push_back(i);

  std::vector<Segment> out;
  for (std::size_t root = 0; root < all.size(); ++root) {
    const auto& members = groups[root];
    if (members.empty()) continue;
    if (members.size() == 1) {
      out.push_back(std::move(all[members.front()]));
      continue;
    }
    std::vector<Segment> parts;
    parts.reserve(members.size());
    for (std::size_t m : members) parts.push_back(std::move(all[m]));
    out.push_back(merge_segments(parts, params.voxel));
    if (index_cache || ratio_cache) {
      for (const auto& p : parts) {
        if (index_cache) index_cache->erase(p.id);
        if (ratio_cache) {
          std::erase_if(*ratio_cache, [&](const auto& kv) {
            return kv.first.first == p.id || kv.first.second == p.id;
          });
        }
      }
    }
  }
  return out;
}

}  // namespace

double pair_overlap_ratio(const Segment& a, const Segment& b, double dist) {
  return pair_overlap_ratio(a.cloud, b.cloud, dist);
}

OverlapGraph build_overlap_graph(std::span<const Segment> segments, double dist) {
  OverlapGraph graph;
  std::vector<SpatialIndex> indices;
  indices.reserve(segments.size());
  for (const auto& s : segments) {
    graph.nodes.push_back(s.id);
    indices.emplace_back(s.cloud);
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      const double r = pair_overlap_ratio(segments[i].cloud, indices[i], segments[j].cloud, indices[j], dist);
      if (r <= 0.0) continue;
      const auto [a, b] = std::minmax(segments[i].id, segments[j].id);
      graph.edges.push_back({a, b, r});
    }
  }
  return graph;
}

std::vector<std::vector<int>> thresholded_components(const OverlapGraph& graph, double tau) {
  std::vector<int> ids = graph.nodes;
  std::sort(ids.begin(), ids.end());
  auto pos = [&](int id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  UnionFind uf(ids.size());
  for (const auto& e : graph.edges) {
    if (e.weight >= tau) uf.unite(pos(e.a), pos(e.b));
  }
  std::vector<std::vector<int>> by_root(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) by_root[uf.find(i)].push_back(ids[i]);
  std::vector<std::vector<int>> out;
  for (auto& c : by_root) {
    if (!c.empty()) out.push_back(std::move(c));
  }
  return out;
}

Segment merge_segments(std::span<const Segment> parts, double voxel) {
  if (parts.empty()) throw Error("merge_segments requires at least one segment");
  if (parts.size() == 1) return parts.front();
  Segment out;
  out.id = parts.front().id;
  out.frame_count = 0;
  PointCloud cloud;
  for (const auto& p : parts) {
    out.id = std::min(out.id, p.id);
    cloud.append(p.cloud);
    out.embeddings.insert(out.embeddings.end(), p.embeddings.begin(), p.embeddings.end());
    out.frame_count += p.frame_count;
  }
  out.cloud = voxel_downsample(cloud, voxel);
  return out;
}

std::vector<Segment> register_frame(std::vector<Segment> global, std::vector<Segment> frame_segs,
                                    const MergeParams& params) {
  return register_impl(std::move(global), std::move(frame_segs), params, nullptr, nullptr);
}

void SegmentMerger::add_frame(std::vector<Segment> frame_segs) {
  for (auto& s : frame_segs) s.id = next_id_++;
  segments_ = register_impl(std::move(segments_), std::move(frame_segs), params_, &indices_, &ratios_);
}

}  // namespace hsg
