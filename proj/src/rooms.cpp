#include "hsg/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace hsg {

namespace {

constexpr double kInf = 1e20;  // finite so that differences stay defined

// Squared distance transform of a sampled function along one line
// (Felzenszwalb & Huttenlocher lower envelope of parabolas).
void distance_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  auto intersect = [&](int q, int p) {
    return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
  };
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

FieldGrid distance_field(const MaskGrid& sources) {
  const int w = sources.width();
  const int h = sources.height();
  std::vector<double> grid(sources.cells.size());
  bool any = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = sources[i] ? 0.0 : kInf;
    any = any || sources[i];
  }
  FieldGrid out(sources.frame, std::numeric_limits<float>::infinity());
  if (!any) return out;

  std::vector<double> f, d;
  f.resize(h);
  d.resize(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[sources.frame.index(x, y)];
    distance_1d(f, d);
    for (int y = 0; y < h; ++y) grid[sources.frame.index(x, y)] = d[y];
  }
  f.resize(w);
  d.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = grid[sources.frame.index(x, y)];
    distance_1d(f, d);
    for (int x = 0; x < w; ++x) grid[sources.frame.index(x, y)] = d[x];
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out[i] = static_cast<float>(std::sqrt(grid[i]) * sources.frame.cell);
  }
  return out;
}

MaskGrid dilate(const MaskGrid& mask, int radius_cells) {
  if (radius_cells <= 0) return mask;
  MaskGrid out(mask.frame, 0);
  const int r2 = radius_cells * radius_cells;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      for (int dy = -radius_cells; dy <= radius_cells; ++dy) {
        for (int dx = -radius_cells; dx <= radius_cells; ++dx) {
          if (dx * dx + dy * dy > r2 || !mask.frame.contains(x + dx, y + dy)) continue;
          out.at(x + dx, y + dy) = 1;
        }
      }
    }
  }
  return out;
}

LabelGrid connected_components(const MaskGrid& mask) {
  LabelGrid labels(mask.frame, -1);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y) || labels.at(x, y) >= 0) continue;
      const int label = next++;
      labels.at(x, y) = label;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        constexpr int kDx[4] = {1, -1, 0, 0};
        constexpr int kDy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + kDx[k];
          const int ny = cy + kDy[k];
          if (!mask.frame.contains(nx, ny) || !mask.at(nx, ny) || labels.at(nx, ny) >= 0) continue;
          labels.at(nx, ny) = label;
          stack.push_back({nx, ny});
        }
      }
    }
  }
  return labels;
}

LabelGrid watershed(const FieldGrid& field, const LabelGrid& seeds, const MaskGrid& walls) {
  if (field.frame != seeds.frame || field.frame != walls.frame) throw Error("watershed grids differ in shape");
  const GridFrame& frame = field.frame;
  LabelGrid labels(frame, -1);

  struct Item {
    float priority;
    std::size_t index;
    bool operator<(const Item& o) const {
      // std::priority_queue pops the largest: higher field first, then lower index.
      if (priority != o.priority) return priority < o.priority;
      return index > o.index;
    }
  };
  std::priority_queue<Item> queue;
  for (std::size_t i = 0; i < seeds.cells.size(); ++i) {
    if (seeds[i] < 0) continue;
    if (walls[i]) throw Error("watershed seed on a wall cell");
    labels[i] = seeds[i];
    queue.push({field[i], i});
  }
  constexpr int kDx[4] = {0, -1, 1, 0};
  constexpr int kDy[4] = {-1, 0, 0, 1};
  while (!queue.empty()) {
    const Item item = queue.top();
    queue.pop();
    const int x = static_cast<int>(item.index % frame.width);
    const int y = static_cast<int>(item.index / frame.width);
    for (int k = 0; k < 4; ++k) {
      const int nx = x + kDx[k];
      const int ny = y + kDy[k];
      if (!frame.contains(nx, ny)) continue;
      const std::size_t n = frame.index(nx, ny);
      if (labels[n] >= 0 || walls[n]) continue;
      labels[n] = labels[item.index];
      queue.push({field[n], n});
    }
  }
  return labels;
}

RoomSegmentation segment_rooms(const PointCloud& floor_cloud, const FloorInterval& interval,
                               const RoomSegParams& params) {
  if (!(interval.z_floor < interval.z_ceiling)) throw Error("invalid floor interval");
  if (floor_cloud.empty()) throw Error("empty input");

  RoomSegmentation seg;
  seg.frame = GridFrame::covering(floor_cloud, params.cell, 1);

  double band_low = interval.z_floor + params.wall_band_low;
  double band_high = interval.z_ceiling - params.wall_band_high;
  if (!(band_low < band_high)) {
    band_low = interval.z_floor;
    band_high = interval.z_ceiling;
  }
  const CountGrid wall_hist = project_bev(floor_cloud, seg.frame, band_low, band_high);
  const CountGrid footprint = project_bev(floor_cloud, seg.frame, -std::numeric_limits<double>::infinity(),
                                         std::numeric_limits<double>::infinity());
  const auto max_count = *std::max_element(wall_hist.cells.begin(), wall_hist.cells.end());

  seg.walls = MaskGrid(seg.frame, 0);
  for (std::size_t i = 0; i < seg.walls.cells.size(); ++i) {
    const bool wall = max_count > 0 && wall_hist[i] > 0 &&
                      static_cast<double>(wall_hist[i]) >= params.wall_ratio * max_count;
    seg.walls[i] = (wall || footprint[i] == 0) ? 1 : 0;
  }

  const MaskGrid dilated = dilate(seg.walls, params.dilation_cells);
  seg.distance = distance_field(dilated);
  MaskGrid seed_mask(seg.frame, 0);
  for (std::size_t i = 0; i < seed_mask.cells.size(); ++i) {
    seed_mask[i] = (!dilated[i] && seg.distance[i] >= params.seed_distance) ? 1 : 0;
  }
  seg.seeds = connected_components(seed_mask);

  const bool no_seeds =
      std::all_of(seg.seeds.cells.begin(), seg.seeds.cells.end(), [](std::int32_t l) { return l < 0; });
  if (no_seeds) {
    seg.labels = LabelGrid(seg.frame, -1);
    for (std::size_t i = 0; i < seg.labels.cells.size(); ++i) {
      if (!seg.walls[i]) seg.labels[i] = 0;
    }
  } else {
    // Flood over the distance to the undilated walls so basins reach the
    // wall cells themselves.
    seg.labels = watershed(distance_field(seg.walls), seg.seeds, seg.walls);
  }

  int n_labels = 0;
  for (auto l : seg.labels.cells) n_labels = std::max(n_labels, l + 1);
  std::vector<std::size_t> sizes(n_labels, 0);
  for (auto l : seg.labels.cells) {
    if (l >= 0) ++sizes[l];
  }
  // Compact labels, dropping regions below the size floor.
  std::vector<int> remap(n_labels, -1);
  int next = 0;
  for (int l = 0; l < n_labels; ++l) {
    if (sizes[l] > 0 && sizes[l] >= params.min_room_cells) remap[l] = next++;
  }
  for (auto& l : seg.labels.cells) {
    if (l >= 0) l = remap[l];
  }
  seg.masks.assign(next, MaskGrid(seg.frame, 0));
  seg.clouds.assign(next, PointCloud{});
  for (std::size_t i = 0; i < seg.labels.cells.size(); ++i) {
    if (seg.labels[i] >= 0) seg.masks[seg.labels[i]][i] = 1;
  }
  for (const auto& p : floor_cloud.points) {
    if (p.z() < interval.z_floor || p.z() > interval.z_ceiling) continue;
    const auto idx = seg.frame.index_of(p.x(), p.y());
    if (!idx || seg.labels[*idx] < 0) continue;
    seg.clouds[seg.labels[*idx]].points.push_back(p);
  }
  return seg;
}

}  // namespace hsg
