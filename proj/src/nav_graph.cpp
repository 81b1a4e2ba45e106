#include "hsg/nav_graph.hpp"
#include "hsg/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

namespace hsg {

bool FreeSpaceMap::is_free(double x, double y) const {
  const auto idx = free.frame.index_of(x, y);
  return idx && free[*idx] != 0;
}

// ---------------------------------------------------------------------------
// NavGraph
// ---------------------------------------------------------------------------

int NavGraph::add_node(const Point3& position, int floor_index) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({id, position, floor_index});
  adjacency_.emplace_back();
  return id;
}

void NavGraph::add_edge(int a, int b, bool stairs) {
  const int n = static_cast<int>(nodes_.size());
  if (a < 0 || b < 0 || a >= n || b >= n) throw Error("edge references a missing node");
  if (a == b) return;
  if (a > b) std::swap(a, b);
  for (const auto& [other, len] : adjacency_[a]) {
    if (other == b) return;
  }
  const double length = std::sqrt(squared_distance(nodes_[a].position, nodes_[b].position));
  edges_.push_back({a, b, length, stairs});
  adjacency_[a].push_back({b, length});
  adjacency_[b].push_back({a, length});
}

int NavGraph::append(const NavGraph& other) {
  const int offset = static_cast<int>(nodes_.size());
  for (const auto& node : other.nodes_) add_node(node.position, node.floor_index);
  for (const auto& e : other.edges_) add_edge(e.a + offset, e.b + offset, e.stairs);
  return offset;
}

std::vector<int> NavGraph::components() const {
  std::vector<int> comp(nodes_.size(), -1);
  int next = 0;
  std::vector<int> stack;
  for (std::size_t s = 0; s < nodes_.size(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    stack.push_back(static_cast<int>(s));
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [w, len] : adjacency_[v]) {
        if (comp[w] >= 0) continue;
        comp[w] = next;
        stack.push_back(w);
      }
    }
    ++next;
  }
  return comp;
}

int NavGraph::component_count() const {
  const auto comp = components();
  return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

int NavGraph::nearest_node(const Point3& p, int floor_index) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& node : nodes_) {
    if (floor_index >= 0 && node.floor_index != floor_index) continue;
    const double d = squared_distance(p, node.position);
    if (d < best_d) {
      best_d = d;
      best = node.id;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Free space
// ---------------------------------------------------------------------------

MaskGrid obstacle_map(const PointCloud& floor_cloud, double y_min, double delta_low, double delta_high,
                      const GridFrame& frame) {
  if (!(delta_low < delta_high)) throw Error("obstacle band is empty");
  const CountGrid counts = project_bev(floor_cloud, frame, y_min + delta_low, y_min + delta_high);
  MaskGrid out(frame, 0);
  for (std::size_t i = 0; i < out.cells.size(); ++i) out[i] = counts[i] > 0 ? 1 : 0;
  return out;
}

MaskGrid obstacle_map(const PointCloud& floor_cloud, double y_min, double delta_low, double delta_high,
                      double cell) {
  if (floor_cloud.empty()) throw Error("empty input");
  return obstacle_map(floor_cloud, y_min, delta_low, delta_high, GridFrame::covering(floor_cloud, cell, 1));
}

FreeSpaceMap free_space_map(std::span<const Eigen::Vector2d> pose_xy, double radius, const MaskGrid& floor_bev,
                            const MaskGrid& obstacles, int floor_index, double z) {
  if (radius <= 0.0) throw Error("pose radius must be positive");
  if (floor_bev.frame != obstacles.frame) throw Error("free space grids differ in shape");
  const GridFrame& frame = floor_bev.frame;
  FreeSpaceMap out{floor_index, z, MaskGrid(frame, 0)};
  for (std::size_t i = 0; i < frame.cell_count(); ++i) out.free[i] = floor_bev[i] ? 1 : 0;
  const double r2 = radius * radius;
  const int reach = static_cast<int>(std::ceil(radius / frame.cell)) + 1;
  for (const auto& p : pose_xy) {
    const int cx = static_cast<int>(std::floor((p.x() - frame.origin_x) / frame.cell));
    const int cy = static_cast<int>(std::floor((p.y() - frame.origin_y) / frame.cell));
    for (int y = cy - reach; y <= cy + reach; ++y) {
      for (int x = cx - reach; x <= cx + reach; ++x) {
        if (!frame.contains(x, y)) continue;
        if ((frame.center(x, y) - p).squaredNorm() <= r2) out.free.at(x, y) = 1;
      }
    }
  }
  for (std::size_t i = 0; i < frame.cell_count(); ++i) {
    if (obstacles[i]) out.free[i] = 0;
  }
  // Keep only cells 4-connected to a pose; enclosed pockets such as the
  // inside of an object outline are not reachable.
  std::vector<std::uint8_t> reached(frame.cell_count(), 0);
  std::queue<std::size_t> queue;
  for (const auto& p : pose_xy) {
    const auto i = frame.index_of(p.x(), p.y());
    if (i && out.free[*i] && !reached[*i]) {
      reached[*i] = 1;
      queue.push(*i);
    }
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop();
    const int x = static_cast<int>(i % frame.width);
    const int y = static_cast<int>(i / frame.width);
    constexpr int kDx[4] = {0, -1, 1, 0};
    constexpr int kDy[4] = {-1, 0, 0, 1};
    for (int k = 0; k < 4; ++k) {
      if (!frame.contains(x + kDx[k], y + kDy[k])) continue;
      const std::size_t j = frame.index(x + kDx[k], y + kDy[k]);
      if (!out.free[j] || reached[j]) continue;
      reached[j] = 1;
      queue.push(j);
    }
  }
  for (std::size_t i = 0; i < frame.cell_count(); ++i) out.free[i] = reached[i];
  return out;
}

// ---------------------------------------------------------------------------
// Skeleton
// ---------------------------------------------------------------------------

MaskGrid skeletonize(const MaskGrid& free) {
  MaskGrid img = free;
  const int w = img.width();
  const int h = img.height();
  auto px = [&](int x, int y) -> int { return img.frame.contains(x, y) && img.at(x, y) ? 1 : 0; };

  // Zhang-Suen thinning: two alternating sub-iterations peel the boundary
  // until only a one-pixel-wide, topology-preserving skeleton is left.
  std::vector<std::size_t> doomed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      doomed.clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!img.at(x, y)) continue;
          // P2..P9 clockwise from north (y + 1 is north).
          const int p[8] = {px(x, y + 1), px(x + 1, y + 1), px(x + 1, y),     px(x + 1, y - 1),
                            px(x, y - 1), px(x - 1, y - 1), px(x - 1, y),     px(x - 1, y + 1)};
          int b = 0;
          int a = 0;
          for (int k = 0; k < 8; ++k) {
            b += p[k];
            if (p[k] == 0 && p[(k + 1) % 8] == 1) ++a;
          }
          if (b < 2 || b > 6 || a != 1) continue;
          if (pass == 0) {
            if (p[0] * p[2] * p[4] != 0 || p[2] * p[4] * p[6] != 0) continue;
          } else {
            if (p[0] * p[2] * p[6] != 0 || p[0] * p[4] * p[6] != 0) continue;
          }
          doomed.push_back(img.frame.index(x, y));
        }
      }
      for (auto i : doomed) img[i] = 0;
      changed = changed || !doomed.empty();
    }
  }
  return img;
}

namespace {

struct SkeletonView {
  const MaskGrid& skel;

  bool on(int x, int y) const { return skel.frame.contains(x, y) && skel.at(x, y); }

  // 8-neighbors, except diagonal steps that a shared 4-neighbor already
  // bridges; this keeps staircase runs at degree 2.
  std::vector<std::size_t> neighbors(std::size_t i) const {
    const int x = static_cast<int>(i % skel.frame.width);
    const int y = static_cast<int>(i / skel.frame.width);
    std::vector<std::size_t> out;
    constexpr int kOx[4] = {0, -1, 1, 0};
    constexpr int kOy[4] = {-1, 0, 0, 1};
    for (int k = 0; k < 4; ++k) {
      if (on(x + kOx[k], y + kOy[k])) out.push_back(skel.frame.index(x + kOx[k], y + kOy[k]));
    }
    constexpr int kDx[4] = {-1, 1, -1, 1};
    constexpr int kDy[4] = {-1, -1, 1, 1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + kDx[k];
      const int ny = y + kDy[k];
      if (!on(nx, ny) || on(nx, y) || on(x, ny)) continue;
      out.push_back(skel.frame.index(nx, ny));
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

// Removes branches that run from an endpoint to a junction in fewer than
// `spur_cells` pixels, repeating until nothing changes.
void prune_spurs(MaskGrid& skel, int spur_cells) {
  if (spur_cells <= 0) return;
  bool changed = true;
  while (changed) {
    changed = false;
    SkeletonView view{skel};
    std::vector<std::size_t> doomed;
    for (std::size_t i = 0; i < skel.cells.size(); ++i) {
      if (!skel[i] || view.neighbors(i).size() != 1) continue;
      std::vector<std::size_t> branch{i};
      std::size_t prev = i;
      std::size_t cur = view.neighbors(i).front();
      bool reaches_junction = false;
      while (static_cast<int>(branch.size()) < spur_cells) {
        const auto nbrs = view.neighbors(cur);
        if (nbrs.size() >= 3) {
          reaches_junction = true;
          break;
        }
        if (nbrs.size() != 2) break;
        branch.push_back(cur);
        const std::size_t next = nbrs[0] == prev ? nbrs[1] : nbrs[0];
        prev = cur;
        cur = next;
      }
      if (!reaches_junction) continue;
      doomed.insert(doomed.end(), branch.begin(), branch.end());
    }
    for (auto i : doomed) {
      if (skel[i]) {
        skel[i] = 0;
        changed = true;
      }
    }
  }
}

class GraphTracer {
 public:
  GraphTracer(const MaskGrid& skel, const FreeSpaceMap& free, const FieldGrid& clearance, NavGraph& graph)
      : skel_(skel), view_{skel}, free_(free), clearance_(clearance), graph_(graph) {}

  void run() {
    const std::size_t n = skel_.cells.size();
    cluster_.assign(n, -1);
    visited_.assign(n, 0);
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) {
      if (!skel_[i] || cluster_[i] >= 0 || view_.neighbors(i).size() == 2) continue;
      std::vector<std::size_t> members{i};
      cluster_[i] = static_cast<int>(clusters.size());
      for (std::size_t k = 0; k < members.size(); ++k) {
        for (auto nb : view_.neighbors(members[k])) {
          if (cluster_[nb] >= 0 || view_.neighbors(nb).size() == 2) continue;
          cluster_[nb] = static_cast<int>(clusters.size());
          members.push_back(nb);
        }
      }
      std::sort(members.begin(), members.end());
      clusters.push_back(std::move(members));
    }

    reps_.clear();
    for (const auto& members : clusters) {
      std::size_t rep = members.front();
      for (auto m : members) {
        if (clearance_[m] > clearance_[rep]) rep = m;
      }
      reps_.push_back(rep);
      node_of(rep);
    }

    std::set<std::pair<std::size_t, std::size_t>> direct;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      for (auto start : clusters[c]) {
        for (auto nb : view_.neighbors(start)) {
          if (cluster_[nb] == static_cast<int>(c)) continue;
          std::vector<std::size_t> path{start, nb};
          if (cluster_[nb] >= 0) {
            if (!direct.insert({std::min(start, nb), std::max(start, nb)}).second) continue;
          } else {
            if (visited_[nb]) continue;
            std::size_t prev = start;
            std::size_t cur = nb;
            while (cluster_[cur] < 0) {
              visited_[cur] = 1;
              const auto nbrs = view_.neighbors(cur);
              const std::size_t next = nbrs[0] == prev ? nbrs[1] : nbrs[0];
              prev = cur;
              cur = next;
              path.push_back(cur);
            }
          }
          emit_branch(c, path);
        }
      }
    }

    // Loops without any junction or endpoint.
    for (std::size_t i = 0; i < n; ++i) {
      if (!skel_[i] || cluster_[i] >= 0 || visited_[i]) continue;
      visited_[i] = 1;
      std::vector<std::size_t> path{i};
      std::size_t prev = i;
      std::size_t cur = view_.neighbors(i).front();
      while (cur != i) {
        visited_[cur] = 1;
        path.push_back(cur);
        const auto nbrs = view_.neighbors(cur);
        const std::size_t next = nbrs[0] == prev ? nbrs[1] : nbrs[0];
        prev = cur;
        cur = next;
      }
      path.push_back(i);
      split(path, 0, path.size() - 1);
    }
  }

 private:
  int node_of(std::size_t cell) {
    auto [it, inserted] = node_ids_.try_emplace(cell, -1);
    if (inserted) {
      const Eigen::Vector2d c = skel_.frame.center(cell);
      it->second = graph_.add_node(
          Point3(static_cast<float>(c.x()), static_cast<float>(c.y()), static_cast<float>(free_.z)),
          free_.floor_index);
    }
    return it->second;
  }

  // Path inside a cluster from its representative to `target` (BFS).
  std::vector<std::size_t> cluster_path(int cluster, std::size_t target) const {
    const std::size_t rep = reps_[cluster];
    std::map<std::size_t, std::size_t> parent{{rep, rep}};
    std::queue<std::size_t> queue;
    queue.push(rep);
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop();
      if (v == target) break;
      for (auto nb : view_.neighbors(v)) {
        if (cluster_[nb] != cluster || parent.count(nb)) continue;
        parent[nb] = v;
        queue.push(nb);
      }
    }
    std::vector<std::size_t> out{target};
    while (out.back() != rep) out.push_back(parent.at(out.back()));
    std::reverse(out.begin(), out.end());
    return out;
  }

  void emit_branch(std::size_t cluster, const std::vector<std::size_t>& path) {
    std::vector<std::size_t> full = cluster_path(static_cast<int>(cluster), path.front());
    full.insert(full.end(), path.begin() + 1, path.end());
    const int end_cluster = cluster_[path.back()];
    auto tail = cluster_path(end_cluster, path.back());
    std::reverse(tail.begin(), tail.end());
    full.insert(full.end(), tail.begin() + 1, tail.end());
    split(full, 0, full.size() - 1);
  }

  bool straight_fits(const std::vector<std::size_t>& path, std::size_t i, std::size_t j, std::size_t* worst) const {
    const int w = skel_.frame.width;
    const int x0 = static_cast<int>(path[i] % w);
    const int y0 = static_cast<int>(path[i] / w);
    const int x1 = static_cast<int>(path[j] % w);
    const int y1 = static_cast<int>(path[j] / w);
    double worst_d = -1.0;
    *worst = i + 1;
    const double dx = x1 - x0;
    const double dy = y1 - y0;
    const double len = std::hypot(dx, dy);
    for (std::size_t k = i + 1; k < j; ++k) {
      const double px = static_cast<int>(path[k] % w) - x0;
      const double py = static_cast<int>(path[k] / w) - y0;
      const double d = len > 0.0 ? std::abs(px * dy - py * dx) / len : std::hypot(px, py);
      if (d > worst_d) {
        worst_d = d;
        *worst = k;
      }
    }
    if (worst_d > 1.0) return false;
    for (const auto& [x, y] : raster_line(x0, y0, x1, y1)) {
      if (!free_.free.frame.contains(x, y) || !free_.free.at(x, y)) return false;
    }
    return true;
  }

  void split(const std::vector<std::size_t>& path, std::size_t i, std::size_t j) {
    if (j <= i) return;
    std::size_t worst = i + 1;
    if (j == i + 1 || (path[i] != path[j] && straight_fits(path, i, j, &worst))) {
      graph_.add_edge(node_of(path[i]), node_of(path[j]));
      return;
    }
    if (path[i] == path[j]) straight_fits(path, i, j, &worst);
    split(path, i, worst);
    split(path, worst, j);
  }

  const MaskGrid& skel_;
  SkeletonView view_;
  const FreeSpaceMap& free_;
  const FieldGrid& clearance_;
  NavGraph& graph_;
  std::vector<int> cluster_;
  std::vector<std::uint8_t> visited_;
  std::vector<std::size_t> reps_;
  std::map<std::size_t, int> node_ids_;
};

}  // namespace

NavGraph voronoi_graph(const FreeSpaceMap& free, int spur_cells) {
  NavGraph graph;
  if (std::none_of(free.free.cells.begin(), free.free.cells.end(), [](std::uint8_t v) { return v != 0; })) {
    return graph;
  }
  MaskGrid skel = skeletonize(free.free);
  prune_spurs(skel, spur_cells);
  MaskGrid occupied(free.free.frame, 0);
  for (std::size_t i = 0; i < occupied.cells.size(); ++i) occupied[i] = free.free[i] ? 0 : 1;
  const FieldGrid clearance = distance_field(occupied);
  GraphTracer(skel, free, clearance, graph).run();
  return graph;
}

// ---------------------------------------------------------------------------
// Stairs and floors
// ---------------------------------------------------------------------------

NavGraph stairs_graph(std::span<const Pose> stair_poses, int floor_index) {
  NavGraph g;
  if (stair_poses.size() < 2) return g;
  for (const auto& pose : stair_poses) g.add_node(pose.translation.cast<float>(), floor_index);
  for (int i = 0; i + 1 < static_cast<int>(stair_poses.size()); ++i) g.add_edge(i, i + 1, true);
  return g;
}

NavGraph connect_floors(std::span<const NavGraph> floor_graphs, std::span<const NavGraph> stair_fragments,
                        std::span<const std::pair<double, double>> floor_bounds, double max_link,
                        StairLinkReport* report) {
  if (floor_graphs.empty()) throw Error("no floor graphs");
  if (floor_bounds.size() != floor_graphs.size()) throw Error("floor bounds do not match floor graphs");
  std::vector<FloorInterval> intervals;
  for (const auto& [lo, hi] : floor_bounds) intervals.push_back({lo, hi});

  NavGraph out;
  std::vector<std::pair<int, int>> ranges;  // [begin, end) node ids per floor graph
  for (const auto& g : floor_graphs) {
    const int begin = out.append(g);
    ranges.push_back({begin, static_cast<int>(out.nodes().size())});
  }

  StairLinkReport local;
  for (std::size_t s = 0; s < stair_fragments.size(); ++s) {
    const auto& frag = stair_fragments[s];
    if (frag.nodes().size() < 2) continue;
    const int offset = out.append(frag);
    const int ends[2] = {offset, offset + static_cast<int>(frag.nodes().size()) - 1};
    for (int end : ends) {
      const Point3 p = out.nodes()[end].position;
      const int floor = nearest_floor(intervals, p.z());
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int v = ranges[floor].first; v < ranges[floor].second; ++v) {
        const double d = squared_distance(p, out.nodes()[v].position);
        if (d < best_d) {
          best_d = d;
          best = v;
        }
      }
      if (best >= 0 && std::sqrt(best_d) <= max_link) {
        out.add_edge(end, best, true);
        ++local.linked;
      } else {
        ++local.dangling;
        local.warnings.push_back("stair fragment " + std::to_string(s) + " has no floor " +
                                 std::to_string(floor) + " node within " + std::to_string(max_link) + " m");
      }
    }
  }
  if (report) *report = std::move(local);
  return out;
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

std::vector<int> plan_path_ids(const NavGraph& graph, const Point3& start, const Point3& goal) {
  if (graph.empty()) throw Error("navigation graph is empty");
  const int s = graph.nearest_node(start);
  const int t = graph.nearest_node(goal);
  const std::size_t n = graph.nodes().size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[s] = 0.0;
  queue.push({0.0, s});
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    if (v == t) break;
    for (const auto& [w, len] : graph.adjacency()[v]) {
      const double nd = d + len;
      if (nd < dist[w]) {
        dist[w] = nd;
        prev[w] = v;
        queue.push({nd, w});
      }
    }
  }
  if (!std::isfinite(dist[t])) throw Error("unreachable");
  std::vector<int> path{t};
  while (path.back() != s) path.push_back(prev[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Point3> plan_path(const NavGraph& graph, const Point3& start, const Point3& goal) {
  std::vector<Point3> out;
  for (int id : plan_path_ids(graph, start, goal)) out.push_back(graph.nodes()[id].position);
  return out;
}

double path_length(const NavGraph& graph, std::span<const int> ids) {
  double total = 0.0;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    total += std::sqrt(squared_distance(graph.nodes().at(ids[i - 1]).position, graph.nodes().at(ids[i]).position));
  }
  return total;
}

std::vector<std::pair<int, int>> raster_line(int x0, int y0, int x1, int y1) {
  std::vector<std::pair<int, int>> out;
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    out.push_back({x0, y0});
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Edge-list text format
// ---------------------------------------------------------------------------

void write_edge_list(std::ostream& out, const NavGraph& graph) {
  char buf[160];
  for (const auto& n : graph.nodes()) {
    std::snprintf(buf, sizeof buf, "node %d %.9g %.9g %.9g %d\n", n.id, n.position.x(), n.position.y(),
                  n.position.z(), n.floor_index);
    out << buf;
  }
  for (const auto& e : graph.edges()) {
    std::snprintf(buf, sizeof buf, "edge %d %d %.17g %d\n", e.a, e.b, e.length, e.stairs ? 1 : 0);
    out << buf;
  }
}

NavGraph read_edge_list(std::istream& in) {
  NavGraph g;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    if (kind == "node") {
      int id = 0;
      int floor = 0;
      float x = 0, y = 0, z = 0;
      if (!(ss >> id >> x >> y >> z >> floor)) throw Error("edge list line " + std::to_string(line_no) + ": bad node");
      if (id != static_cast<int>(g.nodes().size())) {
        throw Error("edge list line " + std::to_string(line_no) + ": node ids must be consecutive");
      }
      g.add_node({x, y, z}, floor);
    } else if (kind == "edge") {
      int a = 0, b = 0, stairs = 0;
      double length = 0.0;
      if (!(ss >> a >> b >> length >> stairs)) throw Error("edge list line " + std::to_string(line_no) + ": bad edge");
      g.add_edge(a, b, stairs != 0);
    } else {
      throw Error("edge list line " + std::to_string(line_no) + ": unknown record '" + kind + "'");
    }
  }
  return g;
}

}  // namespace hsg
