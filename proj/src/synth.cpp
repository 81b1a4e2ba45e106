#include "hsg/synth.hpp"
#include "hsg/config.hpp"
#include "hsg/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace hsg::synth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kLanding = 1.2;  // stairwell landing length at each end
constexpr std::size_t kMinMaskPoints = 10;
const std::string kWall = "wall";
const std::string kFloor = "floor";
const std::string kCeiling = "ceiling";
const std::string kStairs = "stairs";

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> stations(double a, double b, double step) {
  const int n = std::max(1, static_cast<int>(std::lround((b - a) / step)));
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (i + 0.5) * (b - a) / n;
  return out;
}

// Room clouds hold points of the floor interval strictly inside the rect.
// Points are float, so walls on the rect boundary need a small margin.
bool in_room(const GtRoom& room, const FloorInterval& level, const Point3& p) {
  constexpr double kZPad = 0.1;
  constexpr double kEdge = 1e-3;
  if (p.z() < level.z_floor - kZPad || p.z() > level.z_ceiling + kZPad) return false;
  return p.x() > room.rect.x0 + kEdge && p.x() < room.rect.x1 - kEdge && p.y() > room.rect.y0 + kEdge &&
         p.y() < room.rect.y1 - kEdge;
}

bool overlaps(const Rect& a, const Rect& b) {
  return a.x0 < b.x1 - 1e-9 && b.x0 < a.x1 - 1e-9 && a.y0 < b.y1 - 1e-9 && b.y0 < a.y1 - 1e-9;
}

std::vector<FloorInterval> floor_levels(const SceneSpec& spec) {
  std::vector<FloorInterval> out;
  double z = spec.base_z;
  for (const auto& f : spec.floors) {
    out.push_back({z, z + f.height});
    z += f.height + spec.slab;
  }
  return out;
}

struct RoomRef {
  int floor = 0;
  Rect rect;
  std::string category;
  bool stairwell = false;
  const RoomSpec* spec = nullptr;
};

std::vector<RoomRef> room_list(const SceneSpec& spec) {
  std::vector<RoomRef> out;
  for (int k = 0; k < static_cast<int>(spec.floors.size()); ++k) {
    for (const auto& r : spec.floors[k].rooms) out.push_back({k, r.rect, r.category, false, &r});
    if (spec.stairwell) out.push_back({k, *spec.stairwell, kStairs, true, nullptr});
  }
  return out;
}

// Landing holding the stairwell door of floor k: south for even floors.
double landing_y(const Rect& s, int k) { return k % 2 == 0 ? s.y0 + kLanding / 2 : s.y1 - kLanding / 2; }

std::vector<DoorGeom> compute_doors(const SceneSpec& spec, const std::vector<RoomRef>& rooms,
                                    std::vector<std::string>* errors) {
  std::vector<DoorGeom> doors;
  const double w = spec.door_width;
  const double need = w + 0.4;
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    for (std::size_t j = i + 1; j < rooms.size(); ++j) {
      const auto& a = rooms[i];
      const auto& b = rooms[j];
      if (a.floor != b.floor || a.stairwell || b.stairwell) continue;
      for (int pass = 0; pass < 2; ++pass) {
        const Rect& p = pass == 0 ? a.rect : b.rect;
        const Rect& q = pass == 0 ? b.rect : a.rect;
        if (std::abs(p.x1 - q.x0) < 1e-6) {
          const double lo = std::max(p.y0, q.y0), hi = std::min(p.y1, q.y1);
          if (hi - lo >= need) doors.push_back({a.floor, int(i), int(j), {p.x1, 0.5 * (lo + hi)}, false});
        }
        if (std::abs(p.y1 - q.y0) < 1e-6) {
          const double lo = std::max(p.x0, q.x0), hi = std::min(p.x1, q.x1);
          if (hi - lo >= need) doors.push_back({a.floor, int(i), int(j), {0.5 * (lo + hi), p.y1}, true});
        }
      }
    }
  }
  for (std::size_t s = 0; s < rooms.size(); ++s) {
    if (!rooms[s].stairwell) continue;
    const Rect& sw = rooms[s].rect;
    const double cy = landing_y(sw, rooms[s].floor);
    int found = -1;
    for (std::size_t r = 0; r < rooms.size(); ++r) {
      const auto& room = rooms[r];
      if (room.floor != rooms[s].floor || room.stairwell) continue;
      if (std::abs(room.rect.x1 - sw.x0) < 1e-6 && room.rect.y0 <= cy - w / 2 - 0.1 && room.rect.y1 >= cy + w / 2 + 0.1) {
        found = static_cast<int>(r);
        break;
      }
    }
    if (found < 0) {
      if (errors) {
        errors->push_back("floor " + std::to_string(rooms[s].floor) +
                          ": no room west of the stairwell covers its door at y=" + std::to_string(cy));
      }
      continue;
    }
    doors.push_back({rooms[s].floor, found, static_cast<int>(s), {sw.x0, cy}, false});
  }
  return doors;
}

// Rooms reachable from `start` through doors.
std::vector<int> reachable(int start, const std::vector<DoorGeom>& doors) {
  std::vector<int> out{start};
  std::set<int> seen{start};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& d : doors) {
      for (auto [u, v] : {std::pair{d.room_a, d.room_b}, std::pair{d.room_b, d.room_a}}) {
        if (u == out[i] && seen.insert(v).second) out.push_back(v);
      }
    }
  }
  return out;
}

json rect_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

Rect rect_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) throw Error("scene spec: " + what + " must be [x0, y0, x1, y1]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec
// ---------------------------------------------------------------------------

std::vector<std::string> SceneSpec::validate() const {
  std::vector<std::string> errors;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  need(!floors.empty(), "at least one floor is required");
  need(slab >= 0.25, "slab must be at least 0.25 m");
  need(spacing > 0.0 && spacing <= 0.5, "spacing must be in (0, 0.5]");
  need(height_noise >= 0.0 && height_noise <= 0.05, "height_noise must be in [0, 0.05]");
  need(door_width >= 0.5 && door_width <= (stairwell ? 1.0 : 3.0), "door_width out of range");
  need(door_height > 0.0, "door_height must be positive");
  need(camera_height > 0.0, "camera_height must be positive");
  need(step > 0.0, "step must be positive");
  need(turn_deg > 0.0 && turn_deg <= 180.0, "turn_deg must be in (0, 180]");
  need(frame_stride >= 1, "frame_stride must be at least 1");
  need(dim >= 2, "dim must be at least 2");
  need(sigma >= 0.0, "sigma must be nonnegative");
  need(fov_deg > 0.0 && fov_deg <= 360.0, "fov_deg must be in (0, 360]");
  need(range > 0.0, "range must be positive");
  if (floors.size() > 1) need(stairwell.has_value(), "floors are not connected: a stairwell is required");
  if (stairwell) {
    need(floors.size() > 1, "a stairwell needs at least two floors");
    need(stairwell->width() >= 2.0, "stairwell must be at least 2 m wide");
    need(stairwell->depth() >= 2 * kLanding + 1.0, "stairwell is too short for its landings");
  }
  for (std::size_t k = 0; k < floors.size(); ++k) {
    const auto& f = floors[k];
    const std::string fk = "floor " + std::to_string(k);
    need(f.height >= 2.0, fk + ": height must be at least 2 m");
    need(f.height > camera_height, fk + ": camera above the ceiling");
    need(!f.rooms.empty(), fk + ": no rooms");
    for (std::size_t r = 0; r < f.rooms.size(); ++r) {
      const auto& room = f.rooms[r];
      const std::string rk = fk + " room " + std::to_string(r);
      need(room.rect.width() > 0.0 && room.rect.depth() > 0.0, rk + ": empty rect");
      need(!room.category.empty(), rk + ": empty category");
      if (stairwell) need(!overlaps(room.rect, *stairwell), rk + ": overlaps the stairwell");
      for (std::size_t o = r + 1; o < f.rooms.size(); ++o) {
        need(!overlaps(room.rect, f.rooms[o].rect), rk + ": overlaps room " + std::to_string(o));
      }
      for (std::size_t b = 0; b < room.objects.size(); ++b) {
        const auto& box = room.objects[b];
        const std::string bk = rk + " object " + std::to_string(b);
        need((box.hi - box.lo).minCoeff() > 0.0, bk + ": empty box");
        need(!box.category.empty(), bk + ": empty category");
        need(box.lo.x() >= room.rect.x0 && box.hi.x() <= room.rect.x1 && box.lo.y() >= room.rect.y0 &&
                 box.hi.y() <= room.rect.y1,
             bk + ": outside its room");
        need(box.lo.z() >= 0.0 && box.hi.z() <= f.height, bk + ": outside the floor height");
      }
    }
  }
  if (!errors.empty()) return errors;

  const auto rooms = room_list(*this);
  const auto doors = compute_doors(*this, rooms, &errors);
  for (std::size_t k = 0; k < floors.size(); ++k) {
    int first = -1;
    std::size_t count = 0;
    for (std::size_t r = 0; r < rooms.size(); ++r) {
      if (rooms[r].floor != static_cast<int>(k)) continue;
      if (first < 0) first = static_cast<int>(r);
      ++count;
    }
    if (reachable(first, doors).size() != count) {
      errors.push_back("floor " + std::to_string(k) + ": rooms are not connected by doors");
    }
  }
  return errors;
}

SceneSpec parse_scene_spec(const std::string& json_text) {
  SceneSpec s;
  try {
    const json j = json::parse(json_text);
    static const std::set<std::string> known{"seed", "floors", "stairwell", "base_z", "slab", "spacing",
                                             "height_noise", "door_width", "door_height", "camera_height",
                                             "step", "turn_deg", "frame_stride", "dim", "sigma", "fov_deg",
                                             "range", "structure_masks"};
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw Error("scene spec: unknown key " + key);
    }
    s.seed = j.value("seed", s.seed);
    s.base_z = j.value("base_z", s.base_z);
    s.slab = j.value("slab", s.slab);
    s.spacing = j.value("spacing", s.spacing);
    s.height_noise = j.value("height_noise", s.height_noise);
    s.door_width = j.value("door_width", s.door_width);
    s.door_height = j.value("door_height", s.door_height);
    s.camera_height = j.value("camera_height", s.camera_height);
    s.step = j.value("step", s.step);
    s.turn_deg = j.value("turn_deg", s.turn_deg);
    s.frame_stride = j.value("frame_stride", s.frame_stride);
    s.dim = j.value("dim", s.dim);
    s.sigma = j.value("sigma", s.sigma);
    s.fov_deg = j.value("fov_deg", s.fov_deg);
    s.range = j.value("range", s.range);
    s.structure_masks = j.value("structure_masks", s.structure_masks);
    if (j.contains("stairwell") && !j["stairwell"].is_null()) s.stairwell = rect_from(j["stairwell"], "stairwell");
    for (const auto& jf : j.at("floors")) {
      FloorSpec f;
      f.height = jf.value("height", f.height);
      for (const auto& jr : jf.at("rooms")) {
        RoomSpec r;
        r.rect = rect_from(jr.at("rect"), "room rect");
        r.category = jr.at("category").get<std::string>();
        for (const auto& jo : jr.value("objects", json::array())) {
          const auto& b = jo.at("box");
          if (!b.is_array() || b.size() != 6) throw Error("scene spec: object box must have 6 numbers");
          BoxSpec box;
          box.lo = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>()};
          box.hi = {b[3].get<double>(), b[4].get<double>(), b[5].get<double>()};
          box.category = jo.at("category").get<std::string>();
          r.objects.push_back(std::move(box));
        }
        f.rooms.push_back(std::move(r));
      }
      s.floors.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("scene spec: ") + e.what());
  }
  return s;
}

SceneSpec load_scene_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene_spec(buf.str());
}

std::string scene_spec_json(const SceneSpec& s) {
  json j;
  j["seed"] = s.seed;
  j["base_z"] = s.base_z;
  j["slab"] = s.slab;
  j["spacing"] = s.spacing;
  j["height_noise"] = s.height_noise;
  j["door_width"] = s.door_width;
  j["door_height"] = s.door_height;
  j["camera_height"] = s.camera_height;
  j["step"] = s.step;
  j["turn_deg"] = s.turn_deg;
  j["frame_stride"] = s.frame_stride;
  j["dim"] = s.dim;
  j["sigma"] = s.sigma;
  j["fov_deg"] = s.fov_deg;
  j["range"] = s.range;
  j["structure_masks"] = s.structure_masks;
  j["stairwell"] = s.stairwell ? rect_json(*s.stairwell) : json(nullptr);
  j["floors"] = json::array();
  for (const auto& f : s.floors) {
    json jf{{"height", f.height}, {"rooms", json::array()}};
    for (const auto& r : f.rooms) {
      json jr{{"rect", rect_json(r.rect)}, {"category", r.category}, {"objects", json::array()}};
      for (const auto& b : r.objects) {
        jr["objects"].push_back(
            {{"box", {b.lo.x(), b.lo.y(), b.lo.z(), b.hi.x(), b.hi.y(), b.hi.z()}}, {"category", b.category}});
      }
      jf["rooms"].push_back(jr);
    }
    j["floors"].push_back(jf);
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Embedder
// ---------------------------------------------------------------------------

SynthEmbedder::SynthEmbedder(std::vector<std::string> vocabulary, int dim, std::uint64_t seed)
    : dim_(dim), fallback_(dim, mix(seed, 0xFA11BAC4ULL)) {
  if (dim_ < 2) throw Error("embedder dimension must be at least 2");
  std::mt19937_64 rng(mix(seed, 0xE3BEDULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> basis;
  for (const auto& raw : vocabulary) {
    const std::string word = normalize_text(raw);
    if (vectors_.count(word)) continue;
    vocabulary_.push_back(word);
    Eigen::VectorXd v(dim_);
    if (static_cast<int>(basis.size()) < dim_) {
      for (int attempt = 0;; ++attempt) {
        for (int i = 0; i < dim_; ++i) v[i] = normal(rng);
        for (const auto& b : basis) v -= v.dot(b) * b;
        if (v.norm() > 1e-6) break;
        if (attempt > 100) throw Error("embedder basis construction failed");
      }
      v.normalize();
      basis.push_back(v);
    } else {
      for (int attempt = 0;; ++attempt) {
        for (int i = 0; i < dim_; ++i) v[i] = normal(rng);
        v.normalize();
        bool ok = true;
        for (const auto& [w, e] : vectors_) ok = ok && v.dot(e.values().cast<double>()) <= 0.3;
        if (ok) break;
        if (attempt > 100000) throw Error("vocabulary too large for dimension " + std::to_string(dim_));
      }
    }
    vectors_.emplace(word, Embedding::normalized(v));
  }
}

Embedding SynthEmbedder::encode(std::string_view text) const {
  std::string word = normalize_text(text);
  const std::string prefix = "there is the ";
  const std::string suffix = " in the scene.";
  if (word.size() > prefix.size() + suffix.size() && word.starts_with(prefix) && word.ends_with(suffix)) {
    word = word.substr(prefix.size(), word.size() - prefix.size() - suffix.size());
  }
  if (auto it = vectors_.find(word); it != vectors_.end()) return it->second;
  return fallback_.encode(word);
}

Embedding SynthEmbedder::noisy(const std::string& label, double sigma, std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v = encode(label).values().cast<double>();
  const double scale = sigma / std::sqrt(static_cast<double>(dim_));
  for (int i = 0; i < dim_; ++i) v[i] += scale * normal(rng);
  return Embedding::normalized(v);
}

std::vector<std::string> vocabulary(const SceneSpec& spec) {
  std::set<std::string> words{kWall, kFloor, kCeiling, kStairs};
  for (const auto& f : spec.floors) {
    for (const auto& r : f.rooms) {
      words.insert(normalize_text(r.category));
      for (const auto& o : r.objects) words.insert(normalize_text(o.category));
    }
  }
  std::vector<std::string> out(words.begin(), words.end());
  for (std::size_t k = 0; k < spec.floors.size(); ++k) out.push_back(floor_text(static_cast<int>(k)));
  return out;
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

namespace {

struct Group {
  std::string label;
  int floor = 0;
  bool structure = false;
};

struct Sampled {
  GroundTruth gt;
  std::vector<Group> groups;
  std::vector<int> point_group;
  std::vector<int> point_floor;
  std::vector<RoomRef> rooms;
};

class Sampler {
 public:
  Sampler(const SceneSpec& spec, Sampled& out) : spec_(spec), out_(out), rng_(mix(spec.seed, 0x6E0ULL)) {}

  int group(const std::string& label, int floor, bool structure) {
    out_.groups.push_back({label, floor, structure});
    return static_cast<int>(out_.groups.size()) - 1;
  }

  void add(double x, double y, double z, int label, int object, int group, int floor) {
    z += spec_.height_noise > 0.0 ? noise_(rng_) * spec_.height_noise : 0.0;
    out_.gt.cloud.points.emplace_back(static_cast<float>(x), static_cast<float>(y), static_cast<float>(z));
    out_.gt.labels.push_back(label);
    out_.gt.point_objects.push_back(object);
    out_.point_group.push_back(group);
    out_.point_floor.push_back(floor);
  }

  void horizontal(const Rect& r, double z, int label, int object, int group, int floor) {
    for (double y : stations(r.y0, r.y1, spec_.spacing)) {
      for (double x : stations(r.x0, r.x1, spec_.spacing)) add(x, y, z, label, object, group, floor);
    }
  }

 private:
  const SceneSpec& spec_;
  Sampled& out_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
};

struct WallLine {
  std::vector<std::pair<double, double>> spans;
  std::vector<std::pair<double, double>> doors;
};

Sampled sample_scene(const SceneSpec& spec) {
  if (auto errors = spec.validate(); !errors.empty()) {
    std::string msg = "invalid scene spec:";
    for (const auto& e : errors) msg += " " + e + ";";
    msg.pop_back();
    throw Error(msg);
  }
  Sampled out;
  auto& gt = out.gt;
  gt.floors = floor_levels(spec);
  out.rooms = room_list(spec);
  gt.doors = compute_doors(spec, out.rooms, nullptr);

  std::set<std::string> cats{kWall, kFloor, kCeiling, kStairs};
  for (const auto& f : spec.floors) {
    for (const auto& r : f.rooms) {
      for (const auto& o : r.objects) cats.insert(o.category);
    }
  }
  gt.categories.assign(cats.begin(), cats.end());
  auto cat = [&](const std::string& c) {
    return static_cast<int>(std::lower_bound(gt.categories.begin(), gt.categories.end(), c) - gt.categories.begin());
  };

  Sampler s(spec, out);
  for (std::size_t r = 0; r < out.rooms.size(); ++r) {
    const auto& room = out.rooms[r];
    gt.rooms.push_back({room.floor, room.rect, room.category, {}, room.stairwell});
  }

  for (int k = 0; k < static_cast<int>(spec.floors.size()); ++k) {
    const auto& lv = gt.floors[k];
    const int floor_group = s.group(kFloor, k, true);
    const int ceiling_group = s.group(kCeiling, k, true);
    for (std::size_t r = 0; r < out.rooms.size(); ++r) {
      if (out.rooms[r].floor != k) continue;
      s.horizontal(out.rooms[r].rect, lv.z_floor, cat(kFloor), -1, floor_group, k);
      s.horizontal(out.rooms[r].rect, lv.z_ceiling, cat(kCeiling), -1, ceiling_group, k);
    }

    // Walls: union of room edges per line, door openings below the lintel.
    std::map<std::pair<int, long long>, WallLine> lines;  // (0: x = c, 1: y = c)
    auto key = [](int axis, double c) { return std::pair{axis, std::llround(c * 1e6)}; };
    for (const auto& room : out.rooms) {
      if (room.floor != k) continue;
      const Rect& q = room.rect;
      lines[key(0, q.x0)].spans.push_back({q.y0, q.y1});
      lines[key(0, q.x1)].spans.push_back({q.y0, q.y1});
      lines[key(1, q.y0)].spans.push_back({q.x0, q.x1});
      lines[key(1, q.y1)].spans.push_back({q.x0, q.x1});
    }
    for (const auto& d : gt.doors) {
      if (d.floor != k) continue;
      const int axis = d.along_x ? 1 : 0;
      const double c = d.along_x ? d.center.y() : d.center.x();
      const double along = d.along_x ? d.center.x() : d.center.y();
      lines[key(axis, c)].doors.push_back({along - spec.door_width / 2, along + spec.door_width / 2});
    }
    const auto zs = stations(lv.z_floor, lv.z_ceiling, spec.spacing);
    for (auto& [lk, line] : lines) {
      std::sort(line.spans.begin(), line.spans.end());
      std::vector<std::pair<double, double>> merged;
      for (const auto& sp : line.spans) {
        if (!merged.empty() && sp.first <= merged.back().second + 1e-9) {
          merged.back().second = std::max(merged.back().second, sp.second);
        } else {
          merged.push_back(sp);
        }
      }
      const double c = static_cast<double>(lk.second) / 1e6;
      for (const auto& [a, b] : merged) {
        const int g = s.group(kWall, k, true);
        for (double t : stations(a, b, spec.spacing)) {
          bool in_door = false;
          for (const auto& [d0, d1] : line.doors) in_door = in_door || (t > d0 && t < d1);
          for (double z : zs) {
            if (in_door && z < lv.z_floor + spec.door_height) continue;
            if (lk.first == 0) {
              s.add(c, t, z, cat(kWall), -1, g, k);
            } else {
              s.add(t, c, z, cat(kWall), -1, g, k);
            }
          }
        }
      }
    }

    // Ramp to the next floor on the east half of the stairwell.
    if (spec.stairwell && k + 1 < static_cast<int>(spec.floors.size())) {
      const Rect& sw = *spec.stairwell;
      const double xm = 0.5 * (sw.x0 + sw.x1);
      const double ys = sw.y0 + kLanding, ye = sw.y1 - kLanding;
      const double z0 = lv.z_floor, z1 = gt.floors[k + 1].z_floor;
      const int g = s.group(kStairs, k, true);
      for (double y : stations(ys, ye, spec.spacing)) {
        const double t = (y - ys) / (ye - ys);
        const double z = k % 2 == 0 ? z0 + t * (z1 - z0) : z1 - t * (z1 - z0);
        for (double x : stations(xm, sw.x1, spec.spacing)) s.add(x, y, z, cat(kStairs), -1, g, k);
      }
    }
  }

  // Objects: top and four sides of each box.
  int room_base = 0;
  for (int k = 0; k < static_cast<int>(spec.floors.size()); ++k) {
    const double z_floor = gt.floors[k].z_floor;
    int local = 0;
    for (const auto& room : spec.floors[k].rooms) {
      for (const auto& b : room.objects) {
        const int id = static_cast<int>(gt.objects.size());
        GtObject obj{k, room_base + local, b.category, b.lo + Eigen::Vector3d(0, 0, z_floor),
                     b.hi + Eigen::Vector3d(0, 0, z_floor), {}};
        const int g = s.group(b.category, k, false);
        const int lbl = cat(b.category);
        const auto& lo = obj.lo;
        const auto& hi = obj.hi;
        s.horizontal({lo.x(), lo.y(), hi.x(), hi.y()}, hi.z(), lbl, id, g, k);
        for (double z : stations(lo.z(), hi.z(), spec.spacing)) {
          for (double y : stations(lo.y(), hi.y(), spec.spacing)) {
            s.add(lo.x(), y, z, lbl, id, g, k);
            s.add(hi.x(), y, z, lbl, id, g, k);
          }
          for (double x : stations(lo.x(), hi.x(), spec.spacing)) {
            s.add(x, lo.y(), z, lbl, id, g, k);
            s.add(x, hi.y(), z, lbl, id, g, k);
          }
        }
        gt.objects.push_back(std::move(obj));
      }
      ++local;
    }
    room_base += static_cast<int>(spec.floors[k].rooms.size()) + (spec.stairwell ? 1 : 0);
  }

  for (std::size_t i = 0; i < gt.cloud.size(); ++i) {
    const auto& p = gt.cloud.points[i];
    if (gt.point_objects[i] >= 0) gt.objects[gt.point_objects[i]].cloud.points.push_back(p);
    for (auto& room : gt.rooms) {
      if (in_room(room, gt.floors[room.floor], p)) room.cloud.points.push_back(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

class Walker {
 public:
  Walker(const SceneSpec& spec, std::vector<Pose>& poses) : spec_(spec), poses_(poses) {}

  void start(double x, double y, double z) {
    x_ = x;
    y_ = y;
    z_ = z;
    yaw_ = 0.0;
    emit();
  }

  void face(double yaw) {
    const double turn = spec_.turn_deg * std::numbers::pi / 180.0;
    const double delta = std::remainder(yaw - yaw_, 2.0 * std::numbers::pi);
    const int n = static_cast<int>(std::ceil(std::abs(delta) / turn - 1e-9));
    const double start = yaw_;
    for (int i = 1; i <= n; ++i) {
      yaw_ = std::remainder(start + delta * i / n, 2.0 * std::numbers::pi);
      emit();
    }
  }

  void move_to(double x, double y, double z) {
    const double dx = x - x_, dy = y - y_;
    const double dist = std::hypot(dx, dy);
    if (dist < 1e-9) return;
    face(std::atan2(dy, dx));
    const int n = static_cast<int>(std::ceil(dist / spec_.step - 1e-9));
    const double x0 = x_, y0 = y_, z0 = z_;
    for (int i = 1; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      x_ = x0 + t * dx;
      y_ = y0 + t * dy;
      z_ = z0 + t * (z - z0);
      emit();
    }
  }
  void move_to(double x, double y) { move_to(x, y, z_); }

  void spin() {
    const double turn = spec_.turn_deg * std::numbers::pi / 180.0;
    const int n = static_cast<int>(std::ceil(2.0 * std::numbers::pi / turn - 1e-9));
    const double start = yaw_;
    for (int i = 1; i <= n; ++i) {
      yaw_ = std::remainder(start + 2.0 * std::numbers::pi * i / n, 2.0 * std::numbers::pi);
      emit();
    }
  }

  double z() const { return z_; }

 private:
  void emit() { poses_.push_back(Pose::from_xyz_yaw(x_, y_, z_, yaw_)); }

  const SceneSpec& spec_;
  std::vector<Pose>& poses_;
  double x_ = 0.0, y_ = 0.0, z_ = 0.0, yaw_ = 0.0;
};

Eigen::Vector2d center_of(const Rect& r) { return {0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1)}; }

// Door crossing from room `from`: approach point on its side, exit point on the other.
std::pair<Eigen::Vector2d, Eigen::Vector2d> crossing(const DoorGeom& d, const Rect& from) {
  Eigen::Vector2d n = d.along_x ? Eigen::Vector2d(0, 1) : Eigen::Vector2d(1, 0);
  const Eigen::Vector2d c = center_of(from);
  if ((c - d.center).dot(n) > 0) n = -n;
  return {d.center - 0.6 * n, d.center + 0.6 * n};
}

std::vector<Pose> make_trajectory(const SceneSpec& spec, const Sampled& sc) {
  std::vector<Pose> poses;
  Walker walk(spec, poses);
  const auto& gt = sc.gt;
  const int n_floors = static_cast<int>(spec.floors.size());

  auto stair_room = [&](int k) {
    for (std::size_t r = 0; r < sc.rooms.size(); ++r) {
      if (sc.rooms[r].floor == k && sc.rooms[r].stairwell) return static_cast<int>(r);
    }
    return -1;
  };
  auto stair_door = [&](int k) -> const DoorGeom* {
    const int s = stair_room(k);
    for (const auto& d : gt.doors) {
      if (d.room_b == s || d.room_a == s) return &d;
    }
    return nullptr;
  };
  auto cam = [&](int k) { return gt.floors[k].z_floor + spec.camera_height; };

  int current = -1;
  for (int k = 0; k < n_floors; ++k) {
    int start = -1;
    if (const DoorGeom* d = stair_door(k)) {
      start = d->room_a == stair_room(k) ? d->room_b : d->room_a;
    } else {
      for (std::size_t r = 0; r < sc.rooms.size() && start < 0; ++r) {
        if (sc.rooms[r].floor == k) start = static_cast<int>(r);
      }
    }
    if (k == 0) {
      const auto c = center_of(sc.rooms[start].rect);
      walk.start(c.x(), c.y(), cam(0));
    } else {
      const DoorGeom* d = stair_door(k);
      const auto [a, b] = crossing(*d, sc.rooms[stair_room(k)].rect);
      walk.move_to(a.x(), a.y());
      walk.move_to(b.x(), b.y());
      const auto c = center_of(sc.rooms[start].rect);
      walk.move_to(c.x(), c.y());
    }
    current = start;

    // Depth-first tour of the floor's rooms, returning to the start room.
    std::set<int> visited;
    auto visit = [&](auto&& self, int room) -> void {
      visited.insert(room);
      const auto c = center_of(sc.rooms[room].rect);
      walk.move_to(c.x(), c.y());
      walk.spin();
      for (const auto& d : gt.doors) {
        if (d.floor != k) continue;
        const int other = d.room_a == room ? d.room_b : d.room_b == room ? d.room_a : -1;
        if (other < 0 || visited.count(other) || sc.rooms[other].stairwell) continue;
        auto [a, b] = crossing(d, sc.rooms[room].rect);
        walk.move_to(a.x(), a.y());
        walk.move_to(b.x(), b.y());
        self(self, other);
        std::tie(a, b) = crossing(d, sc.rooms[other].rect);
        walk.move_to(a.x(), a.y());
        walk.move_to(b.x(), b.y());
        walk.move_to(c.x(), c.y());
      }
    };
    visit(visit, current);

    if (k + 1 < n_floors) {
      const Rect& sw = *spec.stairwell;
      const DoorGeom* d = stair_door(k);
      const auto [a, b] = crossing(*d, sc.rooms[current].rect);
      walk.move_to(a.x(), a.y());
      walk.move_to(b.x(), b.y());
      const double xr = 0.5 * (0.5 * (sw.x0 + sw.x1) + sw.x1);
      const double y_near = landing_y(sw, k);
      const double y_far = landing_y(sw, k + 1);
      const double ramp_start = k % 2 == 0 ? sw.y0 + kLanding : sw.y1 - kLanding;
      const double ramp_end = k % 2 == 0 ? sw.y1 - kLanding : sw.y0 + kLanding;
      walk.move_to(xr, y_near);
      walk.spin();
      walk.move_to(xr, ramp_start);
      walk.move_to(xr, ramp_end, cam(k + 1));
      walk.move_to(xr, y_far);
      walk.spin();
    }
  }
  return poses;
}

int floor_of_height(const std::vector<FloorInterval>& floors, double ground) {
  int k = 0;
  for (int i = 0; i < static_cast<int>(floors.size()); ++i) {
    if (floors[i].z_floor <= ground + 0.05) k = i;
  }
  return k;
}

int room_at(const Sampled& sc, int floor, double x, double y) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < sc.rooms.size(); ++r) {
    if (sc.rooms[r].floor != floor) continue;
    const Rect& q = sc.rooms[r].rect;
    if (q.contains(x, y)) return static_cast<int>(r);
    const double d = (center_of(q) - Eigen::Vector2d(x, y)).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(r);
    }
  }
  return best;
}

}  // namespace

GroundTruth ground_truth(const SceneSpec& spec) { return sample_scene(spec).gt; }

SynthScene generate(const SceneSpec& spec, const GenerateOptions& options) {
  Sampled sc = sample_scene(spec);
  SynthScene scene;
  scene.spec = spec;
  scene.embedder = std::make_shared<SynthEmbedder>(vocabulary(spec), spec.dim, spec.seed);
  scene.trajectory = make_trajectory(spec, sc);
  for (const auto& p : scene.trajectory) {
    scene.trajectory_stairs.push_back(spec.stairwell && spec.stairwell->contains(p.translation.x(), p.translation.y()));
  }

  std::set<std::string> rooms, objects;
  for (const auto& r : sc.gt.rooms) rooms.insert(r.category);
  for (const auto& o : sc.gt.objects) objects.insert(o.category);
  scene.room_categories.assign(rooms.begin(), rooms.end());
  scene.object_categories.assign(objects.begin(), objects.end());
  scene.ignore_labels = {kWall, kFloor, kCeiling, kStairs};

  if (options.frames) {
    // Candidate points per room: its expanded footprint within the floor's height range.
    const auto& gt = sc.gt;
    std::vector<std::vector<std::uint32_t>> view_sets(sc.rooms.size());
    for (std::size_t r = 0; r < sc.rooms.size(); ++r) {
      const auto& lv = gt.floors[sc.rooms[r].floor];
      for (std::size_t i = 0; i < gt.cloud.size(); ++i) {
        const auto& p = gt.cloud.points[i];
        if (p.z() < lv.z_floor - 0.2 || p.z() > lv.z_ceiling + 0.2) continue;
        if (sc.rooms[r].rect.contains(p.x(), p.y(), 0.1)) view_sets[r].push_back(static_cast<std::uint32_t>(i));
      }
    }

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < scene.trajectory.size(); i += static_cast<std::size_t>(spec.frame_stride)) kept.push_back(i);
    scene.frames.resize(kept.size());
    const double half_fov = 0.5 * spec.fov_deg * std::numbers::pi / 180.0;
    parallel_for(kept.size(), [&](std::size_t fi) {
      const std::size_t ti = kept[fi];
      const Pose& pose = scene.trajectory[ti];
      SynthFrame& frame = scene.frames[fi];
      const double px = pose.translation.x(), py = pose.translation.y();
      const double ground = pose.translation.z() - spec.camera_height;
      const int k = floor_of_height(gt.floors, ground);
      const int room = room_at(sc, k, px, py);
      frame.floor = k;
      frame.room = room;
      frame.stairs = scene.trajectory_stairs[ti] != 0;

      std::vector<std::uint32_t> candidates = view_sets[room];
      const bool on_ramp = ground > gt.floors[k].z_floor + 0.05 && k + 1 < static_cast<int>(gt.floors.size());
      double zlo = gt.floors[k].z_floor - 0.2, zhi = gt.floors[k].z_ceiling + 0.2;
      if (on_ramp) {
        const int above = room_at(sc, k + 1, px, py);
        candidates.insert(candidates.end(), view_sets[above].begin(), view_sets[above].end());
        zlo = ground - 0.2;
        zhi = ground + spec.floors[k].height + 0.2;
      }

      const double yaw = pose.yaw();
      std::map<int, PointCloud> visible;
      for (auto i : candidates) {
        const auto& p = gt.cloud.points[i];
        if (p.z() < zlo || p.z() > zhi) continue;
        const double dx = p.x() - px, dy = p.y() - py;
        const double d = std::hypot(dx, dy);
        if (d > spec.range || d < 1e-6) continue;
        if (std::abs(std::remainder(std::atan2(dy, dx) - yaw, 2.0 * std::numbers::pi)) > half_fov) continue;
        const int g = sc.point_group[i];
        if (sc.groups[g].structure && !spec.structure_masks) continue;
        visible[g].points.push_back(p);
      }

      std::mt19937_64 rng(mix(spec.seed, 0xF000000ULL + fi));
      frame.record.frame_id = fi;
      frame.record.pose = pose;
      frame.record.global = scene.embedder->noisy(sc.rooms[room].category, spec.sigma, rng);
      for (auto& [g, cloud] : visible) {
        if (cloud.size() < kMinMaskPoints) continue;
        MaskRecord m;
        m.points = std::move(cloud);
        m.local = scene.embedder->noisy(sc.groups[g].label, spec.sigma, rng);
        m.maskonly = scene.embedder->noisy(sc.groups[g].label, spec.sigma, rng);
        frame.record.masks.push_back(std::move(m));
        frame.mask_labels.push_back(sc.groups[g].label);
      }
    });
  }
  scene.gt = std::move(sc.gt);
  return scene;
}

// ---------------------------------------------------------------------------
// Layouts
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kRoomPool{"kitchen",     "bedroom", "bathroom",     "living room",
                                         "office",      "dining room", "laundry room", "study"};
const std::vector<std::string> kObjectPool{"chair", "table",  "sofa",      "bed",       "toilet",
                                           "sink",  "cabinet", "desk",     "bookshelf", "refrigerator",
                                           "bathtub", "tv stand", "plant", "lamp"};

std::vector<Rect> split_footprint(const Rect& footprint, int target, std::mt19937_64& rng) {
  std::vector<Rect> leaves{footprint};
  auto snap = [](double v) { return std::round(v * 10.0) / 10.0; };
  while (static_cast<int>(leaves.size()) < target) {
    int pick = -1;
    double best = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const double len = std::max(leaves[i].width(), leaves[i].depth());
      if (len >= 6.0 && len * std::min(leaves[i].width(), leaves[i].depth()) > best) {
        best = len * std::min(leaves[i].width(), leaves[i].depth());
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) break;
    Rect r = leaves[pick];
    const bool along_x = r.width() >= r.depth();
    const double len = along_x ? r.width() : r.depth();
    std::uniform_real_distribution<double> at(3.0, len - 3.0);
    const double cut = snap((along_x ? r.x0 : r.y0) + at(rng));
    Rect a = r, b = r;
    if (along_x) {
      a.x1 = cut;
      b.x0 = cut;
    } else {
      a.y1 = cut;
      b.y0 = cut;
    }
    if (std::min({a.width(), a.depth(), b.width(), b.depth()}) < 3.0 - 1e-9) continue;
    leaves[pick] = a;
    leaves.push_back(b);
  }
  return leaves;
}

void place_objects(FloorSpec& floor, const std::vector<Eigen::Vector2d>& door_centers, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& room : floor.rooms) {
    std::vector<std::string> pool = kObjectPool;
    std::shuffle(pool.begin(), pool.end(), rng);
    const int n = 1 + static_cast<int>(unit(rng) * 3.0);
    const Eigen::Vector2d c = center_of(room.rect);
    for (int i = 0; i < n; ++i) {
      for (int attempt = 0; attempt < 200; ++attempt) {
        const double sx = 0.4 + 0.6 * unit(rng), sy = 0.4 + 0.6 * unit(rng), sz = 0.4 + 0.8 * unit(rng);
        const double x0 = room.rect.x0 + 0.5 + unit(rng) * (room.rect.width() - 1.0 - sx);
        const double y0 = room.rect.y0 + 0.5 + unit(rng) * (room.rect.depth() - 1.0 - sy);
        BoxSpec b{{x0, y0, 0.0}, {x0 + sx, y0 + sy, sz}, pool[i]};
        auto clear_of = [&](const Eigen::Vector2d& p, double r) {
          const double dx = std::max({b.lo.x() - p.x(), 0.0, p.x() - b.hi.x()});
          const double dy = std::max({b.lo.y() - p.y(), 0.0, p.y() - b.hi.y()});
          return std::hypot(dx, dy) >= r;
        };
        bool ok = clear_of(c, 0.8);
        for (const auto& d : door_centers) ok = ok && clear_of(d, 1.2);
        for (const auto& o : room.objects) {
          ok = ok && (b.lo.x() > o.hi.x() + 0.3 || o.lo.x() > b.hi.x() + 0.3 || b.lo.y() > o.hi.y() + 0.3 ||
                      o.lo.y() > b.hi.y() + 0.3);
        }
        if (!ok) continue;
        room.objects.push_back(std::move(b));
        break;
      }
    }
  }
}

}  // namespace

FloorSpec random_layout(std::mt19937_64& rng, int min_rooms, int max_rooms, bool with_objects) {
  std::uniform_real_distribution<double> side(7.0, 13.0);
  const double w = std::round(side(rng) * 10.0) / 10.0;
  const double d = std::round(side(rng) * 10.0) / 10.0;
  SceneSpec probe;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::uniform_int_distribution<int> count(min_rooms, max_rooms);
    const auto rects = split_footprint({0.0, 0.0, w, d}, count(rng), rng);
    if (static_cast<int>(rects.size()) < min_rooms) continue;
    FloorSpec floor;
    std::vector<std::string> cats = kRoomPool;
    std::shuffle(cats.begin(), cats.end(), rng);
    for (std::size_t i = 0; i < rects.size(); ++i) floor.rooms.push_back({rects[i], cats[i % cats.size()], {}});
    probe.floors = {floor};
    if (!probe.validate().empty()) continue;
    if (with_objects) {
      std::vector<Eigen::Vector2d> centers;
      for (const auto& door : compute_doors(probe, room_list(probe), nullptr)) centers.push_back(door.center);
      place_objects(floor, centers, rng);
    }
    return floor;
  }
  throw Error("could not generate a connected layout");
}

SceneSpec random_building(std::uint64_t seed, int floors) {
  if (floors < 1 || floors > 3) throw Error("floor count must be in [1, 3]");
  std::mt19937_64 rng(mix(seed, 0xB01DULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    SceneSpec spec;
    spec.seed = seed;
    spec.height_noise = 0.01 * unit(rng);
    spec.door_width = std::round((0.7 + 0.3 * unit(rng)) * 100.0) / 100.0;
    spec.base_z = std::round((unit(rng) * 2.0 - 1.0) * 100.0) / 100.0;
    spec.slab = 0.25 + 0.15 * unit(rng);
    const FloorSpec first = random_layout(rng);
    double fw = 0.0, fd = 0.0;
    for (const auto& r : first.rooms) {
      fw = std::max(fw, r.rect.x1);
      fd = std::max(fd, r.rect.y1);
    }
    if (floors > 1) {
      if (fd < 2 * kLanding + 1.5) continue;
      spec.stairwell = Rect{fw, 0.0, fw + 3.0, std::min(fd, 6.0)};
    }
    for (int k = 0; k < floors; ++k) {
      FloorSpec f;
      if (k == 0) {
        f = first;
      } else {
        // Same footprint, new partition.
        for (int tries = 0; tries < 100; ++tries) {
          const auto rects = split_footprint({0.0, 0.0, fw, fd}, 2 + static_cast<int>(unit(rng) * 5.0), rng);
          f.rooms.clear();
          std::vector<std::string> cats = kRoomPool;
          std::shuffle(cats.begin(), cats.end(), rng);
          for (std::size_t i = 0; i < rects.size(); ++i) f.rooms.push_back({rects[i], cats[i % cats.size()], {}});
          if (f.rooms.size() >= 2) break;
        }
      }
      f.height = std::round((2.6 + 0.6 * unit(rng)) * 100.0) / 100.0;
      spec.floors.push_back(std::move(f));
    }
    if (!spec.validate().empty()) continue;
    // Objects on upper floors once the doors are known.
    const auto doors = compute_doors(spec, room_list(spec), nullptr);
    for (int k = 1; k < floors; ++k) {
      std::vector<Eigen::Vector2d> centers;
      for (const auto& d : doors) {
        if (d.floor == k) centers.push_back(d.center);
      }
      place_objects(spec.floors[k], centers, rng);
    }
    if (spec.stairwell) {
      // Floor 0 objects were placed before the stairwell door existed.
      bool clear = true;
      for (const auto& d : doors) {
        if (d.floor != 0 || d.center.x() != spec.stairwell->x0) continue;
        for (const auto& r : spec.floors[0].rooms) {
          for (const auto& o : r.objects) {
            const double dx = std::max({o.lo.x() - d.center.x(), 0.0, d.center.x() - o.hi.x()});
            const double dy = std::max({o.lo.y() - d.center.y(), 0.0, d.center.y() - o.hi.y()});
            clear = clear && std::hypot(dx, dy) >= 1.2;
          }
        }
      }
      if (!clear) continue;
    }
    return spec;
  }
  throw Error("could not generate a building");
}

SceneSpec two_floor_scene() {
  SceneSpec s;
  s.seed = 7;
  s.stairwell = Rect{8.0, 0.0, 11.0, 5.0};
  FloorSpec ground;
  ground.rooms.push_back({{0.0, 0.0, 4.0, 5.0},
                          "kitchen",
                          {{{0.6, 0.6, 0.0}, {1.6, 1.4, 0.9}, "table"},
                           {{2.6, 3.6, 0.0}, {3.3, 4.3, 1.8}, "refrigerator"},
                           {{0.6, 3.4, 0.0}, {1.1, 3.9, 0.9}, "chair"}}});
  ground.rooms.push_back({{4.0, 0.0, 8.0, 5.0},
                          "living room",
                          {{{4.6, 3.5, 0.0}, {6.4, 4.4, 0.8}, "sofa"},
                           {{6.9, 2.0, 0.0}, {7.4, 3.2, 0.6}, "tv stand"},
                           {{4.6, 0.6, 0.0}, {5.0, 1.0, 1.0}, "plant"}}});
  FloorSpec upper;
  upper.rooms.push_back({{0.0, 0.0, 4.0, 5.0},
                         "bedroom",
                         {{{0.6, 0.6, 0.0}, {2.2, 2.6, 0.6}, "bed"},
                          {{2.8, 4.0, 0.0}, {3.4, 4.4, 1.2}, "cabinet"},
                          {{0.6, 3.8, 0.0}, {1.0, 4.2, 1.5}, "lamp"}}});
  upper.rooms.push_back({{4.0, 0.0, 8.0, 5.0},
                         "bathroom",
                         {{{4.6, 0.6, 0.0}, {5.2, 1.3, 0.5}, "toilet"},
                          {{6.8, 0.6, 0.0}, {7.4, 1.1, 0.9}, "sink"},
                          {{4.6, 3.2, 0.0}, {6.2, 4.2, 0.6}, "bathtub"}}});
  s.floors = {ground, upper};
  return s;
}

SceneSpec four_room_scene() {
  SceneSpec s;
  s.seed = 11;
  FloorSpec f;
  f.rooms.push_back({{0.0, 0.0, 4.0, 4.0},
                     "kitchen",
                     {{{0.5, 0.5, 0.0}, {1.5, 1.3, 0.9}, "table"},
                      {{2.7, 0.5, 0.0}, {3.4, 1.2, 1.8}, "refrigerator"}}});
  f.rooms.push_back({{4.0, 0.0, 8.0, 4.0},
                     "office",
                     {{{6.4, 0.5, 0.0}, {7.5, 1.2, 0.75}, "desk"},
                      {{4.5, 0.5, 0.0}, {5.0, 1.0, 0.9}, "chair"},
                      {{7.0, 2.7, 0.0}, {7.5, 3.5, 1.8}, "bookshelf"}}});
  f.rooms.push_back({{0.0, 4.0, 4.0, 8.0},
                     "bedroom",
                     {{{0.5, 6.0, 0.0}, {2.0, 7.5, 0.6}, "bed"},
                      {{2.9, 6.9, 0.0}, {3.5, 7.5, 1.2}, "cabinet"}}});
  f.rooms.push_back({{4.0, 4.0, 8.0, 8.0},
                     "bathroom",
                     {{{4.5, 6.9, 0.0}, {5.1, 7.5, 0.5}, "toilet"},
                      {{6.9, 6.9, 0.0}, {7.5, 7.4, 0.9}, "sink"},
                      {{6.0, 4.5, 0.0}, {7.5, 5.3, 0.6}, "bathtub"}}});
  s.floors = {f};
  return s;
}

// ---------------------------------------------------------------------------
// Dataset files
// ---------------------------------------------------------------------------

Config scene_config(const SynthScene& scene) {
  Config config;
  config.room_labels = scene.room_categories;
  config.object_labels = scene.object_categories;
  for (const auto& l : scene.ignore_labels) config.object_labels.push_back(l);
  config.ignore_labels = scene.ignore_labels;
  config.encoder.kind = "synth";
  config.encoder.dim = scene.spec.dim;
  config.encoder.seed = scene.spec.seed;
  config.encoder.vocabulary = scene.embedder->vocabulary();
  return config;
}

void write_dataset(const SynthScene& scene, const fs::path& dir) {
  fs::create_directories(dir / "frames");
  for (const auto& f : scene.frames) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06llu.hsgf", static_cast<unsigned long long>(f.record.frame_id));
    write_frame(dir / "frames" / name, f.record);
  }

  const auto& gt = scene.gt;
  json j;
  j["floors"] = json::array();
  for (const auto& f : gt.floors) j["floors"].push_back({f.z_floor, f.z_ceiling});
  j["rooms"] = json::array();
  for (const auto& r : gt.rooms) {
    j["rooms"].push_back({{"floor", r.floor}, {"rect", rect_json(r.rect)}, {"category", r.category},
                          {"stairwell", r.stairwell}});
  }
  j["objects"] = json::array();
  for (const auto& o : gt.objects) {
    j["objects"].push_back({{"floor", o.floor},
                            {"room", o.room},
                            {"category", o.category},
                            {"box", {o.lo.x(), o.lo.y(), o.lo.z(), o.hi.x(), o.hi.y(), o.hi.z()}}});
  }
  j["categories"] = gt.categories;
  {
    std::ofstream out(dir / "gt.json");
    out << j.dump(2) << "\n";
    if (!out) throw Error("write failed: " + (dir / "gt.json").string());
  }

  {
    std::ofstream out(dir / "gt_points.bin", std::ios::binary);
    auto put = [&](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    out.write("HSGP", 4);
    put(std::uint32_t{1});
    put(static_cast<std::uint64_t>(gt.cloud.size()));
    for (std::size_t i = 0; i < gt.cloud.size(); ++i) {
      const auto& p = gt.cloud.points[i];
      put(p.x());
      put(p.y());
      put(p.z());
      put(static_cast<std::int32_t>(gt.labels[i]));
      put(static_cast<std::int32_t>(gt.point_objects[i]));
    }
    if (!out) throw Error("write failed: " + (dir / "gt_points.bin").string());
  }

  auto write_lines = [&](const fs::path& p, const std::vector<std::string>& lines) {
    std::ofstream out(p);
    for (const auto& l : lines) out << l << "\n";
  };
  const Config config = scene_config(scene);
  write_lines(dir / "room_labels.txt", config.room_labels);
  write_lines(dir / "object_labels.txt", config.object_labels);
  {
    std::ofstream out(dir / "config.json");
    out << config_json(config);
  }
  {
    std::ofstream out(dir / "scene.json");
    out << scene_spec_json(scene.spec);
  }
}

GroundTruth load_ground_truth(const fs::path& dir) {
  GroundTruth gt;
  json j;
  {
    std::ifstream in(dir / "gt.json");
    if (!in) throw Error("cannot open " + (dir / "gt.json").string());
    try {
      j = json::parse(in);
      for (const auto& f : j.at("floors")) gt.floors.push_back({f.at(0).get<double>(), f.at(1).get<double>()});
      for (const auto& r : j.at("rooms")) {
        gt.rooms.push_back({r.at("floor").get<int>(), rect_from(r.at("rect"), "room rect"),
                            r.at("category").get<std::string>(), {}, r.value("stairwell", false)});
      }
      for (const auto& o : j.at("objects")) {
        const auto& b = o.at("box");
        gt.objects.push_back({o.at("floor").get<int>(), o.at("room").get<int>(), o.at("category").get<std::string>(),
                              {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()},
                              {b.at(3).get<double>(), b.at(4).get<double>(), b.at(5).get<double>()},
                              {}});
      }
      gt.categories = j.at("categories").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw Error((dir / "gt.json").string() + ": " + e.what());
    }
  }

  const fs::path points = dir / "gt_points.bin";
  std::ifstream in(points, std::ios::binary);
  if (!in) throw Error("cannot open " + points.string());
  std::uint64_t offset = 0;
  auto get = [&](auto& v, const char* field) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error(points.string() + ": truncated at byte " + std::to_string(offset) + " (" + field + ")");
    offset += sizeof v;
  };
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "HSGP") throw Error(points.string() + ": bad magic at byte 0");
  offset = 4;
  std::uint32_t version = 0;
  std::uint64_t n = 0;
  get(version, "version");
  if (version != 1) throw Error(points.string() + ": unsupported version");
  get(n, "point count");
  for (std::uint64_t i = 0; i < n; ++i) {
    float x, y, z;
    std::int32_t label, object;
    get(x, "points");
    get(y, "points");
    get(z, "points");
    get(label, "labels");
    get(object, "objects");
    if (label < 0 || label >= static_cast<std::int32_t>(gt.categories.size()) || object < -1 ||
        object >= static_cast<std::int32_t>(gt.objects.size())) {
      throw Error(points.string() + ": bad label at byte " + std::to_string(offset - 8));
    }
    const Point3 p(x, y, z);
    gt.cloud.points.push_back(p);
    gt.labels.push_back(label);
    gt.point_objects.push_back(object);
    if (object >= 0) gt.objects[object].cloud.points.push_back(p);
    for (auto& room : gt.rooms) {
      if (in_room(room, gt.floors.at(room.floor), p)) room.cloud.points.push_back(p);
    }
  }
  return gt;
}

std::vector<LocalizationObservation> localization_observations(std::span<const SynthFrame> frames,
                                                               const FusionWeights& weights,
                                                               std::span<const std::string> ignore_labels) {
  const std::set<std::string> ignore(ignore_labels.begin(), ignore_labels.end());
  std::vector<LocalizationObservation> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    LocalizationObservation obs;
    const auto& pose = frames[i].record.pose;
    if (i > 0) {
      const auto& prev = frames[i - 1].record.pose;
      const double yaw = prev.yaw();
      const double dx = pose.translation.x() - prev.translation.x();
      const double dy = pose.translation.y() - prev.translation.y();
      obs.forward = std::cos(yaw) * dx + std::sin(yaw) * dy;
      obs.lateral = -std::sin(yaw) * dx + std::cos(yaw) * dy;
      obs.turn = std::remainder(pose.yaw() - yaw, 2.0 * std::numbers::pi);
    }
    obs.global = frames[i].record.global;
    for (std::size_t m = 0; m < frames[i].record.masks.size(); ++m) {
      if (ignore.count(frames[i].mask_labels[m])) continue;
      const auto& mask = frames[i].record.masks[m];
      obs.objects.push_back(fuse_embeddings(obs.global, mask.local, mask.maskonly, weights));
    }
    out.push_back(std::move(obs));
  }
  return out;
}

}  // namespace hsg::synth
