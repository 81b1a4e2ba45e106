#include "hsg/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <streambuf>

namespace hsg {

namespace fs = std::filesystem;

namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
  void magic(const char (&m)[5]) { bytes(m, 4); }
  void str(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void floats(const float* v, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
      bytes(v, n * sizeof(float));
    } else {
      for (std::size_t i = 0; i < n; ++i) put(v[i]);
    }
  }
  void embedding(const Embedding& e, int dim) {
    if (e.dim() != dim) throw Error("embedding dimension " + std::to_string(e.dim()) + " differs from " + std::to_string(dim));
    floats(e.values().data(), static_cast<std::size_t>(dim));
  }
  void cloud(const PointCloud& c) {
    put<std::uint32_t>(static_cast<std::uint32_t>(c.size()));
    for (const auto& p : c.points) floats(p.data(), 3);
    put<std::uint8_t>(c.has_colors() ? 1 : 0);
    for (const auto& rgb : c.colors) bytes(rgb.data(), 3);
  }
  void grid(const MaskGrid& g) {
    put(g.frame.origin_x);
    put(g.frame.origin_y);
    put(g.frame.cell);
    put<std::int32_t>(g.frame.width);
    put<std::int32_t>(g.frame.height);
    // Alternating run lengths, starting with a (possibly empty) run of zeros.
    std::vector<std::uint32_t> runs;
    std::uint8_t value = 0;
    std::uint32_t run = 0;
    for (auto c : g.cells) {
      const std::uint8_t bit = c ? 1 : 0;
      if (bit != value) {
        runs.push_back(run);
        run = 0;
        value = bit;
      }
      ++run;
    }
    runs.push_back(run);
    put<std::uint32_t>(static_cast<std::uint32_t>(runs.size()));
    for (auto r : runs) put(r);
  }
  void check(const std::string& what) {
    if (!out_) throw Error("write failed: " + what);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    throw Error(name_ + ": " + why + " at byte " + std::to_string(offset_) + " (" + field + ")");
  }

  void bytes(void* data, std::size_t n, const std::string& field) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail(field, "truncated");
    offset_ += n;
  }
  template <typename T>
  T get(const std::string& field) {
    T v;
    bytes(&v, sizeof(T), field);
    return to_little(v);
  }
  void magic(const char (&m)[5]) {
    char b[4];
    bytes(b, 4, "magic");
    offset_ -= 4;
    if (std::memcmp(b, m, 4) != 0) fail("magic", std::string("expected ") + m);
    offset_ += 4;
  }
  std::uint32_t count(const std::string& field, std::uint64_t limit = 1u << 31) {
    const auto before = offset_;
    const auto n = get<std::uint32_t>(field);
    if (n > limit) {
      offset_ = before;
      fail(field, "implausible count " + std::to_string(n));
    }
    return n;
  }
  std::string str(const std::string& field) {
    const auto n = count(field, 1u << 20);
    std::string s(n, '\0');
    if (n) bytes(s.data(), n, field);
    return s;
  }
  void floats(float* v, std::size_t n, const std::string& field) {
    bytes(v, n * sizeof(float), field);
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < n; ++i) v[i] = to_little(v[i]);
    }
  }
  Embedding embedding(int dim, const std::string& field) {
    const auto start = offset_;
    Eigen::VectorXf v(dim);
    floats(v.data(), static_cast<std::size_t>(dim), field);
    if (!v.allFinite()) {
      offset_ = start;
      fail(field, "non-finite embedding");
    }
    const float norm = v.norm();
    if (std::abs(norm - 1.0f) <= 1e-4f) return Embedding::from_unit(std::move(v));
    if (norm < 1e-9f) {
      offset_ = start;
      fail(field, "zero embedding");
    }
    return Embedding::normalized(v);
  }
  PointCloud cloud(const std::string& field) {
    PointCloud c;
    const auto n = count(field + " point count");
    c.points.resize(n);
    for (auto& p : c.points) {
      const auto start = offset_;
      floats(p.data(), 3, field + " points");
      if (!p.allFinite()) {
        offset_ = start;
        fail(field + " points", "non-finite coordinate");
      }
    }
    const auto colored = get<std::uint8_t>(field + " color flag");
    if (colored > 1) fail(field + " color flag", "bad value");
    if (colored) {
      c.colors.resize(n);
      for (auto& rgb : c.colors) bytes(rgb.data(), 3, field + " colors");
    }
    return c;
  }
  MaskGrid grid(const std::string& field) {
    GridFrame f;
    f.origin_x = get<double>(field + " origin");
    f.origin_y = get<double>(field + " origin");
    f.cell = get<double>(field + " cell");
    f.width = get<std::int32_t>(field + " width");
    f.height = get<std::int32_t>(field + " height");
    if (!(f.cell > 0.0) || f.width < 1 || f.height < 1 || f.cell_count() > (std::size_t{1} << 32)) {
      fail(field, "invalid grid frame");
    }
    MaskGrid g(f, 0);
    const auto n_runs = count(field + " runs");
    std::size_t pos = 0;
    std::uint8_t value = 0;
    for (std::uint32_t r = 0; r < n_runs; ++r) {
      const auto len = get<std::uint32_t>(field + " runs");
      if (pos + len > g.cells.size()) fail(field + " runs", "run exceeds grid");
      std::fill_n(g.cells.begin() + static_cast<std::ptrdiff_t>(pos), len, value);
      pos += len;
      value ^= 1;
    }
    if (pos != g.cells.size()) fail(field + " runs", "runs do not cover grid");
    return g;
  }
  std::uint64_t offset() const { return offset_; }
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) fail("trailer", "trailing bytes");
  }

 private:
  std::istream& in_;
  std::string name_;
  std::uint64_t offset_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

void write_frame(std::ostream& out, const FrameRecord& frame) {
  Writer w(out);
  const int dim = frame.global.dim();
  w.magic("HSGF");
  w.put(kFrameVersion);
  w.put(frame.frame_id);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) w.put(frame.pose.rotation(r, c));
  }
  for (int i = 0; i < 3; ++i) w.put(frame.pose.translation[i]);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim));
  w.embedding(frame.global, dim);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(frame.masks.size()));
  for (const auto& m : frame.masks) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.points.size()));
    for (const auto& p : m.points.points) w.floats(p.data(), 3);
    w.embedding(m.local, dim);
    w.embedding(m.maskonly, dim);
  }
  w.check("frame " + std::to_string(frame.frame_id));
}

void write_frame(const fs::path& path, const FrameRecord& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_frame(out, frame);
}

FrameRecord read_frame(std::istream& in, const std::string& name) {
  Reader r(in, name);
  FrameRecord f;
  r.magic("HSGF");
  if (const auto v = r.get<std::uint32_t>("version"); v != kFrameVersion) {
    r.fail("version", "unsupported version " + std::to_string(v));
  }
  f.frame_id = r.get<std::uint64_t>("frame id");
  for (int row = 0; row < 3; ++row) {
    for (int c = 0; c < 3; ++c) f.pose.rotation(row, c) = r.get<double>("pose");
  }
  for (int i = 0; i < 3; ++i) f.pose.translation[i] = r.get<double>("pose");
  if (!f.pose.is_valid()) r.fail("pose", "rotation is not orthonormal");
  const auto dim = r.count("embedding dim", 1u << 16);
  if (dim == 0) r.fail("embedding dim", "zero dimension");
  f.global = r.embedding(static_cast<int>(dim), "global embedding");
  const auto n_masks = r.count("mask count", 1u << 20);
  f.masks.resize(n_masks);
  for (std::uint32_t m = 0; m < n_masks; ++m) {
    auto& mask = f.masks[m];
    const std::string field = "mask " + std::to_string(m);
    const auto n = r.count(field + " point count");
    mask.points.points.resize(n);
    for (auto& p : mask.points.points) {
      r.floats(p.data(), 3, field + " points");
      if (!p.allFinite()) r.fail(field + " points", "non-finite coordinate");
    }
    mask.local = r.embedding(static_cast<int>(dim), field + " local embedding");
    mask.maskonly = r.embedding(static_cast<int>(dim), field + " mask-only embedding");
  }
  r.expect_end();
  return f;
}

FrameRecord read_frame(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_frame(in, path.string());
}

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".hsgf") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return out;
}

std::vector<FrameRecord> load_frames(const fs::path& dir) {
  std::vector<FrameRecord> out;
  for (const auto& p : list_frame_files(dir)) out.push_back(read_frame(p));
  if (!out.empty()) {
    const int dim = out.front().global.dim();
    for (const auto& f : out) {
      if (f.global.dim() != dim) throw Error("frame " + std::to_string(f.frame_id) + " has embedding dimension " +
                                             std::to_string(f.global.dim()) + ", expected " + std::to_string(dim));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

void save_graph(std::ostream& out, const SceneGraph& g) {
  Writer w(out);
  w.magic("HSGG");
  w.put(kGraphVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.dim));

  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.floors.size()));
  for (const auto& f : g.floors) {
    w.put<std::int32_t>(f.index);
    w.put(f.interval.z_floor);
    w.put(f.interval.z_ceiling);
    w.cloud(f.cloud);
    w.embedding(f.text_embedding, g.dim);
  }

  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.rooms.size()));
  for (const auto& r : g.rooms) {
    w.put<std::int32_t>(r.id);
    w.put<std::int32_t>(r.floor_index);
    w.grid(r.mask);
    w.cloud(r.cloud);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(r.view_embeddings.size()));
    for (const auto& v : r.view_embeddings) w.embedding(v, g.dim);
    w.str(r.category);
  }

  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.objects.size()));
  for (const auto& o : g.objects) {
    w.put<std::int32_t>(o.id);
    w.put<std::int32_t>(o.room_id);
    w.cloud(o.cloud);
    w.embedding(o.feature, g.dim);
    w.str(o.top1_label);
  }

  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.nav.nodes().size()));
  for (const auto& n : g.nav.nodes()) {
    w.floats(n.position.data(), 3);
    w.put<std::int32_t>(n.floor_index);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.nav.edges().size()));
  for (const auto& e : g.nav.edges()) {
    w.put<std::int32_t>(e.a);
    w.put<std::int32_t>(e.b);
    w.put<std::uint8_t>(e.stairs ? 1 : 0);
  }

  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.free_space.size()));
  for (const auto& m : g.free_space) {
    w.put<std::int32_t>(m.floor_index);
    w.put(m.z);
    w.grid(m.free);
  }
  w.check("graph");
}

void save_graph(const fs::path& path, const SceneGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_graph(out, graph);
}

SceneGraph load_graph(std::istream& in, const std::string& name) {
  Reader r(in, name);
  SceneGraph g;
  r.magic("HSGG");
  if (const auto v = r.get<std::uint32_t>("version"); v != kGraphVersion) {
    r.fail("version", "unsupported version " + std::to_string(v));
  }
  g.dim = static_cast<int>(r.count("embedding dim", 1u << 16));
  if (g.dim == 0) r.fail("embedding dim", "zero dimension");

  const auto n_floors = r.count("floor count", 1u << 16);
  for (std::uint32_t i = 0; i < n_floors; ++i) {
    const std::string field = "floor " + std::to_string(i);
    FloorNode f;
    f.index = r.get<std::int32_t>(field + " index");
    if (f.index != static_cast<int>(i)) r.fail(field + " index", "floor ids must be consecutive");
    f.interval.z_floor = r.get<double>(field + " interval");
    f.interval.z_ceiling = r.get<double>(field + " interval");
    f.cloud = r.cloud(field + " cloud");
    f.text_embedding = r.embedding(g.dim, field + " embedding");
    g.floors.push_back(std::move(f));
  }

  const auto n_rooms = r.count("room count", 1u << 24);
  for (std::uint32_t i = 0; i < n_rooms; ++i) {
    const std::string field = "room " + std::to_string(i);
    RoomNode room;
    room.id = r.get<std::int32_t>(field + " id");
    if (room.id != static_cast<int>(i)) r.fail(field + " id", "room ids must be consecutive");
    room.floor_index = r.get<std::int32_t>(field + " floor");
    if (room.floor_index < 0 || room.floor_index >= static_cast<int>(n_floors)) {
      r.fail(field + " floor", "missing floor " + std::to_string(room.floor_index));
    }
    room.mask = r.grid(field + " mask");
    room.cloud = r.cloud(field + " cloud");
    const auto n_views = r.count(field + " view count", 1u << 16);
    for (std::uint32_t v = 0; v < n_views; ++v) room.view_embeddings.push_back(r.embedding(g.dim, field + " views"));
    room.category = r.str(field + " category");
    g.rooms.push_back(std::move(room));
  }

  const auto n_objects = r.count("object count", 1u << 24);
  for (std::uint32_t i = 0; i < n_objects; ++i) {
    const std::string field = "object " + std::to_string(i);
    ObjectNode o;
    o.id = r.get<std::int32_t>(field + " id");
    if (o.id != static_cast<int>(i)) r.fail(field + " id", "object ids must be consecutive");
    o.room_id = r.get<std::int32_t>(field + " room");
    if (o.room_id < 0 || o.room_id >= static_cast<int>(n_rooms)) {
      r.fail(field + " room", "missing room " + std::to_string(o.room_id));
    }
    o.cloud = r.cloud(field + " cloud");
    o.feature = r.embedding(g.dim, field + " feature");
    o.top1_label = r.str(field + " label");
    g.objects.push_back(std::move(o));
  }

  const auto n_nodes = r.count("nav node count");
  for (std::uint32_t i = 0; i < n_nodes; ++i) {
    Point3 p;
    r.floats(p.data(), 3, "nav node " + std::to_string(i));
    const int floor = r.get<std::int32_t>("nav node " + std::to_string(i) + " floor");
    g.nav.add_node(p, floor);
  }
  const auto n_edges = r.count("nav edge count");
  for (std::uint32_t i = 0; i < n_edges; ++i) {
    const std::string field = "nav edge " + std::to_string(i);
    const int a = r.get<std::int32_t>(field);
    const int b = r.get<std::int32_t>(field);
    const auto stairs = r.get<std::uint8_t>(field + " flag");
    if (a < 0 || b < 0 || a >= static_cast<int>(n_nodes) || b >= static_cast<int>(n_nodes) || a == b) {
      r.fail(field, "bad endpoints");
    }
    g.nav.add_edge(a, b, stairs != 0);
  }

  const auto n_maps = r.count("free space count", 1u << 16);
  for (std::uint32_t i = 0; i < n_maps; ++i) {
    const std::string field = "free space " + std::to_string(i);
    FreeSpaceMap m;
    m.floor_index = r.get<std::int32_t>(field + " floor");
    m.z = r.get<double>(field + " height");
    m.free = r.grid(field + " grid");
    g.free_space.push_back(std::move(m));
  }
  r.expect_end();
  g.validate();
  return g;
}

SceneGraph load_graph(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return load_graph(in, path.string());
}

struct ByteCounter::Impl : std::streambuf {
  std::uint64_t n = 0;
  std::ostream os{this};
  int_type overflow(int_type c) override {
    if (!traits_type::eq_int_type(c, traits_type::eof())) ++n;
    return traits_type::not_eof(c);
  }
  std::streamsize xsputn(const char*, std::streamsize count) override {
    n += static_cast<std::uint64_t>(count);
    return count;
  }
};

ByteCounter::ByteCounter() : impl_(std::make_unique<Impl>()) {}
ByteCounter::~ByteCounter() = default;
std::ostream& ByteCounter::stream() { return impl_->os; }
std::uint64_t ByteCounter::count() const { return impl_->n; }

std::uint64_t graph_byte_size(const SceneGraph& graph) {
  ByteCounter counter;
  save_graph(counter.stream(), graph);
  return counter.count();
}

// ---------------------------------------------------------------------------
// Dense baseline
// ---------------------------------------------------------------------------

void write_dense_dump(std::ostream& out, const PointFeatureMap& map) {
  if (!map.finalized()) throw Error("feature map is not finalized");
  Writer w(out);
  w.magic("HSGD");
  w.put(kDenseVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(map.dim()));
  w.put<std::uint64_t>(map.featured_count());
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map.state(i) != PointFeatureState::kFeatured) continue;
    w.floats(map.reference().points[i].data(), 3);
    const auto col = map.column(i);
    w.floats(col.data(), static_cast<std::size_t>(map.dim()));
  }
  w.check("dense dump");
}

std::uint64_t dense_dump_byte_size(const PointFeatureMap& map) {
  ByteCounter counter;
  write_dense_dump(counter.stream(), map);
  return counter.count();
}

// ---------------------------------------------------------------------------
// Labels and text embeddings
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> load_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  if (out.empty()) throw Error(path.string() + ": no labels");
  return out;
}

std::vector<std::pair<std::string, Embedding>> load_text_embeddings(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::pair<std::string, Embedding>> out;
  std::string line;
  int line_no = 0;
  int dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(path.string() + ":" + std::to_string(line_no) + ": missing tab");
    std::istringstream values(line.substr(tab + 1));
    std::vector<float> v;
    float x = 0.0f;
    while (values >> x) v.push_back(x);
    if (!values.eof()) throw Error(path.string() + ":" + std::to_string(line_no) + ": bad number");
    if (v.empty()) throw Error(path.string() + ":" + std::to_string(line_no) + ": empty vector");
    if (dim < 0) dim = static_cast<int>(v.size());
    if (static_cast<int>(v.size()) != dim) throw Error(path.string() + ":" + std::to_string(line_no) + ": dimension mismatch");
    Eigen::VectorXf e = Eigen::Map<Eigen::VectorXf>(v.data(), dim);
    out.push_back({trim(line.substr(0, tab)), std::abs(e.norm() - 1.0f) <= 1e-4f ? Embedding::from_unit(e)
                                                                                 : Embedding::normalized(e)});
  }
  return out;
}

void save_text_embeddings(const fs::path& path, const std::vector<std::pair<std::string, Embedding>>& entries) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  char buf[32];
  for (const auto& [text, e] : entries) {
    out << text << '\t';
    for (int i = 0; i < e.dim(); ++i) {
      std::snprintf(buf, sizeof buf, "%.9g", e.values()[i]);
      out << (i ? " " : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace hsg
