#include "hsg/config.hpp"
#include "hsg/io.hpp"
#include "hsg/synth.hpp"

#include <json.hpp>

#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace hsg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads known keys of one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error("config: " + name() + " must be an object");
  }
  /// Throws on keys that no get() or sub() asked for, here or in subsections.
  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw Error("config: unknown key " + qualified(key));
    }
    for (const auto& child : children_) child->done();
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error("config: wrong type for " + qualified(key));
    }
  }
  Section* sub(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return nullptr;
    children_.push_back(std::make_unique<Section>(j_.at(key), qualified(key)));
    return children_.back().get();
  }
  bool has(const char* key) const { return j_.contains(key); }
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string name() const { return path_.empty() ? "root" : path_; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
  std::vector<std::unique_ptr<Section>> children_;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Error("config: " + what);
}

}  // namespace

void Config::validate() const {
  check(merge.dist > 0.0, "merge.dist must be positive");
  check(merge.tau_merge > 0.0 && merge.tau_merge <= 1.0, "merge.tau_merge must be in (0, 1]");
  check(merge.voxel > 0.0, "merge.voxel must be positive");
  try {
    fusion.validate();
  } catch (const Error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  check(feature.eps > 0.0 && feature.eps <= 2.0, "feature.eps must be in (0, 2]");
  check(feature.min_pts >= 1, "feature.min_pts must be at least 1");
  check(feature.max_features >= 1, "feature.max_features must be at least 1");
  check(splat_dist > 0.0, "feature.splat_dist must be positive");
  check(reference_voxel > 0.0, "feature.reference_voxel must be positive");

  const auto& h = hierarchy;
  check(h.floors.bin > 0.0, "floors.bin must be positive");
  check(h.floors.peak_window > 0.0, "floors.peak_window must be positive");
  check(h.floors.peak_ratio > 0.0 && h.floors.peak_ratio <= 1.0, "floors.peak_ratio must be in (0, 1]");
  check(h.floors.cluster_eps > 0.0, "floors.cluster_eps must be positive");
  check(h.floors.smoothing_bins >= 1, "floors.smoothing_bins must be at least 1");
  check(h.rooms.cell > 0.0, "rooms.cell must be positive");
  check(h.rooms.wall_band_low >= 0.0 && h.rooms.wall_band_high >= 0.0, "rooms wall band must be nonnegative");
  check(h.rooms.wall_ratio > 0.0 && h.rooms.wall_ratio <= 1.0, "rooms.wall_ratio must be in (0, 1]");
  check(h.rooms.dilation_cells >= 0, "rooms.dilation_cells must be nonnegative");
  check(h.rooms.seed_distance > 0.0, "rooms.seed_distance must be positive");
  check(h.view_k >= 1, "hierarchy.view_k must be at least 1");
  check(h.object_merge_tau > 0.0 && h.object_merge_tau <= 1.0, "hierarchy.object_merge_tau must be in (0, 1]");
  check(h.object_merge_dist > 0.0, "hierarchy.object_merge_dist must be positive");
  check(h.voxel > 0.0, "hierarchy.voxel must be positive");
  check(h.crop_margin >= 0.0, "hierarchy.crop_margin must be non-negative");
  check(h.nav.cell > 0.0, "nav.cell must be positive");
  check(h.nav.delta_low >= 0.0 && h.nav.delta_high > h.nav.delta_low, "nav obstacle band is empty");
  check(h.nav.pose_radius >= 0.0, "nav.pose_radius must be nonnegative");
  check(h.nav.spur_cells >= 0, "nav.spur_cells must be nonnegative");
  check(h.nav.max_link > 0.0, "nav.max_link must be positive");

  check(retrieval.top_objects >= 1, "retrieval.top_objects must be at least 1");
  check(retrieval.top_rooms >= 1, "retrieval.top_rooms must be at least 1");
  check(localization.particles >= 1, "localization.particles must be at least 1");
  check(localization.sharpness > 0.0, "localization.sharpness must be positive");
  check(localization.sigma_xy >= 0.0 && localization.sigma_yaw >= 0.0, "localization noise must be nonnegative");
  check(localization.fov > 0.0 && localization.range > 0.0, "localization view cone must be positive");

  check(encoder.kind == "hash" || encoder.kind == "table" || encoder.kind == "synth",
        "encoder.kind must be hash, table or synth");
  check(encoder.dim >= 1 && encoder.dim <= 65536, "encoder.dim must be in [1, 65536]");
  check(encoder.kind != "table" || !encoder.table.empty(), "encoder.table is required for kind table");
  check(encoder.kind != "synth" || !encoder.vocabulary.empty(), "encoder.vocabulary is required for kind synth");
}

Config parse_config(const std::string& json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  Config c;
  {
    Section root(j, "");
    if (auto s = root.sub("merge")) {
      s->get("dist", c.merge.dist);
      s->get("tau_merge", c.merge.tau_merge);
      s->get("voxel", c.merge.voxel);
      s->get("min_points", c.merge.min_points);
    }
    if (auto s = root.sub("fusion")) {
      s->get("global", c.fusion.global);
      s->get("local", c.fusion.local);
      s->get("mask", c.fusion.mask);
    }
    if (auto s = root.sub("feature")) {
      s->get("eps", c.feature.eps);
      s->get("min_pts", c.feature.min_pts);
      s->get("use_clustering", c.feature.use_clustering);
      s->get("max_features", c.feature.max_features);
      s->get("splat_dist", c.splat_dist);
      s->get("reference_voxel", c.reference_voxel);
    }
    auto& h = c.hierarchy;
    if (auto s = root.sub("floors")) {
      s->get("bin", h.floors.bin);
      s->get("peak_window", h.floors.peak_window);
      s->get("peak_ratio", h.floors.peak_ratio);
      s->get("cluster_eps", h.floors.cluster_eps);
      s->get("smoothing_bins", h.floors.smoothing_bins);
    }
    if (auto s = root.sub("rooms")) {
      s->get("cell", h.rooms.cell);
      s->get("wall_band_low", h.rooms.wall_band_low);
      s->get("wall_band_high", h.rooms.wall_band_high);
      s->get("wall_ratio", h.rooms.wall_ratio);
      s->get("dilation_cells", h.rooms.dilation_cells);
      s->get("seed_distance", h.rooms.seed_distance);
      s->get("min_room_cells", h.rooms.min_room_cells);
    }
    if (auto s = root.sub("hierarchy")) {
      std::string vote = h.vote == VoteMode::kMax ? "max" : "majority";
      s->get("view_k", h.view_k);
      s->get("kmeans_seed", h.kmeans_seed);
      s->get("vote", vote);
      check(vote == "max" || vote == "majority", "hierarchy.vote must be max or majority");
      h.vote = vote == "max" ? VoteMode::kMax : VoteMode::kMajority;
      s->get("object_merge_tau", h.object_merge_tau);
      s->get("object_merge_dist", h.object_merge_dist);
      s->get("voxel", h.voxel);
      s->get("crop_margin", h.crop_margin);
      s->get("stair_labels", h.stair_labels);
    }
    if (auto s = root.sub("nav")) {
      s->get("cell", h.nav.cell);
      s->get("delta_low", h.nav.delta_low);
      s->get("delta_high", h.nav.delta_high);
      s->get("pose_radius", h.nav.pose_radius);
      s->get("spur_cells", h.nav.spur_cells);
      s->get("max_link", h.nav.max_link);
    }
    if (auto s = root.sub("retrieval")) {
      std::string mode = c.retrieval.mode == ScoreMode::kSoft ? "soft" : "hard";
      s->get("top_objects", c.retrieval.top_objects);
      s->get("top_rooms", c.retrieval.top_rooms);
      s->get("mode", mode);
      check(mode == "hard" || mode == "soft", "retrieval.mode must be hard or soft");
      c.retrieval.mode = mode == "soft" ? ScoreMode::kSoft : ScoreMode::kHard;
    }
    if (auto s = root.sub("localization")) {
      s->get("particles", c.localization.particles);
      s->get("seed", c.localization.seed);
      s->get("sharpness", c.localization.sharpness);
      s->get("sigma_xy", c.localization.sigma_xy);
      s->get("sigma_yaw", c.localization.sigma_yaw);
      s->get("fov", c.localization.fov);
      s->get("range", c.localization.range);
    }
    if (auto s = root.sub("labels")) {
      s->get("rooms", c.room_labels);
      s->get("objects", c.object_labels);
      s->get("ignore", c.ignore_labels);
    }
    if (auto s = root.sub("encoder")) {
      std::string table;
      s->get("kind", c.encoder.kind);
      s->get("dim", c.encoder.dim);
      s->get("seed", c.encoder.seed);
      s->get("table", table);
      s->get("hash_fallback", c.encoder.hash_fallback);
      s->get("vocabulary", c.encoder.vocabulary);
      if (!table.empty()) c.encoder.table = fs::path(table).is_absolute() ? fs::path(table) : base_dir / table;
    }
    root.done();
  }
  c.validate();
  return c;
}

Config load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string config_json(const Config& c) {
  const auto& h = c.hierarchy;
  json j;
  j["merge"] = {{"dist", c.merge.dist}, {"tau_merge", c.merge.tau_merge}, {"voxel", c.merge.voxel},
                {"min_points", c.merge.min_points}};
  j["fusion"] = {{"global", c.fusion.global}, {"local", c.fusion.local}, {"mask", c.fusion.mask}};
  j["feature"] = {{"eps", c.feature.eps},
                  {"min_pts", c.feature.min_pts},
                  {"use_clustering", c.feature.use_clustering},
                  {"max_features", c.feature.max_features},
                  {"splat_dist", c.splat_dist},
                  {"reference_voxel", c.reference_voxel}};
  j["floors"] = {{"bin", h.floors.bin},
                 {"peak_window", h.floors.peak_window},
                 {"peak_ratio", h.floors.peak_ratio},
                 {"cluster_eps", h.floors.cluster_eps},
                 {"smoothing_bins", h.floors.smoothing_bins}};
  j["rooms"] = {{"cell", h.rooms.cell},
                {"wall_band_low", h.rooms.wall_band_low},
                {"wall_band_high", h.rooms.wall_band_high},
                {"wall_ratio", h.rooms.wall_ratio},
                {"dilation_cells", h.rooms.dilation_cells},
                {"seed_distance", h.rooms.seed_distance},
                {"min_room_cells", h.rooms.min_room_cells}};
  j["hierarchy"] = {{"view_k", h.view_k},
                    {"kmeans_seed", h.kmeans_seed},
                    {"vote", h.vote == VoteMode::kMax ? "max" : "majority"},
                    {"object_merge_tau", h.object_merge_tau},
                    {"object_merge_dist", h.object_merge_dist},
                    {"voxel", h.voxel},
                    {"crop_margin", h.crop_margin},
                    {"stair_labels", h.stair_labels}};
  j["nav"] = {{"cell", h.nav.cell},           {"delta_low", h.nav.delta_low},
              {"delta_high", h.nav.delta_high}, {"pose_radius", h.nav.pose_radius},
              {"spur_cells", h.nav.spur_cells}, {"max_link", h.nav.max_link}};
  j["retrieval"] = {{"top_objects", c.retrieval.top_objects},
                    {"top_rooms", c.retrieval.top_rooms},
                    {"mode", c.retrieval.mode == ScoreMode::kSoft ? "soft" : "hard"}};
  j["localization"] = {{"particles", c.localization.particles}, {"seed", c.localization.seed},
                       {"sharpness", c.localization.sharpness}, {"sigma_xy", c.localization.sigma_xy},
                       {"sigma_yaw", c.localization.sigma_yaw}, {"fov", c.localization.fov},
                       {"range", c.localization.range}};
  j["labels"] = {{"rooms", c.room_labels}, {"objects", c.object_labels}, {"ignore", c.ignore_labels}};
  json enc = {{"kind", c.encoder.kind}, {"dim", c.encoder.dim}, {"seed", c.encoder.seed}};
  if (c.encoder.kind == "table") {
    enc["table"] = c.encoder.table.string();
    enc["hash_fallback"] = c.encoder.hash_fallback;
  }
  if (c.encoder.kind == "synth") enc["vocabulary"] = c.encoder.vocabulary;
  j["encoder"] = enc;
  return j.dump(2) + "\n";
}

std::shared_ptr<const TextEncoder> make_encoder(const EncoderConfig& config) {
  if (config.kind == "hash") return std::make_shared<HashTextEncoder>(config.dim, config.seed);
  if (config.kind == "synth") return std::make_shared<synth::SynthEmbedder>(config.vocabulary, config.dim, config.seed);
  if (config.kind == "table") {
    std::map<std::string, Embedding> table;
    for (auto& [text, e] : load_text_embeddings(config.table)) table.emplace(text, std::move(e));
    if (table.empty()) throw Error(config.table.string() + ": no text embeddings");
    const int dim = table.begin()->second.dim();
    std::shared_ptr<const TextEncoder> fallback;
    if (config.hash_fallback) fallback = std::make_shared<HashTextEncoder>(dim, config.seed);
    return std::make_shared<TableTextEncoder>(std::move(table), fallback);
  }
  throw Error("unknown encoder kind " + config.kind);
}

}  // namespace hsg
