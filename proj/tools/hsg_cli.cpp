#include "hsg/config.hpp"
#include "hsg/io.hpp"
#include "hsg/metrics.hpp"
#include "hsg/pipeline.hpp"
#include "hsg/query.hpp"
#include "hsg/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace hsg;

namespace {

constexpr int kExitUnreachable = 3;

Point3 parse_point(const std::string& text) {
  std::stringstream ss(text);
  std::string part;
  std::vector<float> v;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stof(part, &used));
      if (used != part.size()) throw Error("");
    } catch (const std::exception&) {
      throw Error("bad coordinate \"" + text + "\", expected x,y,z");
    }
  }
  if (v.size() != 3) throw Error("bad coordinate \"" + text + "\", expected x,y,z");
  return {v[0], v[1], v[2]};
}

Config config_with_labels(const std::string& config_path, const std::string& room_labels,
                          const std::string& object_labels) {
  Config c = config_path.empty() ? Config{} : load_config(config_path);
  if (!room_labels.empty()) c.room_labels = load_labels(room_labels);
  if (!object_labels.empty()) c.object_labels = load_labels(object_labels);
  return c;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void emit(std::ostream& out, std::ostream* file, const std::string& line) {
  out << line << "\n";
  if (file) *file << line << "\n";
}

int run_build(const std::string& frames_dir, const std::string& config_path, const std::string& room_labels,
              const std::string& object_labels, const std::string& out_path) {
  const Config config = config_with_labels(config_path, room_labels, object_labels);
  const auto frames = load_frames(frames_dir);
  if (frames.empty()) throw Error("no frame files in " + frames_dir);
  const auto encoder = make_encoder(config.encoder);
  const auto result = build_from_frames(frames, config, *encoder);
  save_graph(fs::path(out_path), result.graph);
  const auto& g = result.graph;
  std::cout << "frames=" << frames.size() << "\nsegments=" << result.segments << "\nfloors=" << g.floors.size()
            << "\nrooms=" << g.rooms.size() << "\nobjects=" << g.objects.size() << "\nnav_nodes=" << g.nav.nodes().size()
            << "\nnav_edges=" << g.nav.edges().size() << "\n";
  return 0;
}

int run_query(const std::string& graph_path, const std::string& config_path, const std::string& text, int top,
              const std::string& mode, const std::string& decomposer) {
  const SceneGraph graph = load_graph(fs::path(graph_path));
  Config config = config_with_labels(config_path, "", "");
  const auto encoder = make_encoder(config.encoder);
  if (encoder->dim() != graph.dim) throw Error("encoder dimension differs from the graph's");
  std::unique_ptr<Decomposer> dec;
  if (decomposer.empty()) {
    dec = std::make_unique<GrammarDecomposer>();
  } else {
    dec = std::make_unique<ExternalDecomposer>(decomposer);
  }
  const ParsedQuery parsed = dec->decompose(text);
  RetrievalParams params = config.retrieval;
  if (top > 0) params.top_objects = top;
  if (!mode.empty()) {
    if (mode != "hard" && mode != "soft") throw Error("--mode must be hard or soft");
    params.mode = mode == "soft" ? ScoreMode::kSoft : ScoreMode::kHard;
  }
  const auto result = retrieve(graph, encode_query(parsed, *encoder), params);
  std::cout << "# object=" << (parsed.object.empty() ? "none" : parsed.object)
            << " room=" << parsed.room.value_or("none") << " floor=" << parsed.floor.value_or("none") << "\n";
  if (result.floor_id >= 0) std::cout << "# floor_id=" << result.floor_id << "\n";
  for (const auto& [room, score] : result.rooms) {
    std::cout << "room " << room << " " << fmt(score) << " " << graph.rooms[room].category << "\n";
  }
  for (const auto& [id, score] : result.objects) {
    const auto& o = graph.objects[id];
    std::cout << "object " << id << " " << fmt(score) << " " << o.top1_label << " room=" << o.room_id
              << " floor=" << graph.floor_of_object(id) << "\n";
  }
  if (!result.diagnostic.empty()) std::cout << "# " << result.diagnostic << "\n";
  return 0;
}

int run_plan(const std::string& graph_path, const std::string& from, const std::string& to) {
  const SceneGraph graph = load_graph(fs::path(graph_path));
  if (graph.nav.empty()) throw Error("graph has no navigation nodes");
  std::vector<Point3> path;
  try {
    path = plan_path(graph.nav, parse_point(from), parse_point(to));
  } catch (const Error& e) {
    if (std::string(e.what()) != "unreachable") throw;
    std::cout << "unreachable\n";
    return kExitUnreachable;
  }
  for (const auto& p : path) std::cout << fmt(p.x()) << " " << fmt(p.y()) << " " << fmt(p.z()) << "\n";
  return 0;
}

int run_stats(const std::string& graph_path, const std::string& frames_dir, const std::string& config_path,
              const std::string& edges_path) {
  const SceneGraph graph = load_graph(fs::path(graph_path));
  std::cout << "floors=" << graph.floors.size() << "\nrooms=" << graph.rooms.size()
            << "\nobjects=" << graph.objects.size() << "\nnav_nodes=" << graph.nav.nodes().size()
            << "\nnav_edges=" << graph.nav.edges().size() << "\nnav_components=" << graph.nav.component_count()
            << "\ngraph_bytes=" << graph_byte_size(graph) << "\n";
  if (!frames_dir.empty()) {
    const Config config = config_with_labels(config_path, "", "");
    const auto frames = load_frames(frames_dir);
    const auto fused = fuse_frames(frames, config.fusion);
    const auto dense = build_feature_map(frames, fused, config);
    const auto size = representation_size(graph, dense);
    std::cout << "dense_points=" << dense.featured_count() << "\ndense_bytes=" << size.dense_bytes
              << "\nratio=" << fmt(size.ratio) << "\n";
  }
  if (!edges_path.empty()) {
    std::ofstream out(edges_path);
    if (!out) throw Error("cannot open " + edges_path + " for writing");
    write_edge_list(out, graph.nav);
  }
  return 0;
}

int run_eval(const std::string& graph_path, const std::string& gt_dir, const std::string& config_path,
             const std::string& out_path, const std::string& curve_path, double voxel) {
  const SceneGraph graph = load_graph(fs::path(graph_path));
  const auto gt = synth::load_ground_truth(gt_dir);
  const Config config = load_config(config_path.empty() ? fs::path(gt_dir) / "config.json" : fs::path(config_path));
  const auto encoder = make_encoder(config.encoder);

  std::unique_ptr<std::ofstream> file;
  if (!out_path.empty()) {
    file = std::make_unique<std::ofstream>(out_path);
    if (!*file) throw Error("cannot open " + out_path + " for writing");
  }
  auto put = [&](const std::string& key, const std::string& value) { emit(std::cout, file.get(), key + "=" + value); };

  std::vector<FloorInterval> pred_floors;
  for (const auto& f : graph.floors) pred_floors.push_back(f.interval);
  const auto fa = floor_accuracy(pred_floors, gt.floors);
  put("floor_acc", fmt(fa.acc));
  put("floors_pred", std::to_string(fa.n_pred));
  put("floors_gt", std::to_string(fa.n_gt));

  std::vector<PointCloud> pred_rooms, gt_rooms;
  for (const auto& r : graph.rooms) pred_rooms.push_back(r.cloud);
  for (const auto& r : gt.rooms) {
    if (!r.cloud.empty()) gt_rooms.push_back(r.cloud);
  }
  if (!pred_rooms.empty() && !gt_rooms.empty()) {
    const auto pr = region_pr(pred_rooms, gt_rooms, 0.1);
    put("room_precision", fmt(pr.precision));
    put("room_recall", fmt(pr.recall));
  }

  // Object categories present in the ground truth.
  std::map<std::string, int> cat_index;
  std::vector<std::string> cats;
  for (const auto& o : gt.objects) {
    if (cat_index.emplace(o.category, static_cast<int>(cats.size())).second) cats.push_back(o.category);
  }
  put("objects_pred", std::to_string(graph.objects.size()));
  put("objects_gt", std::to_string(gt.objects.size()));
  if (!cats.empty() && !graph.objects.empty()) {
    std::vector<Embedding> cat_emb;
    for (const auto& c : cats) cat_emb.push_back(category_embedding(*encoder, c));
    LabeledCloud pred;
    for (const auto& o : graph.objects) {
      const auto scores = cosine_scores(o.feature, cat_emb);
      const int label = static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
      for (const auto& p : o.cloud.points) {
        pred.cloud.points.push_back(p);
        pred.labels.push_back(label);
      }
    }
    PointCloud gt_points;
    std::vector<int> gt_labels;
    for (const auto& o : gt.objects) {
      for (const auto& p : o.cloud.points) {
        gt_points.points.push_back(p);
        gt_labels.push_back(cat_index[o.category]);
      }
    }
    const auto transferred = transfer_labels(pred, gt_points);
    const auto seg = seg_metrics(transferred, gt_labels, static_cast<int>(cats.size()));
    put("miou", fmt(seg.miou));
    put("fmiou", fmt(seg.fmiou));
    put("macc", fmt(seg.macc));

    std::vector<PointCloud> pred_clouds, gt_clouds;
    for (const auto& o : graph.objects) pred_clouds.push_back(o.cloud);
    for (const auto& o : gt.objects) gt_clouds.push_back(o.cloud);
    const auto match = match_objects(pred_clouds, gt_clouds, voxel);
    std::vector<int> ranks;
    for (std::size_t i = 0; i < match.size(); ++i) {
      if (match[i] < 0) continue;
      ranks.push_back(topk_rank(graph.objects[i].feature, cat_index[gt.objects[match[i]].category], cat_emb));
    }
    put("matched", std::to_string(ranks.size()));
    const auto curve = aggregate_ranks(ranks, static_cast<int>(cats.size()));
    put("auc_topk", fmt(curve.auc));
    if (!curve_path.empty()) {
      std::ofstream out(curve_path);
      if (!out) throw Error("cannot open " + curve_path + " for writing");
      for (std::size_t k = 0; k < curve.accuracy.size(); ++k) out << (k + 1) << " " << fmt(curve.accuracy[k]) << "\n";
    }

    int hits = 0, total = 0;
    for (const auto& o : gt.objects) {
      const auto& room = gt.rooms.at(o.room);
      ParsedQuery q{o.category, room.category, floor_text(o.floor)};
      const auto result = retrieve(graph, encode_query(q, *encoder), config.retrieval);
      bool hit = false;
      for (const auto& [id, score] : result.objects) hit = hit || retrieval_success(graph.objects[id].cloud, o.cloud, voxel);
      hits += hit;
      ++total;
    }
    put("retrieval_queries", std::to_string(total));
    put("retrieval_sr", fmt(total ? static_cast<double>(hits) / total : 0.0));
  }
  put("graph_bytes", std::to_string(graph_byte_size(graph)));
  return 0;
}

int run_gen(const std::string& spec_path, const std::string& preset, std::uint64_t seed, int floors,
            const std::string& out_dir, double sigma, int stride, double spacing) {
  synth::SceneSpec spec;
  if (!spec_path.empty()) {
    spec = synth::load_scene_spec(spec_path);
  } else if (preset == "two-floor") {
    spec = synth::two_floor_scene();
  } else if (preset == "four-room") {
    spec = synth::four_room_scene();
  } else if (preset == "random") {
    spec = synth::random_building(seed, floors);
  } else {
    throw Error("give --spec or --preset two-floor|four-room|random");
  }
  if (sigma >= 0.0) spec.sigma = sigma;
  if (stride > 0) spec.frame_stride = stride;
  if (spacing > 0.0) spec.spacing = spacing;
  if (auto errors = spec.validate(); !errors.empty()) {
    std::string msg = "invalid scene spec:";
    for (const auto& e : errors) msg += " " + e + ";";
    msg.pop_back();
    throw Error(msg);
  }
  const auto scene = synth::generate(spec);
  synth::write_dataset(scene, out_dir);
  std::cout << "frames=" << scene.frames.size() << "\npoints=" << scene.gt.cloud.size()
            << "\nrooms=" << scene.gt.rooms.size() << "\nobjects=" << scene.gt.objects.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical open-vocabulary 3D scene graphs"};
  app.require_subcommand(1);
  int code = 0;

  std::string frames_dir, config_path, room_labels, object_labels, out_path;
  auto* build = app.add_subcommand("build", "Build a scene graph from frame files");
  build->add_option("--frames", frames_dir, "Directory of .hsgf frame files")->required();
  build->add_option("--config", config_path, "JSON config");
  build->add_option("--room-labels", room_labels, "Room category list");
  build->add_option("--object-labels", object_labels, "Object label list");
  build->add_option("--out", out_path, "Output graph file")->required();

  std::string graph_path, text, mode, decomposer;
  int top = 0;
  auto* query = app.add_subcommand("query", "Hierarchical object query");
  query->add_option("--graph", graph_path, "Graph file")->required();
  query->add_option("--config", config_path, "JSON config (text encoder)");
  query->add_option("--text", text, "Query text")->required();
  query->add_option("--top", top, "Number of objects returned");
  query->add_option("--mode", mode, "hard or soft scoring");
  query->add_option("--decomposer", decomposer, "External program splitting the query");

  std::string from, to;
  auto* plan = app.add_subcommand("plan", "Shortest path on the navigation graph");
  plan->add_option("--graph", graph_path, "Graph file")->required();
  plan->add_option("--from", from, "Start x,y,z")->required();
  plan->add_option("--to", to, "Goal x,y,z")->required();

  std::string gt_dir, curve_path;
  double voxel = 0.05;
  auto* eval = app.add_subcommand("eval", "Evaluate a graph against a ground-truth bundle");
  eval->add_option("--graph", graph_path, "Graph file")->required();
  eval->add_option("--gt", gt_dir, "Directory with gt.json and gt_points.bin")->required();
  eval->add_option("--config", config_path, "JSON config (defaults to <gt>/config.json)");
  eval->add_option("--out", out_path, "Metrics report (key=value lines)");
  eval->add_option("--curve", curve_path, "Top-k accuracy table (k accuracy)");
  eval->add_option("--voxel", voxel, "Voxel size for IoU")->check(CLI::PositiveNumber);

  std::string edges_path;
  auto* stats = app.add_subcommand("stats", "Graph summary and representation size");
  stats->add_option("--graph", graph_path, "Graph file")->required();
  stats->add_option("--frames", frames_dir, "Frames for the dense baseline size");
  stats->add_option("--config", config_path, "JSON config");
  stats->add_option("--nav-edges", edges_path, "Write the navigation graph as an edge list");

  std::string spec_path, preset;
  std::uint64_t seed = 0;
  int floors = 2, stride = 0;
  double sigma = -1.0, spacing = 0.0;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--spec", spec_path, "Scene spec JSON");
  gen->add_option("--preset", preset, "two-floor, four-room or random");
  gen->add_option("--seed", seed, "Seed for --preset random");
  gen->add_option("--floors", floors, "Floor count for --preset random")->check(CLI::Range(1, 3));
  gen->add_option("--sigma", sigma, "Embedding noise norm");
  gen->add_option("--stride", stride, "Keep every n-th pose");
  gen->add_option("--spacing", spacing, "Surface sampling step");
  gen->add_option("--out", out_path, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*build) code = run_build(frames_dir, config_path, room_labels, object_labels, out_path);
    if (*query) code = run_query(graph_path, config_path, text, top, mode, decomposer);
    if (*plan) code = run_plan(graph_path, from, to);
    if (*eval) code = run_eval(graph_path, gt_dir, config_path, out_path, curve_path, voxel);
    if (*stats) code = run_stats(graph_path, frames_dir, config_path, edges_path);
    if (*gen) code = run_gen(spec_path, preset, seed, floors, out_path, sigma, stride, spacing);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}
