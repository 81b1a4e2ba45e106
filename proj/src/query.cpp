#include "hsg/query.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace hsg {

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

std::string join_words(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace

ParsedQuery parse_query(std::string_view text) {
  std::string clean = normalize_text(text);
  while (!clean.empty() && std::string_view(".?!,;").find(clean.back()) != std::string_view::npos) clean.pop_back();
  if (clean.empty()) throw Error("empty query");

  std::vector<std::string> words;
  for (auto& w : split_words(clean)) {
    if (w != "the" && w != "a" && w != "an") words.push_back(std::move(w));
  }

  struct Verb {
    std::vector<const char*> words;
    bool motion;  // "navigate to <room> on floor <n>" names a room, not an object
  };
  static const std::vector<Verb> kVerbs = {
      {{"navigate", "to"}, true},     {{"go", "to"}, true},      {{"take", "me", "to"}, true},
      {{"bring", "me", "to"}, true},  {{"show", "me"}, false},   {{"where", "is"}, false},
      {{"find", "me"}, false},        {{"find"}, false},         {{"locate"}, false},
      {{"search", "for"}, false},
  };
  bool navigate = false;
  for (const auto& verb : kVerbs) {
    bool match = words.size() >= verb.words.size();
    for (std::size_t i = 0; match && i < verb.words.size(); ++i) match = words[i] == verb.words[i];
    if (!match) continue;
    navigate = verb.motion;
    words.erase(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(verb.words.size()));
    break;
  }
  if (words.empty()) return {std::string(clean), std::nullopt, std::nullopt};

  ParsedQuery q;
  std::size_t end = words.size();
  if (end >= 2 && words[end - 2] == "floor" &&
      std::all_of(words[end - 1].begin(), words[end - 1].end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    q.floor = "floor " + words[end - 1];
    end -= 2;
    if (end == 0) return q;  // "go to floor 2"
    if (words[end - 1] != "on") return {std::string(clean), std::nullopt, std::nullopt};
    --end;
  }
  std::size_t in_pos = end;
  for (std::size_t i = 0; i < end; ++i) {
    if (words[i] == "in") in_pos = i;
  }
  if (in_pos < end) {
    if (in_pos == 0 || in_pos + 1 == end) return {std::string(clean), std::nullopt, std::nullopt};
    q.object = join_words(words, 0, in_pos);
    q.room = join_words(words, in_pos + 1, end);
  } else if (navigate && q.floor) {
    q.room = join_words(words, 0, end);
  } else {
    if (end == 0) return {std::string(clean), std::nullopt, std::nullopt};
    q.object = join_words(words, 0, end);
  }
  return q;
}

std::string format_query(const ParsedQuery& q) {
  if (q.object.empty()) {
    if (q.room && q.floor) return "navigate to " + *q.room + " on " + *q.floor;
    if (q.floor && !q.room) return "go to " + *q.floor;
    throw Error("query without object needs a floor");
  }
  std::string out = q.object;
  if (q.room) out += " in " + *q.room;
  if (q.floor) out += " on " + *q.floor;
  return out;
}

ParsedQuery ExternalDecomposer::decompose(std::string_view text) const {
  namespace fs = std::filesystem;
  static std::mt19937_64 name_rng(std::random_device{}());
  const fs::path input = fs::temp_directory_path() / ("hsg_query_" + std::to_string(name_rng()) + ".txt");
  {
    std::ofstream f(input);
    f << text << '\n';
  }
  const std::string cmd = command_ + " < '" + input.string() + "'";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    fs::remove(input);
    throw Error("cannot start decomposer: " + command_);
  }
  std::string output;
  std::array<char, 512> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) output += buf.data();
  const int status = pclose(pipe);
  fs::remove(input);
  if (status != 0) throw Error("decomposer exited with status " + std::to_string(status));

  std::istringstream lines(output);
  std::array<std::string, 3> parts;
  for (auto& part : parts) {
    if (!std::getline(lines, part)) throw Error("decomposer must print three lines");
    part = normalize_text(part);
    if (part == "none") part.clear();
  }
  ParsedQuery q;
  q.object = parts[0];
  if (!parts[1].empty()) q.room = parts[1];
  if (!parts[2].empty()) {
    q.floor = std::isdigit(static_cast<unsigned char>(parts[2].front())) ? "floor " + parts[2] : parts[2];
  }
  if (q.object.empty() && !q.room && !q.floor) throw Error("decomposer returned an empty query");
  return q;
}

HierQuery encode_query(const ParsedQuery& parsed, const TextEncoder& encoder) {
  HierQuery q;
  q.text = parsed;
  if (!parsed.object.empty()) q.object = category_embedding(encoder, parsed.object);
  if (parsed.room) q.room = category_embedding(encoder, *parsed.room);
  if (parsed.floor) q.floor = encoder.encode(*parsed.floor);
  return q;
}

std::vector<double> floor_scores(const SceneGraph& graph, const Embedding& floor_query) {
  std::vector<double> out;
  for (const auto& f : graph.floors) out.push_back(floor_query.cosine(f.text_embedding));
  return out;
}

int score_floor(const SceneGraph& graph, const Embedding& floor_query) {
  if (graph.floors.empty()) throw Error("graph has no floors");
  const auto scores = floor_scores(graph, floor_query);
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

namespace {

double room_score(const RoomNode& room, const Embedding& query) {
  double best = -1.0;
  for (const auto& v : room.view_embeddings) best = std::max(best, query.cosine(v));
  return best;
}

void rank(std::vector<Scored>& items) {
  std::stable_sort(items.begin(), items.end(), [](const Scored& a, const Scored& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
}

double unit_interval(double cosine) { return std::clamp(0.5 * (cosine + 1.0), 0.0, 1.0); }

}  // namespace

std::vector<Scored> score_rooms(const SceneGraph& graph, int floor_index, const Embedding& room_query, int top_r) {
  std::vector<Scored> out;
  for (const auto& room : graph.rooms) {
    if (floor_index >= 0 && room.floor_index != floor_index) continue;
    out.push_back({room.id, room_score(room, room_query)});
  }
  rank(out);
  if (top_r >= 0 && out.size() > static_cast<std::size_t>(top_r)) out.resize(top_r);
  return out;
}

RetrievalResult retrieve(const SceneGraph& graph, const HierQuery& query, const RetrievalParams& params) {
  if (graph.floors.empty()) throw Error("graph has no floors");
  RetrievalResult result;

  if (params.mode == ScoreMode::kSoft) {
    std::vector<double> fscore(graph.floors.size(), 1.0);
    if (query.floor) {
      result.floor_scores = floor_scores(graph, *query.floor);
      result.floor_id = score_floor(graph, *query.floor);
      for (std::size_t f = 0; f < fscore.size(); ++f) fscore[f] = unit_interval(result.floor_scores[f]);
    }
    std::vector<double> rscore(graph.rooms.size(), 1.0);
    if (query.room) {
      result.rooms = score_rooms(graph, -1, *query.room, params.top_rooms);
      for (const auto& room : graph.rooms) rscore[room.id] = unit_interval(room_score(room, *query.room));
    }
    if (!query.object) return result;
    for (const auto& obj : graph.objects) {
      const auto& room = graph.rooms[obj.room_id];
      const double s = unit_interval(query.object->cosine(obj.feature)) * rscore[room.id] * fscore[room.floor_index];
      result.objects.push_back({obj.id, s});
    }
    rank(result.objects);
    if (result.objects.size() > static_cast<std::size_t>(params.top_objects)) result.objects.resize(params.top_objects);
    return result;
  }

  if (query.floor) {
    result.floor_scores = floor_scores(graph, *query.floor);
    result.floor_id = score_floor(graph, *query.floor);
  }
  if (query.room) {
    result.rooms = score_rooms(graph, result.floor_id, *query.room, params.top_rooms);
  } else {
    for (const auto& room : graph.rooms) {
      if (result.floor_id < 0 || room.floor_index == result.floor_id) result.rooms.push_back({room.id, 0.0});
    }
  }
  if (!query.object) return result;

  std::set<int> allowed;
  for (const auto& r : result.rooms) allowed.insert(r.first);
  for (const auto& obj : graph.objects) {
    if (allowed.count(obj.room_id)) result.objects.push_back({obj.id, query.object->cosine(obj.feature)});
  }
  if (result.objects.empty()) {
    result.diagnostic = "no objects in the selected rooms";
    return result;
  }
  rank(result.objects);
  if (result.objects.size() > static_cast<std::size_t>(params.top_objects)) result.objects.resize(params.top_objects);
  return result;
}

}  // namespace hsg
