#pragma once

#include "hsg/hierarchy.hpp"
#include "hsg/text_encoder.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hsg {

/// Floor, room and object parts of a language query. An empty object means
/// the query targets a room or floor.
struct ParsedQuery {
  std::string object;
  std::optional<std::string> room;
  std::optional<std::string> floor;  // "floor <n>"
  bool operator==(const ParsedQuery&) const = default;
};

/// Grammar:
///   <obj> | <obj> in <room> | <obj> in <room> on floor <n> | <obj> on floor <n>
///   go to floor <n> | navigate to <room> on floor <n>
/// with optional leading verbs (find, locate, show me, ...) and articles
/// dropped. Text that does not fit is taken whole as the object.
ParsedQuery parse_query(std::string_view text);

/// Inverse of parse_query for grammar-generated queries.
std::string format_query(const ParsedQuery& q);

/// Splits a query into its three parts.
class Decomposer {
 public:
  virtual ~Decomposer() = default;
  virtual ParsedQuery decompose(std::string_view text) const = 0;
};

class GrammarDecomposer final : public Decomposer {
 public:
  ParsedQuery decompose(std::string_view text) const override { return parse_query(text); }
};

/// Runs an external program with the query on stdin. It must print three
/// lines: object, room, floor; an empty line or "none" marks a missing part.
class ExternalDecomposer final : public Decomposer {
 public:
  explicit ExternalDecomposer(std::string command) : command_(std::move(command)) {}
  ParsedQuery decompose(std::string_view text) const override;

 private:
  std::string command_;
};

struct HierQuery {
  ParsedQuery text;
  std::optional<Embedding> object;
  std::optional<Embedding> room;
  std::optional<Embedding> floor;
};

/// Objects and rooms use the category prompt template; floors are encoded
/// verbatim so they match the floor node embeddings.
HierQuery encode_query(const ParsedQuery& parsed, const TextEncoder& encoder);

using Scored = std::pair<int, double>;  // id, score

/// Floor with the highest cosine to the query (ties to the lower index).
int score_floor(const SceneGraph& graph, const Embedding& floor_query);
std::vector<double> floor_scores(const SceneGraph& graph, const Embedding& floor_query);

/// Rooms on `floor_index` (all rooms when negative) ranked by the max cosine
/// over their view embeddings; ties to the lower id. Rooms without views
/// score -1.
std::vector<Scored> score_rooms(const SceneGraph& graph, int floor_index, const Embedding& room_query,
                                int top_r = 3);

enum class ScoreMode {
  kHard,  // objects only from the selected floor and rooms
  kSoft,  // every object, scored by the product of per-level scores mapped to [0, 1]
};

struct RetrievalParams {
  int top_objects = 10;
  int top_rooms = 3;
  ScoreMode mode = ScoreMode::kHard;
};

struct RetrievalResult {
  std::vector<Scored> objects;  // descending score
  int floor_id = -1;            // -1 when the query names no floor
  std::vector<Scored> rooms;    // selected rooms, descending score
  std::vector<double> floor_scores;
  std::string diagnostic;
};

RetrievalResult retrieve(const SceneGraph& graph, const HierQuery& query, const RetrievalParams& params = {});

}  // namespace hsg
