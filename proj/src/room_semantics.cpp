#include "hsg/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace hsg {

std::vector<std::vector<std::size_t>> assign_views(std::span<const Pose> poses, std::span<const RoomNode> rooms,
                                                   std::span<const FloorInterval> floors) {
  std::vector<std::vector<std::size_t>> out(rooms.size());
  for (std::size_t f = 0; f < poses.size(); ++f) {
    const auto& t = poses[f].translation;
    for (std::size_t r = 0; r < rooms.size(); ++r) {
      const auto& room = rooms[r];
      if (room.floor_index < 0 || room.floor_index >= static_cast<int>(floors.size())) continue;
      if (!floors[room.floor_index].contains(t.z())) continue;
      const auto idx = room.mask.frame.index_of(t.x(), t.y());
      if (!idx || !room.mask[*idx]) continue;
      out[r].push_back(f);
      break;
    }
  }
  return out;
}

std::vector<Embedding> representative_view_embeddings(std::span<const Embedding> views, int k,
                                                      std::uint64_t seed) {
  if (k < 1) throw Error("k must be >= 1");
  if (views.size() <= static_cast<std::size_t>(k)) return {views.begin(), views.end()};

  const std::size_t n = views.size();
  const int dim = views.front().dim();
  Eigen::MatrixXd data(dim, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) data.col(static_cast<Eigen::Index>(i)) = views[i].values().cast<double>();

  // k-means++ initialisation.
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centers(dim, k);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centers.col(0) = data.col(static_cast<Eigen::Index>(first(rng)));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (data.col(static_cast<Eigen::Index>(i)) - centers.col(c - 1)).squaredNorm());
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (pick = 0; pick + 1 < n; ++pick) {
        target -= d2[pick];
        if (target <= 0.0) break;
      }
    } else {
      pick = static_cast<std::size_t>(c) % n;
    }
    centers.col(c) = data.col(static_cast<Eigen::Index>(pick));
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (data.col(static_cast<Eigen::Index>(i)) - centers.col(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(dim, k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.col(assign[i]) += data.col(static_cast<Eigen::Index>(i));
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.col(c) = sums.col(c) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its center.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (data.col(static_cast<Eigen::Index>(i)) - centers.col(assign[i])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centers.col(c) = data.col(static_cast<Eigen::Index>(far));
    }
  }

  std::vector<Embedding> out;
  out.reserve(k);
  for (int c = 0; c < k; ++c) {
    if (auto e = Embedding::try_normalized(centers.col(c))) out.push_back(*e);
  }
  return out;
}

std::string classify_room(std::span<const Embedding> reps, std::span<const LabelledEmbedding> categories,
                          VoteMode mode) {
  if (categories.empty()) throw Error("room category set is empty");
  if (reps.empty()) return {};

  std::map<std::string, int> votes;
  std::map<std::string, double> best_score;
  std::string global_label;
  double global_best = -std::numeric_limits<double>::infinity();
  for (const auto& rep : reps) {
    std::size_t arg = 0;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < categories.size(); ++c) {
      const double s = rep.cosine(categories[c].embedding);
      if (s > top) {
        top = s;
        arg = c;
      }
    }
    const std::string& label = categories[arg].label;
    ++votes[label];
    auto [it, inserted] = best_score.try_emplace(label, top);
    if (!inserted) it->second = std::max(it->second, top);
    if (top > global_best) {
      global_best = top;
      global_label = label;
    }
  }
  if (mode == VoteMode::kMax) return global_label;

  std::string winner;
  int winner_votes = -1;
  double winner_score = -std::numeric_limits<double>::infinity();
  for (const auto& [label, count] : votes) {
    const double score = best_score[label];
    if (count > winner_votes || (count == winner_votes && score > winner_score)) {
      winner = label;
      winner_votes = count;
      winner_score = score;
    }
  }
  return winner;
}

}  // namespace hsg
