#include "hsg/localization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace hsg {

ParticleFilter::ParticleFilter(const SceneGraph& graph, LocalizationParams params)
    : graph_(graph), params_(params), rng_(params.seed) {
  if (params_.particles < 1) throw Error("particle count must be positive");
  std::vector<std::pair<int, std::size_t>> cells;
  for (const auto& map : graph_.free_space) {
    for (std::size_t i = 0; i < map.free.cells.size(); ++i) {
      if (map.free[i]) cells.push_back({map.floor_index, i});
    }
  }
  if (cells.empty()) throw Error("no free space for localization");

  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  particles_.resize(params_.particles);
  for (auto& p : particles_) {
    const auto [floor, idx] = cells[pick(rng_)];
    const auto& frame = graph_.free_space[floor].free.frame;
    const Eigen::Vector2d c = frame.center(idx);
    p.x = c.x() + (unit(rng_) - 0.5) * frame.cell;
    p.y = c.y() + (unit(rng_) - 0.5) * frame.cell;
    p.yaw = (2.0 * unit(rng_) - 1.0) * std::numbers::pi;
    p.floor = floor;
    p.weight = 1.0 / params_.particles;
  }
  for (const auto& obj : graph_.objects) object_centroids_.push_back(obj.cloud.centroid());
}

int ParticleFilter::room_at(int floor, double x, double y) const {
  for (const auto& room : graph_.rooms) {
    if (room.floor_index != floor) continue;
    const auto idx = room.mask.frame.index_of(x, y);
    if (idx && room.mask[*idx]) return room.id;
  }
  return -1;
}

void ParticleFilter::predict(const LocalizationObservation& obs) {
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& p : particles_) {
    const double c = std::cos(p.yaw);
    const double s = std::sin(p.yaw);
    p.x += c * obs.forward - s * obs.lateral + params_.sigma_xy * noise(rng_);
    p.y += s * obs.forward + c * obs.lateral + params_.sigma_xy * noise(rng_);
    p.yaw = std::remainder(p.yaw + obs.turn + params_.sigma_yaw * noise(rng_), 2.0 * std::numbers::pi);
  }
}

void ParticleFilter::weigh(const LocalizationObservation& obs) {
  std::vector<double> log_w(particles_.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    const auto& p = particles_[i];
    if (p.floor < 0 || p.floor >= static_cast<int>(graph_.free_space.size())) continue;
    if (!graph_.free_space[p.floor].is_free(p.x, p.y)) continue;
    const int room = room_at(p.floor, p.x, p.y);

    double room_score = -1.0;
    if (room >= 0) {
      for (const auto& v : graph_.rooms[room].view_embeddings) room_score = std::max(room_score, obs.global.cosine(v));
    }

    double object_score = 0.0;
    if (room >= 0 && !obs.objects.empty()) {
      std::vector<int> frontal;
      for (int o : graph_.objects_in_room(room)) {
        const double dx = object_centroids_[o].x() - p.x;
        const double dy = object_centroids_[o].y() - p.y;
        if (std::hypot(dx, dy) > params_.range) continue;
        const double bearing = std::remainder(std::atan2(dy, dx) - p.yaw, 2.0 * std::numbers::pi);
        if (std::abs(bearing) <= 0.5 * params_.fov) frontal.push_back(o);
      }
      if (!frontal.empty()) {
        for (const auto& seen : obs.objects) {
          double best = -1.0;
          for (int o : frontal) best = std::max(best, seen.cosine(graph_.objects[o].feature));
          object_score += best;
        }
        object_score /= static_cast<double>(obs.objects.size());
      }
    }
    log_w[i] = params_.sharpness * room_score + params_.sharpness * object_score;
  }

  const double top = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(top)) {
    for (auto& p : particles_) p.weight = 1.0 / static_cast<double>(particles_.size());
    return;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    particles_[i].weight = std::exp(log_w[i] - top);
    total += particles_[i].weight;
  }
  for (auto& p : particles_) p.weight /= total;
}

LocalizationEstimate ParticleFilter::estimate() const {
  std::map<std::pair<int, int>, double> mass;
  for (const auto& p : particles_) mass[{p.floor, room_at(p.floor, p.x, p.y)}] += p.weight;
  LocalizationEstimate best;
  for (const auto& [key, w] : mass) {
    if (w > best.confidence) best = {key.first, key.second, w};
  }
  return best;
}

void ParticleFilter::resample() {
  const std::size_t n = particles_.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0 / static_cast<double>(n));
  const double start = unit(rng_);
  std::vector<Particle> next;
  next.reserve(n);
  double cumulative = particles_[0].weight;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = start + static_cast<double>(i) / static_cast<double>(n);
    while (target > cumulative && j + 1 < n) cumulative += particles_[++j].weight;
    next.push_back(particles_[j]);
    next.back().weight = 1.0 / static_cast<double>(n);
  }
  particles_ = std::move(next);
}

LocalizationEstimate ParticleFilter::step(const LocalizationObservation& obs) {
  predict(obs);
  weigh(obs);
  const LocalizationEstimate est = estimate();
  resample();
  return est;
}

LocalizationEstimate localize(const SceneGraph& graph, std::span<const LocalizationObservation> frames,
                              const LocalizationParams& params) {
  ParticleFilter filter(graph, params);
  LocalizationEstimate est;
  for (const auto& obs : frames) est = filter.step(obs);
  return est;
}

}  // namespace hsg
