#pragma once

#include "hsg/hierarchy.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace hsg {

/// One observed frame: motion since the previous frame in the previous body
/// frame (x forward, yaw about z), the frame's global embedding and the
/// embeddings of the objects seen in it.
struct LocalizationObservation {
  double forward = 0.0;
  double lateral = 0.0;
  double turn = 0.0;  // radians
  Embedding global;
  std::vector<Embedding> objects;
};

struct LocalizationParams {
  int particles = 500;
  std::uint64_t seed = 0;
  double sharpness = 10.0;      // weight = exp(sharpness * room score) * exp(sharpness * object score)
  double sigma_xy = 0.05;       // motion noise per step, meters
  double sigma_yaw = 0.02;      // radians
  double fov = 1.5707963267948966;
  double range = 5.0;           // objects farther away are not frontal
};

struct Particle {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  int floor = 0;
  double weight = 0.0;
};

struct LocalizationEstimate {
  int floor = -1;
  int room = -1;
  double confidence = 0.0;  // weight share of the winning (floor, room)
};

/// Semantic Monte Carlo localization over the graph's free-space maps.
/// Particles start uniformly on free cells and are resampled systematically
/// after every update.
class ParticleFilter {
 public:
  ParticleFilter(const SceneGraph& graph, LocalizationParams params = {});

  LocalizationEstimate step(const LocalizationObservation& obs);
  const std::vector<Particle>& particles() const { return particles_; }

  /// Room containing (x, y) on `floor`, or -1.
  int room_at(int floor, double x, double y) const;

 private:
  void predict(const LocalizationObservation& obs);
  void weigh(const LocalizationObservation& obs);
  LocalizationEstimate estimate() const;
  void resample();

  const SceneGraph& graph_;
  LocalizationParams params_;
  std::mt19937_64 rng_;
  std::vector<Particle> particles_;
  std::vector<Point3> object_centroids_;
};

/// Runs the filter over all observations and returns the final estimate.
LocalizationEstimate localize(const SceneGraph& graph, std::span<const LocalizationObservation> frames,
                              const LocalizationParams& params = {});

}  // namespace hsg
