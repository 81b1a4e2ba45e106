#pragma once

#include "hsg/feature_fusion.hpp"
#include "hsg/hierarchy.hpp"
#include "hsg/localization.hpp"
#include "hsg/query.hpp"
#include "hsg/segment_merger.hpp"
#include "hsg/text_encoder.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace hsg {

struct EncoderConfig {
  std::string kind = "hash";  // hash | table | synth
  int dim = 64;
  std::uint64_t seed = 0;
  std::filesystem::path table;         // kind == table: text embedding file
  bool hash_fallback = true;           // kind == table: hash unknown strings
  std::vector<std::string> vocabulary;  // kind == synth
};

struct Config {
  MergeParams merge;
  FusionWeights fusion;
  SegmentFeatureParams feature;
  double splat_dist = 0.025;
  double reference_voxel = 0.02;
  HierarchyParams hierarchy;
  RetrievalParams retrieval;
  LocalizationParams localization;
  std::vector<std::string> room_labels;
  std::vector<std::string> object_labels;
  std::vector<std::string> ignore_labels{"wall", "floor", "ceiling"};
  EncoderConfig encoder;

  /// Throws naming the first out-of-range field.
  void validate() const;
};

/// Missing keys keep their defaults; unknown keys are errors. Relative paths
/// resolve against `base_dir`.
Config parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);
std::string config_json(const Config& config);

std::shared_ptr<const TextEncoder> make_encoder(const EncoderConfig& config);

}  // namespace hsg
