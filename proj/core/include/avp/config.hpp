#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "avp/augment.hpp"
#include "avp/descriptors.hpp"
#include "avp/model.hpp"
#include "avp/objective.hpp"
#include "avp/seqio.hpp"
#include "avp/train.hpp"

namespace avp {

struct MetricsConfig {
  double threshold = 0.5;
  int positive_class = 1;
};

struct PathsConfig {
  std::string embedder;    // provider spec, e.g. "fallback:dim=64:seed=7"
  std::string embeddings;  // PEMB1 file; shorthand for "pemb1:<path>"
};

// Every tunable of a run. The text form is one "section.key = value" per
// line; '#' starts a comment line. Parsing starts from the defaults below,
// so a file only lists what it changes.
struct RunConfig {
  LengthBounds seqio;
  DescriptorConfig descriptor;
  AugmentConfig augment;
  std::uint64_t augment_seed = 0;
  ModelConfig model;  // descriptor_dim is derived from `descriptor`
  TrainConfig train = TrainConfig::stage1();
  TrainConfig finetune = TrainConfig::stage2();
  double focal_gamma = 2.0;
  std::vector<double> focal_alpha;
  LossWeights weights;
  int positive_class = 1;
  ContrastConfig contrast;
  MetricsConfig metrics;
  PathsConfig paths;

  // Runs every section's own checks. Throws ConfigError.
  void validate() const;
  // model with descriptor_dim filled in from the descriptor section.
  ModelConfig model_config() const;
  // Options for stage 1 or stage 2 (train.* or finetune.* schedule).
  FitOptions fit_options(int stage) const;
};

// Keys in dump order.
std::vector<std::string> config_keys();

// Text form of every key. parse(dump(c)) reproduces c exactly (doubles are
// written with 17 significant digits).
std::string dump_config(const RunConfig& cfg);

// Throws ConfigError for unknown or repeated keys, malformed lines or
// values, and when the result fails validate().
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace avp
