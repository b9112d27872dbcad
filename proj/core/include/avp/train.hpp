#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "avp/augment.hpp"
#include "avp/descriptors.hpp"
#include "avp/embed.hpp"
#include "avp/model.hpp"
#include "avp/objective.hpp"
#include "avp/seqio.hpp"

namespace avp {

// Turns sequences into model inputs: embedding rows from a provider plus the
// descriptor vector.
class FeaturePipeline {
 public:
  FeaturePipeline(DescriptorConfig descriptors, const EmbeddingProvider& embedder, LengthBounds bounds = {});

  FeatureBundle bundle(const PeptideSequence& seq) const;
  // Input for a sequence derived from `parent`; see EmbeddingProvider::embed_derived.
  FeatureBundle bundle_derived(const PeptideSequence& parent, const TracedSequence& child) const;

  const DescriptorConfig& descriptors() const noexcept { return descriptors_; }
  const EmbeddingProvider& embedder() const noexcept { return *embedder_; }
  const LengthBounds& bounds() const noexcept { return bounds_; }
  std::size_t embed_dim() const noexcept { return embedder_->dim(); }
  std::size_t descriptor_dim() const { return feature_dim(descriptors_); }

 private:
  DescriptorConfig descriptors_;
  const EmbeddingProvider* embedder_;
  LengthBounds bounds_;
};

// Augmented twin for training. Draws are retried (up to 8 times) until the
// twin satisfies the length bounds and the descriptor limits; after that a
// mutation-only pass is used, which keeps the length.
TracedSequence make_training_twin(const PeptideSequence& seq, const AugmentConfig& cfg, const LengthBounds& bounds,
                                  const DescriptorConfig& descriptors, PortableRng& rng);

struct TrainConfig {
  int stage = 1;
  double lr_peak = 1.2e-4;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int warmup_epochs = 5;
  int max_epochs = 100;
  std::size_t batch_size = 32;
  std::size_t accum_steps = 2;
  int patience = 10;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;

  static TrainConfig stage1();
  static TrainConfig stage2();  // lr 8e-5, no weight decay
  void validate() const;
};

// Linear warmup from 0 to lr_peak over warmup_epochs, then half-cosine decay
// reaching 0 at max_epochs.
double lr_at(int epoch, const TrainConfig& cfg);

struct OptimizerState {
  std::map<std::string, ad::Tensor> m;
  std::map<std::string, ad::Tensor> v;
  std::uint64_t step = 0;
};

// AdamW: bias-corrected moments, then
//   theta -= lr * m_hat / (sqrt(v_hat) + eps) + lr * weight_decay * theta.
void optimizer_step(ModelParams& params, const std::map<std::string, ad::Tensor>& grads, OptimizerState& state,
                    double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Higher is better; only a strictly larger value counts as improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);
  // Returns true when `metric` is a new best.
  bool update(double metric);
  bool should_stop() const noexcept { return since_best_ >= patience_; }
  double best() const noexcept { return best_; }
  int best_index() const noexcept { return best_index_; }

 private:
  int patience_;
  int since_best_ = 0;
  int seen_ = 0;
  int best_index_ = -1;
  double best_;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double total_loss = 0.0;
  double contrastive_loss = 0.0;
  double mean_pos_sim = 0.0;
  double mean_hardneg_sim = 0.0;
  double val_metric = 0.0;
  double classification_loss = 0.0;
  double consistency_loss = 0.0;
  double lr = 0.0;
  double temperature = 0.0;
};

void write_dynamics_csv(std::ostream& out, const std::vector<EpochLog>& log);

struct FitOptions {
  ModelConfig model;
  TrainConfig train;
  ContrastConfig contrast;
  LossWeights weights;
  double focal_gamma = 2.0;
  std::vector<double> focal_alpha;  // empty: inverse class frequency of the training set
  AugmentConfig augment;
  int positive_class = 1;  // receives augmented twins and fills the positive queue
  std::function<void(const EpochLog&)> on_epoch;
};

struct FitResult {
  ModelParams best;
  ModelConfig config;
  int best_epoch = 0;  // 0 when no epoch ran
  double best_metric = 0.0;
  int epochs_run = 0;
  std::vector<EpochLog> log;
};

// Validation monitor: binary MCC at the argmax (positive_class as positive)
// for two classes, the multi-class correlation coefficient otherwise.
double monitor_metric(const ModelParams& params, const ModelConfig& cfg, const std::vector<FeatureBundle>& inputs,
                      const std::vector<int>& labels, int positive_class);

// Generic loop from given initial parameters.
FitResult train_model(ModelParams init, const LabeledDataset& train, const LabeledDataset& val,
                      const FeaturePipeline& pipeline, const FitOptions& opts);

// Stage 1 from a fresh initialization seeded by opts.train.seed. Needs two
// classes with at least one sample each.
FitResult fit_stage1(const LabeledDataset& train, const LabeledDataset& val, const FeaturePipeline& pipeline,
                     const FitOptions& opts);

// Stage 2: every non-classifier tensor comes from `base`; the classifier is
// re-initialized for train.class_count classes. opts.model is ignored apart
// from dropout; the architecture follows the checkpoint. Throws VersionError
// when the pipeline dimensions disagree with the checkpoint.
FitResult finetune_stage2(const Checkpoint& base, const LabeledDataset& train, const LabeledDataset& val,
                          const FeaturePipeline& pipeline, const FitOptions& opts);

// Mean class probabilities over the original and its mutation-only TTA
// variants (cfg.tta_variants of them).
std::vector<double> tta_predict(const ModelParams& params, const ModelConfig& model, const FeaturePipeline& pipeline,
                                const PeptideSequence& seq, const AugmentConfig& cfg, PortableRng& rng);

}  // namespace avp
