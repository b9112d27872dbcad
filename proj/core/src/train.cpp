#include "avp/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include "avp/errors.hpp"
#include "avp/format.hpp"
#include "avp/metrics.hpp"

namespace avp {

namespace {

constexpr const char* kModule = "train";

// Stream tags for per-sample generators.
constexpr std::uint64_t kDropoutStream = 1;
constexpr std::uint64_t kTwinDropoutStream = 2;
constexpr std::uint64_t kAugmentStream = 3;
constexpr std::uint64_t kNegativeStream = 4;

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

FeaturePipeline::FeaturePipeline(DescriptorConfig descriptors, const EmbeddingProvider& embedder, LengthBounds bounds)
    : descriptors_(descriptors), embedder_(&embedder), bounds_(bounds) {
  bounds_.validate();
  descriptors_.validate(bounds_.min_length);
}

FeatureBundle FeaturePipeline::bundle(const PeptideSequence& seq) const {
  validate_sequence(seq, bounds_);
  return make_bundle(seq, embedder_->embed(seq), featurize(seq.residues, descriptors_));
}

FeatureBundle FeaturePipeline::bundle_derived(const PeptideSequence& parent, const TracedSequence& child) const {
  validate_sequence(child.sequence, bounds_);
  const auto emb = embedder_->embed_derived(parent, child.sequence, child.source_index);
  return make_bundle(child.sequence, emb, featurize(child.sequence.residues, descriptors_));
}

TracedSequence make_training_twin(const PeptideSequence& seq, const AugmentConfig& cfg, const LengthBounds& bounds,
                                  const DescriptorConfig& descriptors, PortableRng& rng) {
  const std::size_t max_len =
      std::min(bounds.max_length, static_cast<std::size_t>(std::max(descriptors.binary_max_len, 0)));
  if (seq.residues.size() >= static_cast<std::size_t>(cfg.n_fragments)) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      auto twin = augment_traced(seq, cfg, rng);
      const std::size_t len = twin.sequence.residues.size();
      if (len >= bounds.min_length && len <= max_len) return twin;
    }
  }
  TracedSequence out{mutate_sequence(seq, cfg.mutate_prob, rng), {}};
  out.source_index.resize(seq.residues.size());
  std::iota(out.source_index.begin(), out.source_index.end(), std::size_t{0});
  return out;
}

TrainConfig TrainConfig::stage1() { return TrainConfig{}; }

TrainConfig TrainConfig::stage2() {
  TrainConfig c;
  c.stage = 2;
  c.lr_peak = 8.0e-5;
  c.weight_decay = 0.0;
  return c;
}

void TrainConfig::validate() const {
  if (stage != 1 && stage != 2) throw ConfigError(kModule, "stage must be 1 or 2");
  if (!(lr_peak > 0.0)) throw ConfigError(kModule, "lr_peak must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError(kModule, "weight_decay must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError(kModule, "beta1 and beta2 must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError(kModule, "eps must be positive");
  if (warmup_epochs < 0) throw ConfigError(kModule, "warmup_epochs must be non-negative");
  if (max_epochs < 0) throw ConfigError(kModule, "max_epochs must be non-negative");
  if (batch_size < 1) throw ConfigError(kModule, "batch_size must be at least 1");
  if (accum_steps < 1) throw ConfigError(kModule, "accum_steps must be at least 1");
  if (patience < 1) throw ConfigError(kModule, "patience must be at least 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError(kModule, "val_fraction must lie in (0, 1)");
}

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < cfg.warmup_epochs) {
    return cfg.lr_peak * static_cast<double>(epoch) / static_cast<double>(cfg.warmup_epochs);
  }
  const int span = cfg.max_epochs - cfg.warmup_epochs;
  if (span <= 0) return cfg.lr_peak;
  const double progress = static_cast<double>(epoch - cfg.warmup_epochs) / static_cast<double>(span);
  return cfg.lr_peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void optimizer_step(ModelParams& params, const std::map<std::string, ad::Tensor>& grads, OptimizerState& state,
                    double lr, double weight_decay, double beta1, double beta2, double eps) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (auto& [name, theta] : params.tensors) {
    const auto git = grads.find(name);
    if (git != grads.end() && !git->second.same_shape(theta)) {
      throw ShapeError(kModule, "gradient for '" + name + "' does not match the parameter shape");
    }
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (!m.same_shape(theta)) m = ad::Tensor(theta.rows, theta.cols);
    if (!v.same_shape(theta)) v = ad::Tensor(theta.rows, theta.cols);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = git != grads.end() ? git->second.data[i] : 0.0;
      m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g;
      v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g * g;
      const double mhat = m.data[i] / c1;
      const double vhat = v.data[i] / c2;
      const double old = theta.data[i];
      theta.data[i] = old - lr * (mhat / (std::sqrt(vhat) + eps)) - lr * weight_decay * old;
    }
  }
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience), best_(-std::numeric_limits<double>::infinity()) {
  if (patience < 1) throw ConfigError(kModule, "patience must be at least 1");
}

bool EarlyStopping::update(double metric) {
  const int index = seen_++;
  if (best_index_ < 0 || metric > best_) {
    best_ = metric;
    best_index_ = index;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

void write_dynamics_csv(std::ostream& out, const std::vector<EpochLog>& log) {
  out << "epoch,total_loss,contrastive_loss,mean_pos_sim,mean_hardneg_sim,val_metric,"
         "classification_loss,consistency_loss,lr,temperature\n";
  for (const auto& r : log) {
    out << r.epoch << ',' << format_g9(r.total_loss) << ',' << format_g9(r.contrastive_loss) << ','
        << format_g9(r.mean_pos_sim) << ',' << format_g9(r.mean_hardneg_sim) << ',' << format_g9(r.val_metric) << ','
        << format_g9(r.classification_loss) << ',' << format_g9(r.consistency_loss) << ',' << format_g9(r.lr) << ','
        << format_g9(r.temperature) << '\n';
  }
}

double monitor_metric(const ModelParams& params, const ModelConfig& cfg, const std::vector<FeatureBundle>& inputs,
                      const std::vector<int>& labels, int positive_class) {
  if (inputs.size() != labels.size()) throw ShapeError(kModule, "inputs and labels differ in length");
  if (inputs.empty()) throw EmptyError(kModule, "empty validation set");
  std::vector<int> predicted;
  predicted.reserve(inputs.size());
  for (const auto& in : inputs) predicted.push_back(static_cast<int>(argmax(predict(params, cfg, in).probs)));
  if (cfg.class_count == 2) {
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool truth = labels[i] == positive_class;
      const bool pred = predicted[i] == positive_class;
      if (truth && pred) ++c.tp;
      if (truth && !pred) ++c.fn;
      if (!truth && pred) ++c.fp;
      if (!truth && !pred) ++c.tn;
    }
    return binary_metrics(c).mcc;
  }
  return multiclass_mcc(confusion_matrix(labels, predicted, cfg.class_count));
}

namespace {

struct MicroBatchResult {
  std::map<std::string, ad::Tensor> grads;
  double total = 0.0;
  double classification = 0.0;
  double contrastive = 0.0;
  double consistency = 0.0;
  double pos_sim_sum = 0.0;
  double neg_sim_sum = 0.0;
  std::size_t anchors = 0;
  std::size_t negatives = 0;
  bool contrast_active = false;
  std::vector<std::vector<double>> features;
  std::vector<bool> positive;
};

struct LoopContext {
  const std::vector<FeatureBundle>& bundles;
  const std::vector<int>& labels;
  const LabeledDataset& train;
  const FeaturePipeline& pipeline;
  const FitOptions& opts;
  const ModelConfig& cfg;
  const FocalParams& focal;
};

MicroBatchResult run_micro_batch(const ModelParams& params, std::span<const std::size_t> members,
                                 const ContrastState& state, std::uint64_t epoch_seed, const LoopContext& ctx) {
  const auto& opts = ctx.opts;
  ad::Tape tape;
  const BoundParams bound = bind_params(tape, params);
  const auto& cc = opts.contrast;
  const ad::Var tau = ad::exp(
      ad::clamp(bound["log_temperature"], std::log(cc.temperature_min), std::log(cc.temperature_max)));

  const bool want_twins = opts.weights.contrastive > 0.0 || opts.weights.consistency > 0.0;
  const bool contrast_active =
      opts.weights.contrastive > 0.0 && !state.positives().empty() && !state.negatives().empty();

  MicroBatchResult r;
  r.contrast_active = contrast_active;
  std::vector<ad::Var> prob_rows, anchors, positives, cons_terms;
  std::vector<std::vector<ad::Var>> negatives;
  std::vector<int> labels;
  for (std::size_t idx : members) {
    const std::uint64_t sample_seed = derive_seed(epoch_seed, idx);
    const int y = ctx.labels[idx];
    PortableRng drop_rng(derive_seed(sample_seed, kDropoutStream));
    ForwardOptions fo;
    fo.training = true;
    fo.dropout_rng = &drop_rng;
    const ForwardVars f = forward(tape, bound, ctx.cfg, ctx.bundles[idx], fo);
    prob_rows.push_back(f.probs);
    labels.push_back(y);
    r.features.push_back(f.e_final.value().data);
    r.positive.push_back(y == opts.positive_class);

    if (!want_twins || y != opts.positive_class) continue;
    PortableRng aug_rng(derive_seed(sample_seed, kAugmentStream));
    const PeptideSequence& parent = ctx.train.items[idx];
    const auto twin = make_training_twin(parent, opts.augment, ctx.pipeline.bounds(), ctx.pipeline.descriptors(),
                                         aug_rng);
    PortableRng twin_drop(derive_seed(sample_seed, kTwinDropoutStream));
    ForwardOptions fo2 = fo;
    fo2.dropout_rng = &twin_drop;
    const ForwardVars ft = forward(tape, bound, ctx.cfg, ctx.pipeline.bundle_derived(parent, twin), fo2);
    if (opts.weights.consistency > 0.0) cons_terms.push_back(consistency_loss(f.probs, ft.probs));
    if (contrast_active) {
      PortableRng neg_rng(derive_seed(sample_seed, kNegativeStream));
      std::vector<ad::Var> negs;
      for (std::size_t k : state.sample_hard_negatives(cc.hard_negatives, neg_rng)) {
        negs.push_back(tape.constant(ad::Tensor::row_vector(state.negatives()[k])));
      }
      anchors.push_back(f.e_final);
      positives.push_back(ft.e_final);
      negatives.push_back(std::move(negs));
    }
  }

  const ad::Var l_cls = focal_loss(ad::concat_rows(prob_rows), labels, ctx.focal);
  ad::Var l_con = tape.constant(ad::Tensor::scalar(0.0));
  if (contrast_active && !anchors.empty()) {
    const auto terms = contrastive_terms(tape, anchors, positives, negatives, tau);
    l_con = terms.loss;
    r.pos_sim_sum = terms.mean_pos_similarity * static_cast<double>(terms.anchors);
    r.neg_sim_sum = terms.mean_neg_similarity * static_cast<double>(terms.negatives);
    r.anchors = terms.anchors;
    r.negatives = terms.negatives;
  }
  const ad::Var l_cons =
      cons_terms.empty() ? tape.constant(ad::Tensor::scalar(0.0)) : ad::mean(ad::concat_rows(cons_terms));
  const ad::Var total = total_loss(l_con, l_cls, l_cons, opts.weights);
  tape.backward(total);
  r.grads = collect_grads(bound);
  r.total = total.item();
  r.classification = l_cls.item();
  r.contrastive = l_con.item();
  r.consistency = l_cons.item();
  return r;
}

}  // namespace

FitResult train_model(ModelParams init, const LabeledDataset& train, const LabeledDataset& val,
                      const FeaturePipeline& pipeline, const FitOptions& opts) {
  const ModelConfig& cfg = opts.model;
  cfg.validate();
  opts.train.validate();
  opts.contrast.validate();
  opts.weights.validate();
  opts.augment.validate();
  if (cfg.embed_dim != pipeline.embed_dim() || cfg.descriptor_dim != pipeline.descriptor_dim()) {
    throw ShapeError(kModule, "model input dimensions do not match the feature pipeline");
  }
  if (train.items.empty() || val.items.empty()) throw EmptyError(kModule, "training and validation sets must be non-empty");
  train.validate();
  if (train.class_count != cfg.class_count) {
    throw ConfigError(kModule, "dataset has " + std::to_string(train.class_count) + " classes, model has " +
                                   std::to_string(cfg.class_count));
  }
  for (std::size_t n : train.class_counts()) {
    if (n == 0) throw StratifyError(kModule, "a class has no training samples");
  }

  std::vector<FeatureBundle> bundles, val_bundles;
  std::vector<int> labels, val_labels;
  for (const auto& s : train.items) {
    bundles.push_back(pipeline.bundle(s));
    labels.push_back(*s.label);
  }
  for (const auto& s : val.items) {
    val_bundles.push_back(pipeline.bundle(s));
    if (!s.label) throw LabelError(kModule, "validation item '" + s.id + "' has no label");
    val_labels.push_back(*s.label);
  }

  FocalParams focal;
  focal.gamma = opts.focal_gamma;
  const auto counts = train.class_counts();
  focal.alpha = opts.focal_alpha.empty() ? FocalParams::inverse_frequency(counts) : opts.focal_alpha;
  focal.validate(cfg.class_count);

  const LoopContext ctx{bundles, labels, train, pipeline, opts, cfg, focal};
  const auto& tc = opts.train;
  ModelParams params = std::move(init);
  ContrastState state(opts.contrast);
  OptimizerState opt;
  EarlyStopping stopper(tc.patience);
  const double ln_tmin = std::log(opts.contrast.temperature_min);
  const double ln_tmax = std::log(opts.contrast.temperature_max);

  FitResult res;
  res.config = cfg;
  res.best = params;
  res.best_metric = -std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < tc.max_epochs; ++epoch) {
    const double lr = lr_at(epoch, tc);
    const std::uint64_t epoch_seed = derive_seed(tc.seed, 0x45504f43ULL + static_cast<std::uint64_t>(epoch));
    std::vector<std::size_t> order(bundles.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    PortableRng shuffle_rng(epoch_seed);
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    EpochLog row;
    row.epoch = epoch + 1;
    row.lr = lr;
    std::size_t micro_batches = 0, contrast_batches = 0, anchors = 0, negatives = 0;
    double pos_sum = 0.0, neg_sum = 0.0;
    std::map<std::string, ad::Tensor> acc;
    std::size_t in_group = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      const auto members = std::span<const std::size_t>(order).subspan(start, end - start);
      MicroBatchResult mb = run_micro_batch(params, members, state, epoch_seed, ctx);

      if (acc.empty()) {
        acc = std::move(mb.grads);
      } else {
        for (auto& [name, g] : mb.grads) {
          auto& a = acc.at(name);
          for (std::size_t i = 0; i < g.size(); ++i) a.data[i] += g.data[i];
        }
      }
      ++in_group;
      ++micro_batches;
      row.total_loss += mb.total;
      row.classification_loss += mb.classification;
      row.consistency_loss += mb.consistency;
      if (mb.contrast_active && mb.anchors > 0) {
        row.contrastive_loss += mb.contrastive;
        ++contrast_batches;
        pos_sum += mb.pos_sim_sum;
        neg_sum += mb.neg_sim_sum;
        anchors += mb.anchors;
        negatives += mb.negatives;
      }
      state.update_queues(mb.features, mb.positive);

      if (in_group == tc.accum_steps || end == order.size()) {
        const double scale = 1.0 / static_cast<double>(in_group);
        for (auto& [_, g] : acc)
          for (double& v : g.data) v *= scale;
        optimizer_step(params, acc, opt, lr, tc.weight_decay, tc.beta1, tc.beta2, tc.eps);
        auto& lt = params.at("log_temperature").data[0];
        lt = std::clamp(lt, ln_tmin, ln_tmax);
        acc.clear();
        in_group = 0;
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.total_loss /= static_cast<double>(micro_batches);
    row.classification_loss /= static_cast<double>(micro_batches);
    row.consistency_loss /= static_cast<double>(micro_batches);
    row.contrastive_loss = contrast_batches ? row.contrastive_loss / static_cast<double>(contrast_batches) : nan;
    row.mean_pos_sim = anchors ? pos_sum / static_cast<double>(anchors) : nan;
    row.mean_hardneg_sim = negatives ? neg_sum / static_cast<double>(negatives) : nan;
    row.temperature = std::exp(params.at("log_temperature").data[0]);
    row.val_metric = monitor_metric(params, cfg, val_bundles, val_labels, opts.positive_class);
    res.log.push_back(row);
    res.epochs_run = epoch + 1;
    if (opts.on_epoch) opts.on_epoch(row);

    if (stopper.update(row.val_metric)) {
      res.best = params;
      res.best_epoch = epoch + 1;
      res.best_metric = row.val_metric;
    }
    if (stopper.should_stop()) break;
  }
  return res;
}

FitResult fit_stage1(const LabeledDataset& train, const LabeledDataset& val, const FeaturePipeline& pipeline,
                     const FitOptions& opts) {
  if (train.class_count != 2) throw ConfigError(kModule, "stage 1 expects binary labels");
  return train_model(init_params(opts.model, opts.train.seed, opts.contrast.temperature_init), train, val, pipeline,
                     opts);
}

FitResult finetune_stage2(const Checkpoint& base, const LabeledDataset& train, const LabeledDataset& val,
                          const FeaturePipeline& pipeline, const FitOptions& opts) {
  if (base.config.embed_dim != pipeline.embed_dim() || base.config.descriptor_dim != pipeline.descriptor_dim()) {
    throw VersionError(kModule, "checkpoint expects inputs of " + std::to_string(base.config.embed_dim) + " + " +
                                    std::to_string(base.config.descriptor_dim) + " columns but the pipeline produces " +
                                    std::to_string(pipeline.embed_dim()) + " + " +
                                    std::to_string(pipeline.descriptor_dim()));
  }
  FitOptions o = opts;
  o.model = base.config;
  o.model.class_count = train.class_count;
  o.model.dropout = opts.model.dropout;
  ModelParams params = base.params;
  reinit_classifier(params, o.model, opts.train.seed);
  return train_model(std::move(params), train, val, pipeline, o);
}

std::vector<double> tta_predict(const ModelParams& params, const ModelConfig& model, const FeaturePipeline& pipeline,
                                const PeptideSequence& seq, const AugmentConfig& cfg, PortableRng& rng) {
  std::vector<double> sum = predict(params, model, pipeline.bundle(seq)).probs;
  const auto variants = tta_variants(seq, cfg, rng);
  std::vector<std::size_t> identity(seq.residues.size());
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  for (const auto& v : variants) {
    const auto probs = predict(params, model, pipeline.bundle_derived(seq, TracedSequence{v, identity})).probs;
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += probs[c];
  }
  const double n = static_cast<double>(variants.size() + 1);
  for (double& v : sum) v /= n;
  return sum;
}

}  // namespace avp
