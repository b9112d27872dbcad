#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "avp/diff.hpp"
#include "avp/rng.hpp"

namespace avp {

struct ContrastConfig {
  std::size_t pos_capacity = 512;
  std::size_t neg_capacity = 1024;
  std::size_t hard_negatives = 16;  // K per anchor
  double sampling_sharpness = 0.1;  // tau_s
  double temperature_init = 0.07;
  double temperature_min = 0.01;
  double temperature_max = 1.0;

  void validate() const;
};

// Loss term weights; both must be non-negative.
struct LossWeights {
  double contrastive = 0.5;  // lambda_1
  double consistency = 0.1;  // lambda_2

  LossWeights() = default;
  LossWeights(double contrastive_weight, double consistency_weight);
  void validate() const;
};

struct FocalParams {
  double gamma = 2.0;
  std::vector<double> alpha;  // per class; empty means all ones

  void validate(std::size_t class_count) const;
  // alpha_c proportional to 1 / n_c, scaled to mean 1. Classes with no
  // samples get the largest weight present.
  static std::vector<double> inverse_frequency(std::span<const std::size_t> class_counts);
};

// x . y / (|x| |y|). Throws ZeroVectorError for a zero vector.
double cosine_similarity(std::span<const double> x, std::span<const double> y);

// FIFO feature queues for positives and negatives plus the positive
// prototype (componentwise mean of the positive queue). Stored features are
// plain values: nothing queued carries gradient.
class ContrastState {
 public:
  explicit ContrastState(ContrastConfig cfg = {});

  // Appends one feature vector to the matching queue, evicting the oldest
  // entry at capacity, and refreshes the prototype.
  void enqueue(std::span<const double> feature, bool positive);
  void update_queues(const std::vector<std::vector<double>>& features, const std::vector<bool>& positive);

  const std::deque<std::vector<double>>& positives() const noexcept { return q_pos_; }
  const std::deque<std::vector<double>>& negatives() const noexcept { return q_neg_; }
  // Empty while the positive queue is empty.
  const std::optional<std::vector<double>>& prototype() const noexcept { return prototype_; }
  const ContrastConfig& config() const noexcept { return cfg_; }

  // Difficulty of each queued negative: cosine similarity to the prototype
  // (0 for a zero vector). All zeros when there is no usable prototype.
  std::vector<double> difficulties() const;

  // k draws without replacement (k capped at the queue size) with weights
  // proportional to exp(d_i / tau_s); returns indices into negatives().
  // Throws EmptyQueueError when the negative queue is empty.
  std::vector<std::size_t> sample_hard_negatives(std::size_t k, PortableRng& rng) const;

 private:
  ContrastConfig cfg_;
  std::deque<std::vector<double>> q_pos_;
  std::deque<std::vector<double>> q_neg_;
  std::optional<std::vector<double>> prototype_;
  std::size_t dim_ = 0;
};

struct ContrastiveResult {
  ad::Var loss;  // 1 x 1
  double mean_pos_similarity = 0.0;
  double mean_neg_similarity = 0.0;
  std::size_t anchors = 0;
  std::size_t negatives = 0;
};

// InfoNCE over cosine similarities:
//   -(1/N_a) sum_a log[exp(s_ap/tau) / (exp(s_ap/tau) + sum_k exp(s_ak/tau))]
// evaluated as logsumexp minus the positive logit. negatives[a] holds the K
// negatives of anchor a (typically constants). tau is a 1 x 1 node; throws
// DomainError when it is not positive. With no anchors the loss is 0.
ContrastiveResult contrastive_terms(ad::Tape& tape, std::span<const ad::Var> anchors,
                                    std::span<const ad::Var> positives,
                                    const std::vector<std::vector<ad::Var>>& negatives, ad::Var tau);
ad::Var contrastive_loss(ad::Tape& tape, std::span<const ad::Var> anchors, std::span<const ad::Var> positives,
                         const std::vector<std::vector<ad::Var>>& negatives, ad::Var tau);

// -(1/N) sum_i alpha_{y_i} (1 - p_{i,y_i})^gamma log p_{i,y_i} with p clamped
// to [1e-12, 1]. probs is N x C. Throws LabelError for a label outside C.
ad::Var focal_loss(ad::Var probs, std::span<const int> labels, const FocalParams& fp);

// 0.5 * (KL(p||q) + KL(q||p)) = 0.5 * sum (p - q)(log p - log q), components
// clamped to >= 1e-12. Symmetric bit-for-bit.
ad::Var consistency_loss(ad::Var p, ad::Var q);

// lambda_1 * l_con + l_cls + lambda_2 * l_cons.
ad::Var total_loss(ad::Var l_con, ad::Var l_cls, ad::Var l_cons, const LossWeights& w);
double total_loss(double l_con, double l_cls, double l_cons, const LossWeights& w);

}  // namespace avp
