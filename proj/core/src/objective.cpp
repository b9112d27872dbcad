#include "avp/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "avp/errors.hpp"

namespace avp {

namespace {

constexpr const char* kModule = "objective";
constexpr double kProbFloor = 1e-12;

}  // namespace

void ContrastConfig::validate() const {
  if (pos_capacity < 1 || neg_capacity < 1) throw ConfigError(kModule, "queue capacities must be at least 1");
  if (!(sampling_sharpness > 0.0)) throw ConfigError(kModule, "sampling_sharpness must be positive");
  if (!(temperature_min > 0.0) || !(temperature_max >= temperature_min)) {
    throw ConfigError(kModule, "temperature bounds must satisfy 0 < min <= max");
  }
  if (temperature_init < temperature_min || temperature_init > temperature_max) {
    throw ConfigError(kModule, "temperature_init must lie within the temperature bounds");
  }
}

LossWeights::LossWeights(double contrastive_weight, double consistency_weight)
    : contrastive(contrastive_weight), consistency(consistency_weight) {
  validate();
}

void LossWeights::validate() const {
  if (!(contrastive >= 0.0) || !(consistency >= 0.0)) throw ConfigError(kModule, "loss weights must be non-negative");
}

void FocalParams::validate(std::size_t class_count) const {
  if (!(gamma >= 0.0)) throw ConfigError(kModule, "focal gamma must be non-negative");
  if (!alpha.empty()) {
    if (alpha.size() != class_count) {
      throw ConfigError(kModule, "focal alpha has " + std::to_string(alpha.size()) + " entries for " +
                                     std::to_string(class_count) + " classes");
    }
    for (double a : alpha) {
      if (!(a > 0.0)) throw ConfigError(kModule, "focal alpha components must be positive");
    }
  }
}

std::vector<double> FocalParams::inverse_frequency(std::span<const std::size_t> class_counts) {
  std::vector<double> inv(class_counts.size(), 0.0);
  double max_inv = 0.0;
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    if (class_counts[c] > 0) {
      inv[c] = 1.0 / static_cast<double>(class_counts[c]);
      max_inv = std::max(max_inv, inv[c]);
    }
  }
  if (max_inv == 0.0) return std::vector<double>(class_counts.size(), 1.0);
  for (double& v : inv) {
    if (v == 0.0) v = max_inv;
  }
  const double m = std::accumulate(inv.begin(), inv.end(), 0.0) / static_cast<double>(inv.size());
  for (double& v : inv) v /= m;
  return inv;
}

double cosine_similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError(kModule, "cosine_similarity of vectors with different lengths");
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (xx == 0.0 || yy == 0.0) throw ZeroVectorError(kModule, "cosine similarity of a zero vector");
  return xy / (std::sqrt(xx) * std::sqrt(yy));
}

ContrastState::ContrastState(ContrastConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void ContrastState::enqueue(std::span<const double> feature, bool positive) {
  if (feature.empty()) throw ShapeError(kModule, "empty feature vector");
  if (dim_ == 0) dim_ = feature.size();
  if (feature.size() != dim_) {
    throw ShapeError(kModule, "feature of dimension " + std::to_string(feature.size()) + " for queues of dimension " +
                                  std::to_string(dim_));
  }
  auto& q = positive ? q_pos_ : q_neg_;
  const std::size_t cap = positive ? cfg_.pos_capacity : cfg_.neg_capacity;
  q.emplace_back(feature.begin(), feature.end());
  while (q.size() > cap) q.pop_front();
  if (positive) {
    std::vector<double> mean(dim_, 0.0);
    for (const auto& v : q_pos_)
      for (std::size_t i = 0; i < dim_; ++i) mean[i] += v[i];
    for (double& m : mean) m /= static_cast<double>(q_pos_.size());
    prototype_ = std::move(mean);
  }
}

void ContrastState::update_queues(const std::vector<std::vector<double>>& features, const std::vector<bool>& positive) {
  if (features.size() != positive.size()) throw ShapeError(kModule, "features and flags differ in length");
  for (std::size_t i = 0; i < features.size(); ++i) enqueue(features[i], positive[i]);
}

std::vector<double> ContrastState::difficulties() const {
  std::vector<double> d(q_neg_.size(), 0.0);
  if (!prototype_) return d;
  double pn = 0.0;
  for (double v : *prototype_) pn += v * v;
  if (pn == 0.0) return d;
  for (std::size_t i = 0; i < q_neg_.size(); ++i) {
    double nn = 0.0;
    for (double v : q_neg_[i]) nn += v * v;
    d[i] = nn == 0.0 ? 0.0 : cosine_similarity(q_neg_[i], *prototype_);
  }
  return d;
}

std::vector<std::size_t> ContrastState::sample_hard_negatives(std::size_t k, PortableRng& rng) const {
  if (q_neg_.empty()) throw EmptyQueueError(kModule, "negative queue is empty");
  const auto d = difficulties();
  const double dmax = *std::max_element(d.begin(), d.end());
  std::vector<double> w(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) w[i] = std::exp((d[i] - dmax) / cfg_.sampling_sharpness);

  k = std::min(k, q_neg_.size());
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t draw = 0; draw < k; ++draw) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t chosen = w.size();
    std::size_t last_live = w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      last_live = i;
      acc += w[i];
      if (u < acc) {
        chosen = i;
        break;
      }
    }
    if (chosen == w.size()) chosen = last_live;  // rounding at the top end
    picked.push_back(chosen);
    w[chosen] = 0.0;
  }
  return picked;
}

ContrastiveResult contrastive_terms(ad::Tape& tape, std::span<const ad::Var> anchors,
                                    std::span<const ad::Var> positives,
                                    const std::vector<std::vector<ad::Var>>& negatives, ad::Var tau) {
  if (anchors.size() != positives.size() || anchors.size() != negatives.size()) {
    throw ShapeError(kModule, "anchors, positives, and negative sets must have equal counts");
  }
  if (!(tau.item() > 0.0)) throw DomainError(kModule, "temperature must be positive");
  ContrastiveResult r;
  r.anchors = anchors.size();
  if (anchors.empty()) {
    r.loss = tape.constant(ad::Tensor::scalar(0.0));
    return r;
  }
  std::vector<ad::Var> per_anchor;
  per_anchor.reserve(anchors.size());
  double pos_sum = 0.0, neg_sum = 0.0;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    std::vector<ad::Var> sims{ad::cosine(anchors[a], positives[a])};
    pos_sum += sims.front().item();
    for (const ad::Var& n : negatives[a]) {
      sims.push_back(ad::cosine(anchors[a], n));
      neg_sum += sims.back().item();
      ++r.negatives;
    }
    const ad::Var logits = ad::div_scalar(ad::concat_cols(sims), tau);
    per_anchor.push_back(ad::sub(ad::logsumexp_rows(logits), ad::pick(logits, 0, 0)));
  }
  r.loss = ad::mean(ad::concat_rows(per_anchor));
  r.mean_pos_similarity = pos_sum / static_cast<double>(anchors.size());
  r.mean_neg_similarity = r.negatives ? neg_sum / static_cast<double>(r.negatives) : 0.0;
  return r;
}

ad::Var contrastive_loss(ad::Tape& tape, std::span<const ad::Var> anchors, std::span<const ad::Var> positives,
                         const std::vector<std::vector<ad::Var>>& negatives, ad::Var tau) {
  return contrastive_terms(tape, anchors, positives, negatives, tau).loss;
}

ad::Var focal_loss(ad::Var probs, std::span<const int> labels, const FocalParams& fp) {
  const std::size_t n = probs.rows(), C = probs.cols();
  if (labels.size() != n) throw ShapeError(kModule, "focal_loss: label count does not match rows");
  if (n == 0) throw EmptyError(kModule, "focal_loss over an empty batch");
  fp.validate(C);
  std::vector<ad::Var> terms;
  terms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= C) {
      throw LabelError(kModule, "label " + std::to_string(y) + " outside " + std::to_string(C) + " classes");
    }
    const ad::Var p = ad::clamp(ad::pick(probs, i, static_cast<std::size_t>(y)), kProbFloor, 1.0);
    const ad::Var focus = ad::pow_scalar(ad::affine(p, -1.0, 1.0), fp.gamma);
    const double a = fp.alpha.empty() ? 1.0 : fp.alpha[static_cast<std::size_t>(y)];
    terms.push_back(ad::scale(ad::mul(focus, ad::log(p)), a));
  }
  return ad::scale(ad::mean(ad::concat_rows(terms)), -1.0);
}

ad::Var consistency_loss(ad::Var p, ad::Var q) {
  if (!p.value().same_shape(q.value())) throw ShapeError(kModule, "consistency_loss of differently shaped inputs");
  const ad::Var pc = ad::clamp(p, kProbFloor, 1.0);
  const ad::Var qc = ad::clamp(q, kProbFloor, 1.0);
  return ad::scale(ad::sum(ad::mul(ad::sub(pc, qc), ad::sub(ad::log(pc), ad::log(qc)))), 0.5);
}

ad::Var total_loss(ad::Var l_con, ad::Var l_cls, ad::Var l_cons, const LossWeights& w) {
  w.validate();
  return ad::add(ad::add(ad::scale(l_con, w.contrastive), l_cls), ad::scale(l_cons, w.consistency));
}

double total_loss(double l_con, double l_cls, double l_cons, const LossWeights& w) {
  w.validate();
  return w.contrastive * l_con + l_cls + w.consistency * l_cons;
}

}  // namespace avp
