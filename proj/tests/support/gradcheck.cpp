#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include "avp/diff.hpp"
#include "avp/objective.hpp"
#include "avp/rng.hpp"

namespace avp::testing {

namespace {

using ad::Tape;
using ad::Tensor;
using ad::Var;

Tensor random_tensor(PortableRng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Tensor t(r, c);
  for (auto& v : t.data) v = scale * rng.gaussian();
  return t;
}

Tensor positive_tensor(PortableRng& rng, std::size_t r, std::size_t c) {
  Tensor t(r, c);
  for (auto& v : t.data) v = 0.5 + std::abs(rng.gaussian());
  return t;
}

// Keeps every entry at least `gap` away from zero.
Tensor off_zero_tensor(PortableRng& rng, std::size_t r, std::size_t c, double gap = 0.05) {
  Tensor t(r, c);
  for (auto& v : t.data) {
    const double g = rng.gaussian();
    v = g < 0 ? g - gap : g + gap;
  }
  return t;
}

std::size_t dim(PortableRng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(lo + rng.below(hi - lo + 1));
}

struct Case {
  std::vector<Tensor> theta;
  std::function<Var(Tape&, std::span<const Var>)> op;
};

// Reduces the op output to a scalar with fixed random weights.
ad::ScalarFn scalarize(std::function<Var(Tape&, std::span<const Var>)> op, Tensor weights) {
  return [op = std::move(op), weights = std::move(weights)](Tape& tape, std::span<const Var> in) {
    const Var out = op(tape, in);
    if (out.rows() == 1 && out.cols() == 1 && weights.size() == 1) return ad::mul(out, tape.constant(weights));
    return ad::sum(ad::mul(out, tape.constant(weights)));
  };
}

ad::LstmParams lstm_from(std::span<const Var> v, std::size_t first) {
  return ad::LstmParams{v[first], v[first + 1], v[first + 2], v[first + 3],
                        v[first + 4], v[first + 5], v[first + 6], v[first + 7]};
}

void push_lstm(std::vector<Tensor>& theta, PortableRng& rng, std::size_t rows, std::size_t h) {
  for (int k = 0; k < 4; ++k) theta.push_back(random_tensor(rng, rows, h, 0.5));
  for (int k = 0; k < 4; ++k) theta.push_back(random_tensor(rng, 1, h, 0.5));
}

using Builder = std::function<Case(PortableRng&)>;

const std::map<std::string, Builder>& builders() {
  static const std::map<std::string, Builder> table = {
      {"add",
       [](PortableRng& g) {
         const auto r = dim(g, 1, 4), c = dim(g, 1, 5);
         return Case{{random_tensor(g, r, c), random_tensor(g, r, c)},
                     [](Tape&, std::span<const Var> v) { return ad::add(v[0], v[1]); }};
       }},
      {"add_broadcast",
       [](PortableRng& g) {
         const auto r = dim(g, 2, 4), c = dim(g, 1, 5);
         return Case{{random_tensor(g, r, c), random_tensor(g, 1, c)},
                     [](Tape&, std::span<const Var> v) { return ad::add(v[0], v[1]); }};
       }},
      {"sub",
       [](PortableRng& g) {
         const auto r = dim(g, 1, 4), c = dim(g, 1, 5);
         return Case{{random_tensor(g, r, c), random_tensor(g, r, c)},
                     [](Tape&, std::span<const Var> v) { return ad::sub(v[0], v[1]); }};
       }},
      {"mul",
       [](PortableRng& g) {
         const auto r = dim(g, 1, 4), c = dim(g, 1, 5);
         return Case{{random_tensor(g, r, c), random_tensor(g, r, c)},
                     [](Tape&, std::span<const Var> v) { return ad::mul(v[0], v[1]); }};
       }},
      {"affine",
       [](PortableRng& g) {
         const double s = g.gaussian(), b = g.gaussian();
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5))},
                     [s, b](Tape&, std::span<const Var> v) { return ad::affine(v[0], s, b); }};
       }},
      {"mul_scalar",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5)), random_tensor(g, 1, 1)},
                     [](Tape&, std::span<const Var> v) { return ad::mul_scalar(v[0], v[1]); }};
       }},
      {"div_scalar",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5)), positive_tensor(g, 1, 1)},
                     [](Tape&, std::span<const Var> v) { return ad::div_scalar(v[0], v[1]); }};
       }},
      {"matmul",
       [](PortableRng& g) {
         const auto n = dim(g, 1, 4), k = dim(g, 1, 5), m = dim(g, 1, 4);
         return Case{{random_tensor(g, n, k), random_tensor(g, k, m)},
                     [](Tape&, std::span<const Var> v) { return ad::matmul(v[0], v[1]); }};
       }},
      {"matmul_rows",
       [](PortableRng& g) {
         const auto n = dim(g, 1, 4), k = dim(g, 1, 4), m = dim(g, 1, 4), off = dim(g, 0, 3);
         return Case{{random_tensor(g, n, k), random_tensor(g, k + off + dim(g, 0, 2), m)},
                     [off](Tape&, std::span<const Var> v) { return ad::matmul_rows(v[0], v[1], off); }};
       }},
      {"transpose",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5))},
                     [](Tape&, std::span<const Var> v) { return ad::transpose(v[0]); }};
       }},
      {"sigmoid",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5), 2.0)},
                     [](Tape&, std::span<const Var> v) { return ad::sigmoid(v[0]); }};
       }},
      {"tanh",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5), 1.5)},
                     [](Tape&, std::span<const Var> v) { return ad::tanh(v[0]); }};
       }},
      {"relu",
       [](PortableRng& g) {
         return Case{{off_zero_tensor(g, dim(g, 1, 4), dim(g, 1, 5))},
                     [](Tape&, std::span<const Var> v) { return ad::relu(v[0]); }};
       }},
      {"exp",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5))},
                     [](Tape&, std::span<const Var> v) { return ad::exp(v[0]); }};
       }},
      {"log",
       [](PortableRng& g) {
         return Case{{positive_tensor(g, dim(g, 1, 4), dim(g, 1, 5))},
                     [](Tape&, std::span<const Var> v) { return ad::log(v[0]); }};
       }},
      {"clamp",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5))},
                     [](Tape&, std::span<const Var> v) { return ad::clamp(v[0], -0.5, 0.5); }};
       }},
      {"pow_scalar",
       [](PortableRng& g) {
         const double p = 0.5 + 2.5 * g.uniform();
         return Case{{positive_tensor(g, dim(g, 1, 4), dim(g, 1, 5))},
                     [p](Tape&, std::span<const Var> v) { return ad::pow_scalar(v[0], p); }};
       }},
      {"softmax",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 6), 2.0)},
                     [](Tape&, std::span<const Var> v) { return ad::softmax_rows(v[0]); }};
       }},
      {"logsumexp",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 6), 2.0)},
                     [](Tape&, std::span<const Var> v) { return ad::logsumexp_rows(v[0]); }};
       }},
      {"concat",
       [](PortableRng& g) {
         const auto r = dim(g, 1, 4);
         return Case{{random_tensor(g, r, dim(g, 1, 3)), random_tensor(g, r, dim(g, 1, 3)),
                      random_tensor(g, r, dim(g, 1, 3))},
                     [](Tape&, std::span<const Var> v) { return ad::concat_cols(v); }};
       }},
      {"concat_rows",
       [](PortableRng& g) {
         const auto c = dim(g, 1, 4);
         return Case{{random_tensor(g, dim(g, 1, 3), c), random_tensor(g, dim(g, 1, 3), c)},
                     [](Tape&, std::span<const Var> v) { return ad::concat_rows(v); }};
       }},
      {"slice",
       [](PortableRng& g) {
         const auto r = dim(g, 2, 5), c = dim(g, 2, 5);
         const auto r0 = dim(g, 0, r - 1), c0 = dim(g, 0, c - 1);
         const auto rn = dim(g, 1, r - r0), cn = dim(g, 1, c - c0);
         return Case{{random_tensor(g, r, c)}, [=](Tape&, std::span<const Var> v) {
                       return ad::slice_cols(ad::slice_rows(v[0], r0, rn), c0, cn);
                     }};
       }},
      {"pick",
       [](PortableRng& g) {
         const auto r = dim(g, 1, 4), c = dim(g, 1, 4);
         const auto i = dim(g, 0, r - 1), j = dim(g, 0, c - 1);
         return Case{{random_tensor(g, r, c)},
                     [=](Tape&, std::span<const Var> v) { return ad::pick(ad::tanh(v[0]), i, j); }};
       }},
      {"sum",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5))},
                     [](Tape&, std::span<const Var> v) { return ad::sum(ad::tanh(v[0])); }};
       }},
      {"mean",
       [](PortableRng& g) {
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5))},
                     [](Tape&, std::span<const Var> v) { return ad::mean(ad::tanh(v[0])); }};
       }},
      {"maximum",
       [](PortableRng& g) {
         const auto r = dim(g, 1, 4), c = dim(g, 1, 5);
         return Case{{random_tensor(g, r, c), random_tensor(g, r, c)},
                     [](Tape&, std::span<const Var> v) { return ad::maximum(v[0], v[1]); }};
       }},
      {"dot",
       [](PortableRng& g) {
         const auto r = dim(g, 1, 3), c = dim(g, 1, 5);
         return Case{{random_tensor(g, r, c), random_tensor(g, r, c)},
                     [](Tape&, std::span<const Var> v) { return ad::dot(v[0], v[1]); }};
       }},
      {"cosine",
       [](PortableRng& g) {
         const auto c = dim(g, 2, 6);
         return Case{{random_tensor(g, 1, c), random_tensor(g, 1, c)},
                     [](Tape&, std::span<const Var> v) { return ad::cosine(v[0], v[1]); }};
       }},
      {"dropout",
       [](PortableRng& g) {
         const std::uint64_t seed = g.next_u64();
         return Case{{random_tensor(g, dim(g, 1, 4), dim(g, 1, 5))}, [seed](Tape&, std::span<const Var> v) {
                       PortableRng rng(seed);
                       return ad::dropout(v[0], 0.3, rng);
                     }};
       }},
      {"conv1d",
       [](PortableRng& g) {
         const auto h = dim(g, 1, 3), dx = dim(g, 1, 3), k = dim(g, 1, 4);
         const auto l = h + dim(g, 0, 4);
         return Case{{random_tensor(g, l, dx), random_tensor(g, h * dx, k), random_tensor(g, 1, k, 0.5)},
                     [h](Tape&, std::span<const Var> v) { return ad::conv1d(v[0], v[1], v[2], h); }};
       }},
      {"conv1d_extra",
       [](PortableRng& g) {
         const auto h = dim(g, 1, 3), dx = dim(g, 1, 3), dg = dim(g, 1, 3), k = dim(g, 1, 4);
         const auto l = h + dim(g, 0, 4);
         return Case{{random_tensor(g, l, dx), random_tensor(g, h * (dx + dg), k), random_tensor(g, 1, k, 0.5),
                      random_tensor(g, 1, k, 0.5)},
                     [h](Tape&, std::span<const Var> v) { return ad::conv1d(v[0], v[1], v[2], h, v[3]); }};
       }},
      {"lstm_step",
       [](PortableRng& g) {
         const auto din = dim(g, 1, 4), dh = dim(g, 1, 4);
         Case c;
         c.theta = {random_tensor(g, 1, din), random_tensor(g, 1, dh), random_tensor(g, 1, dh)};
         push_lstm(c.theta, g, dh + din, dh);
         c.op = [](Tape&, std::span<const Var> v) {
           const auto st = ad::lstm_step(v[0], v[1], v[2], lstm_from(v, 3));
           return ad::concat_cols({st.h, st.C});
         };
         return c;
       }},
      {"bilstm",
       [](PortableRng& g) {
         const auto l = dim(g, 1, 4), dx = dim(g, 1, 3), dh = dim(g, 1, 3);
         Case c;
         c.theta = {random_tensor(g, l, dx)};
         push_lstm(c.theta, g, dh + dx, dh);
         push_lstm(c.theta, g, dh + dx, dh);
         c.op = [](Tape&, std::span<const Var> v) { return ad::bilstm(v[0], lstm_from(v, 1), lstm_from(v, 9)); };
         return c;
       }},
      {"bilstm_global",
       [](PortableRng& g) {
         const auto l = dim(g, 1, 4), dx = dim(g, 1, 3), dg = dim(g, 1, 3), dh = dim(g, 1, 3);
         Case c;
         c.theta = {random_tensor(g, l, dx), random_tensor(g, 1, dg)};
         push_lstm(c.theta, g, dh + dx + dg, dh);
         push_lstm(c.theta, g, dh + dx + dg, dh);
         c.op = [](Tape&, std::span<const Var> v) {
           return ad::bilstm(v[0], lstm_from(v, 2), lstm_from(v, 10), v[1]);
         };
         return c;
       }},
      {"attention_pool",
       [](PortableRng& g) {
         const auto l = dim(g, 1, 5), d = dim(g, 1, 4), a = dim(g, 1, 4);
         return Case{{random_tensor(g, l, d), random_tensor(g, d, a), random_tensor(g, a, 1)},
                     [](Tape&, std::span<const Var> v) {
                       const auto out = ad::attention_pool(v[0], v[1], v[2]);
                       return ad::concat_cols({out.pooled, out.weights});
                     }};
       }},
  };
  return table;
}

}  // namespace

std::vector<std::string> primitive_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : builders()) names.push_back(name);
  return names;
}

GradCheckSummary check_primitive(const std::string& name, int trials, std::uint64_t seed) {
  const auto it = builders().find(name);
  if (it == builders().end()) throw std::invalid_argument("unknown primitive " + name);
  GradCheckSummary s{name, trials, 0, 0.0};
  PortableRng rng(seed);
  for (int t = 0; t < trials; ++t) {
    Case c = it->second(rng);
    // Output shape from a throwaway evaluation.
    Tensor shape_probe;
    {
      Tape tape;
      std::vector<Var> leaves;
      for (const auto& th : c.theta) leaves.push_back(tape.constant(th));
      shape_probe = c.op(tape, leaves).value();
    }
    const Tensor weights = random_tensor(rng, shape_probe.rows, shape_probe.cols);
    const auto report = ad::finite_diff_check(scalarize(c.op, weights), c.theta);
    s.coordinates += report.coordinates;
    s.worst = std::max(s.worst, report.max_rel_error);
  }
  return s;
}

ModelConfig tiny_model_config() {
  ModelConfig cfg;
  cfg.embed_dim = 4;
  cfg.descriptor_dim = 5;
  cfg.kernel_sizes = {1, 3};
  cfg.conv_channels = 3;
  cfg.lstm_hidden = 3;
  cfg.attention_dim = 3;
  cfg.gate_hidden = 3;
  cfg.mlp_hidden = {4};
  cfg.class_count = 2;
  cfg.dropout = 0.0;
  return cfg;
}

GradCheckSummary check_composite_model(int trials, std::uint64_t seed) {
  GradCheckSummary s{"composite_model_loss", trials, 0, 0.0};
  PortableRng rng(seed);
  const ModelConfig cfg = tiny_model_config();
  for (int t = 0; t < trials; ++t) {
    const ModelParams params = init_params(cfg, rng.next_u64());
    std::vector<std::string> names;
    std::vector<Tensor> theta;
    for (const auto& [name, tensor] : params.tensors) {
      names.push_back(name);
      theta.push_back(tensor);
    }
    // Three samples (two positives with twins, one negative) and two
    // queued negatives per anchor.
    std::vector<FeatureBundle> inputs, twins;
    for (int i = 0; i < 3; ++i) {
      const std::size_t len = 3 + static_cast<std::size_t>(rng.below(4));
      inputs.push_back({"s" + std::to_string(i), std::string(len, 'A'), random_tensor(rng, len, cfg.embed_dim),
                        random_tensor(rng, 1, cfg.descriptor_dim)});
      twins.push_back({"t" + std::to_string(i), std::string(len, 'A'), random_tensor(rng, len, cfg.embed_dim),
                       inputs.back().global});
    }
    const std::vector<int> labels = {1, 0, 1};
    std::vector<std::vector<Tensor>> negs(3);
    for (auto& n : negs) {
      for (int k = 0; k < 2; ++k) n.push_back(random_tensor(rng, 1, cfg.lstm_hidden * 2));
    }
    FocalParams focal;
    focal.gamma = 2.0;
    focal.alpha = {1.5, 0.5};
    const LossWeights weights(0.5, 0.1);

    const ad::ScalarFn f = [&](Tape& tape, std::span<const Var> leaves) {
      BoundParams bound;
      for (std::size_t k = 0; k < names.size(); ++k) bound.vars[names[k]] = leaves[k];
      const Var tau = ad::exp(ad::clamp(bound["log_temperature"], std::log(0.01), std::log(1.0)));
      std::vector<Var> probs, anchors, positives, cons;
      std::vector<std::vector<Var>> negatives;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto fw = forward(tape, bound, cfg, inputs[i]);
        probs.push_back(fw.probs);
        if (labels[i] != 1) continue;
        const auto tw = forward(tape, bound, cfg, twins[i]);
        cons.push_back(consistency_loss(fw.probs, tw.probs));
        anchors.push_back(fw.e_final);
        positives.push_back(tw.e_final);
        std::vector<Var> nv;
        for (const auto& n : negs[i]) nv.push_back(tape.constant(n));
        negatives.push_back(std::move(nv));
      }
      const Var l_cls = focal_loss(ad::concat_rows(probs), labels, focal);
      const Var l_con = contrastive_loss(tape, anchors, positives, negatives, tau);
      const Var l_cons = ad::mean(ad::concat_rows(cons));
      return total_loss(l_con, l_cls, l_cons, weights);
    };
    const auto report = ad::finite_diff_check(f, theta);
    s.coordinates += report.coordinates;
    s.worst = std::max(s.worst, report.max_rel_error);
  }
  return s;
}

}  // namespace avp::testing
