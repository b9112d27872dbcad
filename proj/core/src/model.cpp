#include "avp/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "avp/errors.hpp"
#include "avp/format.hpp"
#include "json.hpp"

namespace avp {

namespace {

constexpr const char* kModule = "model";
constexpr std::string_view kMagic = "AVPCKPT";

using ad::Tensor;
using ad::Var;
using nlohmann::json;

Tensor glorot(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out, PortableRng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(rows, cols);
  for (double& v : t.data) v = (2.0 * rng.uniform() - 1.0) * limit;
  return t;
}

std::string conv_name(std::size_t h) { return "conv.k" + std::to_string(h); }

const std::array<const char*, 4> kGates{"f", "i", "C", "o"};

void add_classifier(ModelParams& p, const ModelConfig& cfg, PortableRng& rng) {
  std::size_t in = 2 * cfg.lstm_hidden;
  for (std::size_t k = 0; k < cfg.mlp_hidden.size(); ++k) {
    const std::size_t out = cfg.mlp_hidden[k];
    p.tensors["mlp." + std::to_string(k) + ".W"] = glorot(in, out, in, out, rng);
    p.tensors["mlp." + std::to_string(k) + ".b"] = Tensor(1, out);
    in = out;
  }
  p.tensors["mlp.out.W"] = glorot(in, cfg.class_count, in, cfg.class_count, rng);
  p.tensors["mlp.out.b"] = Tensor(1, cfg.class_count);
}

}  // namespace

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v < 1) throw ConfigError(kModule, std::string(what) + " must be at least 1");
  };
  positive(embed_dim, "embed_dim");
  positive(conv_channels, "conv_channels");
  positive(lstm_hidden, "lstm_hidden");
  positive(attention_dim, "attention_dim");
  positive(gate_hidden, "gate_hidden");
  if (class_count < 2) throw ConfigError(kModule, "class_count must be at least 2");
  if (kernel_sizes.empty()) throw ConfigError(kModule, "at least one kernel size is required");
  const std::size_t hmax = max_kernel();
  for (std::size_t i = 0; i < kernel_sizes.size(); ++i) {
    positive(kernel_sizes[i], "kernel size");
    if ((hmax - kernel_sizes[i]) % 2 != 0) {
      throw ConfigError(kModule, "kernel sizes must share parity so their windows can be centre-aligned");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (kernel_sizes[j] == kernel_sizes[i]) throw ConfigError(kModule, "duplicate kernel size");
    }
  }
  for (auto h : mlp_hidden) positive(h, "mlp hidden width");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError(kModule, "dropout must lie in [0, 1)");
  if (f_match == FMatch::kIdentity && conv_channels != 2 * lstm_hidden) {
    throw ConfigError(kModule, "identity f_match needs conv_channels == 2 * lstm_hidden");
  }
}

std::size_t ModelConfig::max_kernel() const {
  return kernel_sizes.empty() ? 0 : *std::max_element(kernel_sizes.begin(), kernel_sizes.end());
}

const Tensor& ModelParams::at(const std::string& name) const {
  const auto it = tensors.find(name);
  if (it == tensors.end()) throw ShapeError(kModule, "no parameter named '" + name + "'");
  return it->second;
}

Tensor& ModelParams::at(const std::string& name) {
  const auto it = tensors.find(name);
  if (it == tensors.end()) throw ShapeError(kModule, "no parameter named '" + name + "'");
  return it->second;
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors) n += t.size();
  return n;
}

bool is_classifier_param(const std::string& name) { return name.starts_with("mlp."); }

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed, double temperature_init) {
  cfg.validate();
  if (!(temperature_init > 0.0)) throw ConfigError(kModule, "temperature_init must be positive");
  PortableRng rng(seed);
  ModelParams p;
  const std::size_t din = cfg.input_dim();
  const std::size_t C = cfg.conv_channels, dh = cfg.lstm_hidden, A = cfg.attention_dim;
  for (auto h : cfg.kernel_sizes) {
    p.tensors[conv_name(h) + ".W"] = glorot(h * din, C, h * din, h * C, rng);
    p.tensors[conv_name(h) + ".b"] = Tensor(1, C);
  }
  p.tensors["attn_cnn.W"] = glorot(C, A, C, A, rng);
  p.tensors["attn_cnn.w"] = glorot(A, 1, A, 1, rng);
  for (const char* dir : {"fwd", "bwd"}) {
    for (const char* g : kGates) {
      p.tensors[std::string("lstm.") + dir + ".W_" + g] = glorot(dh + din, dh, dh + din, dh, rng);
      p.tensors[std::string("lstm.") + dir + ".b_" + g] = Tensor(1, dh, std::string(g) == "f" ? 1.0 : 0.0);
    }
  }
  p.tensors["attn_lstm.W"] = glorot(2 * dh, A, 2 * dh, A, rng);
  p.tensors["attn_lstm.w"] = glorot(A, 1, A, 1, rng);
  if (cfg.f_match == FMatch::kLinear) {
    p.tensors["fmatch.W"] = glorot(C, 2 * dh, C, 2 * dh, rng);
    p.tensors["fmatch.b"] = Tensor(1, 2 * dh);
  }
  const std::size_t gin = C + 2 * dh;
  const std::size_t gout = cfg.per_dim_gate ? 2 * dh : 1;
  p.tensors["gate.W1"] = glorot(gin, cfg.gate_hidden, gin, cfg.gate_hidden, rng);
  p.tensors["gate.b1"] = Tensor(1, cfg.gate_hidden);
  p.tensors["gate.W2"] = glorot(cfg.gate_hidden, gout, cfg.gate_hidden, gout, rng);
  p.tensors["gate.b2"] = Tensor(1, gout);
  add_classifier(p, cfg, rng);
  p.tensors["log_temperature"] = Tensor::scalar(std::log(temperature_init));
  return p;
}

void reinit_classifier(ModelParams& params, const ModelConfig& cfg, std::uint64_t seed) {
  std::erase_if(params.tensors, [](const auto& kv) { return is_classifier_param(kv.first); });
  PortableRng rng(derive_seed(seed, 0x636c6173ULL));
  add_classifier(params, cfg, rng);
}

FeatureBundle make_bundle(const PeptideSequence& seq, const EmbeddingMatrix& emb, const FeatureVector& feat) {
  if (emb.length != seq.residues.size()) {
    throw ShapeError(kModule, "embedding for '" + seq.id + "' has " + std::to_string(emb.length) +
                                  " rows for a sequence of length " + std::to_string(seq.residues.size()));
  }
  FeatureBundle b;
  b.id = seq.id;
  b.residues = seq.residues;
  b.embedding = Tensor(emb.length, emb.dim, std::vector<double>(emb.values.begin(), emb.values.end()));
  b.global = Tensor::row_vector(feat.values);
  return b;
}

Tensor build_input(const FeatureBundle& bundle) {
  const Tensor& e = bundle.embedding;
  const Tensor& g = bundle.global;
  if (g.rows != 1) throw ShapeError(kModule, "global feature vector must be a single row");
  Tensor out(e.rows, e.cols + g.cols);
  for (std::size_t t = 0; t < e.rows; ++t) {
    auto row = out.row(t);
    std::copy(e.row(t).begin(), e.row(t).end(), row.begin());
    std::copy(g.data.begin(), g.data.end(), row.begin() + static_cast<std::ptrdiff_t>(e.cols));
  }
  return out;
}

Tensor build_input(const EmbeddingMatrix& emb, const FeatureVector& feat) {
  for (double v : feat.values) {
    if (!std::isfinite(v)) throw ShapeError(kModule, "non-finite descriptor value");
  }
  if (emb.values.size() != emb.length * emb.dim) throw ShapeError(kModule, "inconsistent embedding matrix");
  FeatureBundle b;
  b.embedding = Tensor(emb.length, emb.dim, std::vector<double>(emb.values.begin(), emb.values.end()));
  b.global = Tensor::row_vector(feat.values);
  return build_input(b);
}

Var BoundParams::operator[](const std::string& name) const {
  const auto it = vars.find(name);
  if (it == vars.end()) throw ShapeError(kModule, "no bound parameter named '" + name + "'");
  return it->second;
}

BoundParams bind_params(ad::Tape& tape, const ModelParams& params, bool requires_grad) {
  BoundParams b;
  for (const auto& [name, t] : params.tensors) b.vars.emplace(name, tape.leaf(t, requires_grad));
  return b;
}

std::map<std::string, Tensor> collect_grads(const BoundParams& bound) {
  std::map<std::string, Tensor> out;
  for (const auto& [name, v] : bound.vars) out.emplace(name, v.grad());
  return out;
}

GateOutput gated_fuse(Var v_cnn, Var v_bilstm, const BoundParams& p, const ModelConfig& cfg,
                      std::optional<double> force_lambda) {
  ad::Tape& tape = *v_cnn.tape();
  const std::size_t d = 2 * cfg.lstm_hidden;
  if (v_cnn.rows() != 1 || v_cnn.cols() != cfg.conv_channels || v_bilstm.rows() != 1 || v_bilstm.cols() != d) {
    throw ShapeError(kModule, "gated_fuse inputs do not match the model configuration");
  }
  const Var matched =
      cfg.f_match == FMatch::kLinear ? ad::add(ad::matmul(v_cnn, p["fmatch.W"]), p["fmatch.b"]) : v_cnn;
  Var lambda;
  if (force_lambda) {
    lambda = tape.constant(Tensor(1, cfg.per_dim_gate ? d : 1, *force_lambda));
  } else {
    const Var hidden = ad::relu(ad::add(ad::matmul(ad::concat_cols({v_cnn, v_bilstm}), p["gate.W1"]), p["gate.b1"]));
    lambda = ad::sigmoid(ad::add(ad::matmul(hidden, p["gate.W2"]), p["gate.b2"]));
  }
  const Var one_minus = ad::affine(lambda, -1.0, 1.0);
  Var e_final;
  if (lambda.cols() == 1) {
    e_final = ad::add(ad::mul_scalar(matched, lambda), ad::mul_scalar(v_bilstm, one_minus));
  } else {
    e_final = ad::add(ad::mul(matched, lambda), ad::mul(v_bilstm, one_minus));
  }
  return {e_final, lambda};
}

ForwardVars forward(ad::Tape& tape, const BoundParams& p, const ModelConfig& cfg, Var x, std::optional<Var> g,
                    const ForwardOptions& opts) {
  const std::size_t din = cfg.input_dim();
  const std::size_t dx = x.cols();
  if (dx + (g ? g->cols() : 0) != din) {
    throw ShapeError(kModule, "input width " + std::to_string(dx + (g ? g->cols() : 0)) +
                                  " does not match the configured " + std::to_string(din));
  }
  const std::size_t L = x.rows();
  const std::size_t hmax = cfg.max_kernel();
  if (L < hmax) {
    throw LengthError(kModule, "sequence of length " + std::to_string(L) + " is shorter than the widest kernel (" +
                                   std::to_string(hmax) + ")");
  }

  // CNN branch: one valid convolution per width, centre-aligned and max-merged.
  const std::size_t n = L - hmax + 1;
  Var merged;
  for (std::size_t k = 0; k < cfg.kernel_sizes.size(); ++k) {
    const std::size_t h = cfg.kernel_sizes[k];
    const Var W = p[conv_name(h) + ".W"];
    std::optional<Var> extra;
    if (g) {
      Var acc = ad::matmul_rows(*g, W, dx);
      for (std::size_t i = 1; i < h; ++i) acc = ad::add(acc, ad::matmul_rows(*g, W, i * din + dx));
      extra = acc;
    }
    Var c = ad::conv1d(x, W, p[conv_name(h) + ".b"], h, extra);
    c = ad::slice_rows(c, (hmax - h) / 2, n);
    merged = k == 0 ? c : ad::maximum(merged, c);
  }
  const auto cnn = ad::attention_pool(merged, p["attn_cnn.W"], p["attn_cnn.w"]);

  auto lstm = [&](const char* dir) {
    const std::string pre = std::string("lstm.") + dir + ".";
    return ad::LstmParams{p[pre + "W_f"], p[pre + "W_i"], p[pre + "W_C"], p[pre + "W_o"],
                          p[pre + "b_f"], p[pre + "b_i"], p[pre + "b_C"], p[pre + "b_o"]};
  };
  const Var hs = ad::bilstm(x, lstm("fwd"), lstm("bwd"), g);
  const auto rnn = ad::attention_pool(hs, p["attn_lstm.W"], p["attn_lstm.w"]);

  const auto gate = gated_fuse(cnn.pooled, rnn.pooled, p, cfg, opts.force_lambda);

  Var h = gate.e_final;
  const bool drop = opts.training && cfg.dropout > 0.0;
  if (drop && opts.dropout_rng == nullptr) throw ConfigError(kModule, "training forward needs a dropout RNG");
  for (std::size_t k = 0; k < cfg.mlp_hidden.size(); ++k) {
    const std::string pre = "mlp." + std::to_string(k) + ".";
    h = ad::relu(ad::add(ad::matmul(h, p[pre + "W"]), p[pre + "b"]));
    if (drop) h = ad::dropout(h, cfg.dropout, *opts.dropout_rng);
  }
  const Var logits = ad::add(ad::matmul(h, p["mlp.out.W"]), p["mlp.out.b"]);
  (void)tape;
  return {cnn.pooled, rnn.pooled, gate.lambda, gate.e_final, logits, ad::softmax_rows(logits), cnn.weights,
          rnn.weights};
}

ForwardVars forward(ad::Tape& tape, const BoundParams& p, const ModelConfig& cfg, const FeatureBundle& in,
                    const ForwardOptions& opts) {
  const Var x = tape.constant(in.embedding);
  if (in.global.size() == 0) return forward(tape, p, cfg, x, std::nullopt, opts);
  return forward(tape, p, cfg, x, tape.constant(in.global), opts);
}

ForwardOutput predict(const ModelParams& params, const ModelConfig& cfg, const FeatureBundle& in,
                      std::optional<double> force_lambda) {
  ad::Tape tape;
  const BoundParams bound = bind_params(tape, params, false);
  ForwardOptions opts;
  opts.force_lambda = force_lambda;
  const ForwardVars f = forward(tape, bound, cfg, in, opts);
  ForwardOutput out;
  out.id = in.id;
  out.residues = in.residues;
  out.v_cnn = f.v_cnn.value().data;
  out.v_bilstm = f.v_bilstm.value().data;
  const auto& lam = f.lambda.value().data;
  double s = 0.0;
  for (double v : lam) s += v;
  out.gate_lambda = s / static_cast<double>(lam.size());
  out.e_final = f.e_final.value().data;
  out.logits = f.logits.value().data;
  out.probs = f.probs.value().data;
  out.attn_cnn = f.attn_cnn.value().data;
  out.cnn_offset = (cfg.max_kernel() - 1) / 2;
  out.attn_bilstm = f.attn_bilstm.value().data;
  return out;
}

// ---- checkpoint ----

std::uint64_t crc64(std::span<const std::uint8_t> bytes, std::uint64_t crc) {
  static const auto table = [] {
    std::array<std::uint64_t, 256> t{};
    for (std::uint64_t i = 0; i < 256; ++i) {
      std::uint64_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? (c >> 1) ^ 0xC96C5795D7870F42ULL : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  crc = ~crc;
  for (std::uint8_t b : bytes) crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8);
  return ~crc;
}

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[pos + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

json config_to_json(const ModelConfig& c) {
  return json{{"embed_dim", c.embed_dim},       {"descriptor_dim", c.descriptor_dim},
              {"kernel_sizes", c.kernel_sizes}, {"conv_channels", c.conv_channels},
              {"lstm_hidden", c.lstm_hidden},   {"attention_dim", c.attention_dim},
              {"gate_hidden", c.gate_hidden},   {"per_dim_gate", c.per_dim_gate},
              {"f_match", c.f_match == FMatch::kLinear ? "linear" : "identity"},
              {"mlp_hidden", c.mlp_hidden},     {"class_count", c.class_count},
              {"dropout", c.dropout}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.descriptor_dim = j.at("descriptor_dim").get<std::size_t>();
  c.kernel_sizes = j.at("kernel_sizes").get<std::vector<std::size_t>>();
  c.conv_channels = j.at("conv_channels").get<std::size_t>();
  c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
  c.attention_dim = j.at("attention_dim").get<std::size_t>();
  c.gate_hidden = j.at("gate_hidden").get<std::size_t>();
  c.per_dim_gate = j.at("per_dim_gate").get<bool>();
  c.f_match = j.at("f_match").get<std::string>() == "identity" ? FMatch::kIdentity : FMatch::kLinear;
  c.mlp_hidden = j.at("mlp_hidden").get<std::vector<std::size_t>>();
  c.class_count = j.at("class_count").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  return c;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const ModelParams& params, const ModelConfig& cfg,
                                               const CheckpointMeta& meta) {
  json tensors = json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : params.tensors) {
    for (double v : t.data) {
      if (!std::isfinite(v)) throw ShapeError(kModule, "parameter '" + name + "' is not finite");
    }
    tensors.push_back({{"name", name}, {"rows", t.rows}, {"cols", t.cols}, {"offset", offset}});
    offset += t.size();
  }
  json metrics = json::object();
  for (const auto& [k, v] : meta.metrics) metrics[k] = format_g17(v);
  const json manifest{{"format_version", kCheckpointVersion},
                      {"config", config_to_json(cfg)},
                      {"meta",
                       {{"stage", meta.stage},
                        {"epoch", meta.epoch},
                        {"metrics", metrics},
                        {"attributes", meta.attributes}}},
                      {"tensors", tensors}};
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.push_back(static_cast<std::uint8_t>('0' + kCheckpointVersion));
  put_le(out, kCheckpointVersion, 4);
  put_le(out, text.size(), 8);
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset * 8 + 8);
  for (const auto& [_, t] : params.tensors) {
    for (double v : t.data) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  }
  put_le(out, crc64(out), 8);
  return out;
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  const std::size_t header = kMagic.size() + 1 + 4 + 8;
  if (bytes.size() < header + 8 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError(kModule, "not a checkpoint file (bad magic)");
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, kMagic.size() + 1, 4));
  if (version != kCheckpointVersion) {
    throw VersionError(kModule, "checkpoint format version " + std::to_string(version) +
                                    " cannot be read by this reader (format version " +
                                    std::to_string(kCheckpointVersion) + ")");
  }
  const std::size_t body = bytes.size() - 8;
  if (crc64(bytes.first(body)) != get_le(bytes, body, 8)) {
    throw CorruptionError(kModule, "checkpoint checksum mismatch");
  }
  const std::uint64_t mlen = get_le(bytes, kMagic.size() + 5, 8);
  if (mlen > body - header) throw CorruptionError(kModule, "manifest length exceeds file size");
  const auto mbytes = bytes.subspan(header, mlen);
  Checkpoint ck;
  std::size_t payload_pos = header + mlen;
  try {
    const json m = json::parse(mbytes.begin(), mbytes.end());
    ck.config = config_from_json(m.at("config"));
    const json& meta = m.at("meta");
    ck.meta.stage = meta.at("stage").get<int>();
    ck.meta.epoch = meta.at("epoch").get<int>();
    for (const auto& [k, v] : meta.at("metrics").items()) ck.meta.metrics[k] = std::stod(v.get<std::string>());
    ck.meta.attributes = meta.at("attributes").get<std::map<std::string, std::string>>();
    ck.meta.format_version = m.at("format_version").get<std::uint32_t>();
    for (const json& t : m.at("tensors")) {
      const auto rows = t.at("rows").get<std::size_t>();
      const auto cols = t.at("cols").get<std::size_t>();
      const auto off = t.at("offset").get<std::size_t>();
      const std::size_t start = payload_pos + off * 8;
      if (start + rows * cols * 8 > body) throw CorruptionError(kModule, "tensor payload out of range");
      Tensor tensor(rows, cols);
      for (std::size_t i = 0; i < tensor.size(); ++i) tensor.data[i] = std::bit_cast<double>(get_le(bytes, start + i * 8, 8));
      ck.params.tensors.emplace(t.at("name").get<std::string>(), std::move(tensor));
    }
  } catch (const json::exception& e) {
    throw FormatError(kModule, std::string("malformed checkpoint manifest: ") + e.what());
  }
  ck.config.validate();
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const ModelConfig& cfg,
                     const CheckpointMeta& meta) {
  const auto bytes = serialize_checkpoint(params, cfg, meta);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(kModule, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(kModule, "write to '" + path.string() + "' failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

// ---- interpretability ----

std::vector<double> minmax_normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

void export_interpretability(const std::vector<ForwardOutput>& outputs, const std::filesystem::path& dir) {
  if (outputs.empty()) throw EmptyError(kModule, "no predictions to export");
  std::filesystem::create_directories(dir);
  std::ofstream gate(dir / "gate_lambda.csv");
  std::ofstream attn(dir / "attention.csv");
  if (!gate || !attn) throw IoError(kModule, "cannot write interpretability files in '" + dir.string() + "'");
  gate << "id,lambda,label\n";
  attn << "id,position,residue,attn_cnn,attn_bilstm\n";
  for (const auto& o : outputs) {
    gate << o.id << ',' << format_g9(o.gate_lambda) << ',' << (o.label ? std::to_string(*o.label) : "") << '\n';
    const auto cnn = minmax_normalize(o.attn_cnn);
    const auto rnn = minmax_normalize(o.attn_bilstm);
    for (std::size_t t = 0; t < rnn.size(); ++t) {
      attn << o.id << ',' << (t + 1) << ',' << (t < o.residues.size() ? o.residues[t] : '?') << ',';
      if (t >= o.cnn_offset && t - o.cnn_offset < cnn.size()) attn << format_g9(cnn[t - o.cnn_offset]);
      attn << ',' << format_g9(rnn[t]) << '\n';
    }
  }
}

}  // namespace avp
