#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avp/descriptors.hpp"
#include "avp/diff.hpp"
#include "avp/embed.hpp"
#include "avp/rng.hpp"

namespace avp {

enum class FMatch { kLinear, kIdentity };

struct ModelConfig {
  std::size_t embed_dim = 64;          // D_e
  std::size_t descriptor_dim = 3270;   // D_s
  std::vector<std::size_t> kernel_sizes{3, 5};
  std::size_t conv_channels = 64;
  std::size_t lstm_hidden = 64;        // D_h
  std::size_t attention_dim = 64;
  std::size_t gate_hidden = 32;
  bool per_dim_gate = false;
  FMatch f_match = FMatch::kLinear;
  std::vector<std::size_t> mlp_hidden{128, 64};
  std::size_t class_count = 2;
  double dropout = 0.3;

  void validate() const;
  std::size_t input_dim() const { return embed_dim + descriptor_dim; }
  std::size_t max_kernel() const;
  bool operator==(const ModelConfig&) const = default;
};

// Every trainable tensor by name. Classifier tensors are the ones whose name
// starts with "mlp.".
struct ModelParams {
  std::map<std::string, ad::Tensor> tensors;

  const ad::Tensor& at(const std::string& name) const;
  ad::Tensor& at(const std::string& name);
  std::size_t scalar_count() const;
  bool operator==(const ModelParams&) const = default;
};

bool is_classifier_param(const std::string& name);

// Glorot-uniform dense and conv weights, zero biases, LSTM forget bias +1,
// log_temperature = ln(temperature_init).
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed, double temperature_init = 0.07);
// Fresh classifier tensors only (used when transferring a feature extractor).
void reinit_classifier(ModelParams& params, const ModelConfig& cfg, std::uint64_t seed);

// Model input for one sequence: per-residue embedding rows plus the global
// descriptor vector, kept apart so the tiling is never materialized.
struct FeatureBundle {
  std::string id;
  std::string residues;
  ad::Tensor embedding;  // L x D_e
  ad::Tensor global;     // 1 x D_s
};

FeatureBundle make_bundle(const PeptideSequence& seq, const EmbeddingMatrix& emb, const FeatureVector& feat);

// Explicitly tiled L x (D_e + D_s) input: row t = embedding row t ++ global.
ad::Tensor build_input(const EmbeddingMatrix& emb, const FeatureVector& feat);
ad::Tensor build_input(const FeatureBundle& bundle);

// Parameters placed on a tape as leaves.
struct BoundParams {
  std::map<std::string, ad::Var> vars;
  ad::Var operator[](const std::string& name) const;
};

BoundParams bind_params(ad::Tape& tape, const ModelParams& params, bool requires_grad = true);
// Copies gradients of bound leaves into a tensor map (zeros where none flowed).
std::map<std::string, ad::Tensor> collect_grads(const BoundParams& bound);

struct GateOutput {
  ad::Var e_final;
  ad::Var lambda;  // 1 x 1, or 1 x 2D_h with the per-dimension gate
};

// E_final = lambda * f_match(v_cnn) + (1 - lambda) * v_bilstm with
// lambda = sigmoid(dense(relu(dense(v_cnn ++ v_bilstm)))).
GateOutput gated_fuse(ad::Var v_cnn, ad::Var v_bilstm, const BoundParams& p, const ModelConfig& cfg,
                      std::optional<double> force_lambda = std::nullopt);

struct ForwardOptions {
  bool training = false;
  PortableRng* dropout_rng = nullptr;  // required when training with dropout > 0
  std::optional<double> force_lambda;  // branch-ablation hook
};

struct ForwardVars {
  ad::Var v_cnn;
  ad::Var v_bilstm;
  ad::Var lambda;
  ad::Var e_final;
  ad::Var logits;
  ad::Var probs;
  ad::Var attn_cnn;     // 1 x (L - max_kernel + 1)
  ad::Var attn_bilstm;  // 1 x L
};

// Forward pass on a tape. `x` is L x Dx and `g` (if given) is 1 x Dg with
// Dx + Dg = cfg.input_dim(); passing the tiled input with no `g` is the same
// function as passing the embedding rows with the global vector as `g`.
ForwardVars forward(ad::Tape& tape, const BoundParams& p, const ModelConfig& cfg, ad::Var x,
                    std::optional<ad::Var> g, const ForwardOptions& opts = {});
ForwardVars forward(ad::Tape& tape, const BoundParams& p, const ModelConfig& cfg, const FeatureBundle& in,
                    const ForwardOptions& opts = {});

struct ForwardOutput {
  std::string id;
  std::string residues;
  std::vector<double> v_cnn;
  std::vector<double> v_bilstm;
  double gate_lambda = 0.0;  // mean over dimensions for the per-dimension gate
  std::vector<double> e_final;
  std::vector<double> logits;
  std::vector<double> probs;
  // attn_cnn[j] weights the kernel window centred on residue j + cnn_offset.
  std::vector<double> attn_cnn;
  std::size_t cnn_offset = 0;
  std::vector<double> attn_bilstm;
  std::optional<int> label;
};

// Inference-mode forward without gradient tracking.
ForwardOutput predict(const ModelParams& params, const ModelConfig& cfg, const FeatureBundle& in,
                      std::optional<double> force_lambda = std::nullopt);

// Checkpoint file: "AVPCKPT2", u32 format version, u64 manifest length,
// UTF-8 JSON manifest, float64 little-endian payload, trailing CRC-64/XZ of
// everything before it.
inline constexpr std::uint32_t kCheckpointVersion = 2;

struct CheckpointMeta {
  int stage = 1;
  int epoch = 0;
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> attributes;
  std::uint32_t format_version = kCheckpointVersion;
  bool operator==(const CheckpointMeta&) const = default;
};

struct Checkpoint {
  ModelParams params;
  ModelConfig config;
  CheckpointMeta meta;
};

std::uint64_t crc64(std::span<const std::uint8_t> bytes, std::uint64_t crc = 0);

std::vector<std::uint8_t> serialize_checkpoint(const ModelParams& params, const ModelConfig& cfg,
                                               const CheckpointMeta& meta);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const ModelConfig& cfg,
                     const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Min-max scaling to [0, 1]; a constant profile maps to all zeros.
std::vector<double> minmax_normalize(std::span<const double> values);

// Writes gate_lambda.csv (id,lambda,label) and attention.csv
// (id,position,residue,attn_cnn,attn_bilstm) into `dir`. Positions are
// 1-based; attn_cnn is empty for residues no kernel window is centred on.
void export_interpretability(const std::vector<ForwardOutput>& outputs, const std::filesystem::path& dir);

}  // namespace avp
