#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avp/seqio.hpp"

namespace avp {

// Per-residue embedding rows, row-major L x dim, stored as float32 to match
// the on-disk format.
struct EmbeddingMatrix {
  std::string seq_id;
  std::size_t length = 0;
  std::size_t dim = 0;
  std::vector<float> values;

  std::span<const float> row(std::size_t t) const {
    return std::span<const float>(values).subspan(t * dim, dim);
  }
  bool operator==(const EmbeddingMatrix&) const = default;
};

using EmbeddingMap = std::map<std::string, EmbeddingMatrix>;

// PEMB1 layout (little-endian): "PEMB1", u32 record count, u32 dim, then per
// record u32 id length, id bytes, u32 sequence length, length * dim float32.
EmbeddingMap load_embeddings(const std::filesystem::path& path);
EmbeddingMap parse_embeddings(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_embeddings(const EmbeddingMap& records);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMap& records);

// Deterministic stand-in for language-model embeddings. Each residue has a
// base vector of standard normals drawn from PortableRng(seed) in alphabet
// order (dim draws per residue); row p adds the sinusoidal position code
// sin(p / 10000^(2k/dim)) at column 2k and the matching cosine at 2k + 1.
EmbeddingMatrix fallback_embed(const PeptideSequence& seq, std::size_t dim, std::uint64_t seed);

// A source of per-residue embeddings with a fixed dimension.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dim() const noexcept = 0;
  virtual EmbeddingMatrix embed(const PeptideSequence& seq) const = 0;

  // Embedding for a sequence derived from `parent` by augmentation, where
  // child residue t descends from parent residue source_index[t]. The base
  // implementation embeds the child directly.
  virtual EmbeddingMatrix embed_derived(const PeptideSequence& parent, const PeptideSequence& child,
                                        std::span<const std::size_t> source_index) const;

  virtual std::string describe() const = 0;
};

class FallbackEmbeddingProvider final : public EmbeddingProvider {
 public:
  FallbackEmbeddingProvider(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const noexcept override { return dim_; }
  EmbeddingMatrix embed(const PeptideSequence& seq) const override;
  std::string describe() const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  std::vector<double> base_;  // 20 x dim
};

// Serves precomputed embeddings by sequence id. Derived sequences gather the
// parent's rows through the source index, since the file cannot contain them.
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit FileEmbeddingProvider(EmbeddingMap records);

  std::size_t dim() const noexcept override { return dim_; }
  EmbeddingMatrix embed(const PeptideSequence& seq) const override;
  EmbeddingMatrix embed_derived(const PeptideSequence& parent, const PeptideSequence& child,
                                std::span<const std::size_t> source_index) const override;
  std::string describe() const override;

 private:
  EmbeddingMap records_;
  std::size_t dim_ = 0;
};

// "fallback:dim=64:seed=7" or "pemb1:<path>". Throws ConfigError on a
// malformed spec.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(std::string_view spec);

}  // namespace avp
