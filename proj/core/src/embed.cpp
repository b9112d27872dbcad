#include "avp/embed.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "avp/errors.hpp"
#include "avp/rng.hpp"
#include "avp/tables.hpp"

namespace avp {

namespace {

constexpr const char* kModule = "embed";
constexpr std::string_view kMagic = "PEMB1";

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError(kModule, "truncated PEMB1 payload");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    const auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(kModule, "invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

EmbeddingMap parse_embeddings(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw FormatError(kModule, "bad magic; expected PEMB1");
  }
  const std::uint32_t count = r.u32();
  const std::uint32_t dim = r.u32();
  EmbeddingMap out;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t id_len = r.u32();
    const auto id_bytes = r.take(id_len);
    std::string id(id_bytes.begin(), id_bytes.end());
    const std::uint32_t len = r.u32();
    EmbeddingMatrix m;
    m.seq_id = id;
    m.length = len;
    m.dim = dim;
    const std::size_t n = static_cast<std::size_t>(len) * dim;
    if (n > bytes.size()) throw FormatError(kModule, "truncated PEMB1 payload");
    m.values.resize(n);
    for (auto& v : m.values) {
      v = r.f32();
      if (!std::isfinite(v)) throw FormatError(kModule, "non-finite value in record '" + id + "'");
    }
    if (!out.emplace(id, std::move(m)).second) {
      throw DuplicateIdError(kModule, "duplicate embedding id '" + id + "'");
    }
  }
  if (!r.done()) throw FormatError(kModule, "trailing bytes after last PEMB1 record");
  return out;
}

EmbeddingMap load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_embeddings(bytes);
}

std::vector<std::uint8_t> serialize_embeddings(const EmbeddingMap& records) {
  std::size_t dim = records.empty() ? 0 : records.begin()->second.dim;
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put_u32(out, static_cast<std::uint32_t>(records.size()));
  put_u32(out, static_cast<std::uint32_t>(dim));
  for (const auto& [id, m] : records) {
    if (m.dim != dim) throw ShapeError(kModule, "record '" + id + "' has a different dimension");
    if (m.values.size() != m.length * m.dim) throw ShapeError(kModule, "record '" + id + "' is inconsistent");
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.insert(out.end(), id.begin(), id.end());
    put_u32(out, static_cast<std::uint32_t>(m.length));
    for (float v : m.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMap& records) {
  const auto bytes = serialize_embeddings(records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(kModule, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

namespace {

std::vector<double> residue_base_vectors(std::size_t dim, std::uint64_t seed) {
  PortableRng rng(seed);
  std::vector<double> base(20 * dim);
  for (auto& v : base) v = rng.gaussian();
  return base;
}

EmbeddingMatrix compose_fallback(const PeptideSequence& seq, std::size_t dim, const std::vector<double>& base) {
  EmbeddingMatrix m;
  m.seq_id = seq.id;
  m.length = seq.residues.size();
  m.dim = dim;
  m.values.resize(m.length * dim);
  for (std::size_t p = 0; p < m.length; ++p) {
    const auto r = residue_index(seq.residues[p]);
    if (!r) throw ValidationError(kModule, seq.id, seq.residues[p]);
    for (std::size_t c = 0; c < dim; ++c) {
      const std::size_t k2 = c - (c % 2);
      const double angle =
          static_cast<double>(p) / std::pow(10000.0, static_cast<double>(k2) / static_cast<double>(dim));
      const double pos = (c % 2 == 0) ? std::sin(angle) : std::cos(angle);
      m.values[p * dim + c] = static_cast<float>(base[*r * dim + c] + pos);
    }
  }
  return m;
}

}  // namespace

EmbeddingMatrix fallback_embed(const PeptideSequence& seq, std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw ConfigError(kModule, "embedding dim must be at least 1");
  return compose_fallback(seq, dim, residue_base_vectors(dim, seed));
}

EmbeddingMatrix EmbeddingProvider::embed_derived(const PeptideSequence&, const PeptideSequence& child,
                                                 std::span<const std::size_t>) const {
  return embed(child);
}

FallbackEmbeddingProvider::FallbackEmbeddingProvider(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim < 1) throw ConfigError(kModule, "embedding dim must be at least 1");
  base_ = residue_base_vectors(dim, seed);
}

EmbeddingMatrix FallbackEmbeddingProvider::embed(const PeptideSequence& seq) const {
  return compose_fallback(seq, dim_, base_);
}

std::string FallbackEmbeddingProvider::describe() const {
  return "fallback:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

FileEmbeddingProvider::FileEmbeddingProvider(EmbeddingMap records) : records_(std::move(records)) {
  if (records_.empty()) throw FormatError(kModule, "embedding file has no records");
  dim_ = records_.begin()->second.dim;
}

EmbeddingMatrix FileEmbeddingProvider::embed(const PeptideSequence& seq) const {
  const auto it = records_.find(seq.id);
  if (it == records_.end()) throw FormatError(kModule, "no embedding for id '" + seq.id + "'");
  if (it->second.length != seq.residues.size()) {
    throw ShapeError(kModule, "embedding for '" + seq.id + "' has " + std::to_string(it->second.length) +
                                  " rows but the sequence has " + std::to_string(seq.residues.size()) +
                                  " residues");
  }
  return it->second;
}

EmbeddingMatrix FileEmbeddingProvider::embed_derived(const PeptideSequence& parent, const PeptideSequence& child,
                                                     std::span<const std::size_t> source_index) const {
  const auto base = embed(parent);
  if (source_index.size() != child.residues.size()) {
    throw ShapeError(kModule, "source index does not match derived sequence length");
  }
  EmbeddingMatrix m;
  m.seq_id = child.id;
  m.length = child.residues.size();
  m.dim = dim_;
  m.values.reserve(m.length * dim_);
  for (auto src : source_index) {
    if (src >= base.length) throw ShapeError(kModule, "source index out of range");
    const auto row = base.row(src);
    m.values.insert(m.values.end(), row.begin(), row.end());
  }
  return m;
}

std::string FileEmbeddingProvider::describe() const {
  return "pemb1:" + std::to_string(records_.size()) + " records, dim=" + std::to_string(dim_);
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(std::string_view spec) {
  if (spec.starts_with("pemb1:")) {
    return std::make_unique<FileEmbeddingProvider>(load_embeddings(std::string(spec.substr(6))));
  }
  if (spec.starts_with("fallback")) {
    std::size_t dim = 64;
    std::uint64_t seed = 0;
    std::string_view rest = spec.substr(8);
    while (!rest.empty()) {
      if (rest.front() != ':') throw ConfigError(kModule, "malformed embedder spec '" + std::string(spec) + "'");
      rest.remove_prefix(1);
      const auto next = rest.find(':');
      const std::string_view field = rest.substr(0, next);
      rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next);
      const auto eq = field.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(kModule, "malformed embedder field '" + std::string(field) + "'");
      }
      const auto key = field.substr(0, eq);
      const auto value = field.substr(eq + 1);
      if (key == "dim") {
        dim = static_cast<std::size_t>(parse_u64(value, "dim"));
      } else if (key == "seed") {
        seed = parse_u64(value, "seed");
      } else {
        throw ConfigError(kModule, "unknown embedder field '" + std::string(key) + "'");
      }
    }
    return std::make_unique<FallbackEmbeddingProvider>(dim, seed);
  }
  throw ConfigError(kModule, "unknown embedder '" + std::string(spec) +
                                 "'; expected fallback:dim=N:seed=S or pemb1:<path>");
}

}  // namespace avp
