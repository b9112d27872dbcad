#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace avp {

struct LengthBounds {
  std::size_t min_length = 5;
  std::size_t max_length = 100;

  void validate() const;
};

struct PeptideSequence {
  std::string id;
  std::string residues;
  std::optional<int> label;

  std::size_t length() const noexcept { return residues.size(); }
  bool operator==(const PeptideSequence&) const = default;
};

// Checks the alphabet and length invariants. Throws ValidationError /
// LengthError naming the record.
void validate_sequence(const PeptideSequence& seq, const LengthBounds& bounds);

struct LabeledDataset {
  std::vector<PeptideSequence> items;
  std::size_t class_count = 2;
  std::vector<std::string> class_names;

  // Every label present and < class_count, at least one item per class.
  void validate() const;
  std::vector<std::size_t> class_counts() const;
};

// Parses FASTA text. Residues are uppercased and wrapped lines joined.
// Blank lines are ignored; text before the first header is a FormatError.
std::vector<PeptideSequence> parse_fasta(std::string_view text, const LengthBounds& bounds = {});
std::vector<PeptideSequence> read_fasta_file(const std::filesystem::path& path,
                                             const LengthBounds& bounds = {});

// One header line per record, residues on a single line.
std::string serialize_fasta(const std::vector<PeptideSequence>& seqs);
void write_fasta_file(const std::filesystem::path& path, const std::vector<PeptideSequence>& seqs);

// Attaches labels from a comma-separated "id,label" table. Every id in the
// table must exist in `seqs` and every sequence must receive a label.
// class_count defaults to max(label) + 1 (at least 2).
LabeledDataset load_labels(std::string_view table, std::vector<PeptideSequence> seqs,
                           std::optional<std::size_t> class_count = std::nullopt);
LabeledDataset load_labels_file(const std::filesystem::path& path,
                                std::vector<PeptideSequence> seqs,
                                std::optional<std::size_t> class_count = std::nullopt);

// Per-class shuffle with PortableRng(seed), then the first
// floor(ratio * n_c) items of each class (clamped to [1, n_c - 1]) go to the
// train side. Classes are shuffled in label order from one shared stream.
// Item order within each side follows the original dataset order.
std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& ds, double ratio,
                                                           std::uint64_t seed);

}  // namespace avp
