#include "avp/seqio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "avp/errors.hpp"
#include "avp/rng.hpp"
#include "avp/tables.hpp"

namespace avp {

namespace {

constexpr const char* kModule = "seqio";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void LengthBounds::validate() const {
  if (min_length < 1 || min_length > max_length) {
    throw ConfigError(kModule, "invalid length bounds [" + std::to_string(min_length) + ", " +
                                   std::to_string(max_length) + "]");
  }
}

void validate_sequence(const PeptideSequence& seq, const LengthBounds& bounds) {
  if (seq.id.empty()) throw ConfigError(kModule, "sequence with empty identifier");
  for (char c : seq.residues) {
    if (!residue_index(c)) throw ValidationError(kModule, seq.id, c);
  }
  if (seq.length() < bounds.min_length || seq.length() > bounds.max_length) {
    throw LengthError(kModule, "record '" + seq.id + "' has length " + std::to_string(seq.length()) +
                                   " outside [" + std::to_string(bounds.min_length) + ", " +
                                   std::to_string(bounds.max_length) + "]");
  }
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(class_count, 0);
  for (const auto& item : items) {
    if (item.label && *item.label >= 0 && static_cast<std::size_t>(*item.label) < class_count) {
      ++counts[static_cast<std::size_t>(*item.label)];
    }
  }
  return counts;
}

void LabeledDataset::validate() const {
  if (class_count < 2) throw ConfigError(kModule, "class_count must be at least 2");
  for (const auto& item : items) {
    if (!item.label) throw LabelError(kModule, "record '" + item.id + "' has no label");
    if (*item.label < 0 || static_cast<std::size_t>(*item.label) >= class_count) {
      throw LabelError(kModule, "record '" + item.id + "' has label " + std::to_string(*item.label) +
                                    " outside [0, " + std::to_string(class_count) + ")");
    }
  }
  const auto counts = class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw StratifyError(kModule, "class " + std::to_string(c) + " has no items");
  }
}

std::vector<PeptideSequence> parse_fasta(std::string_view text, const LengthBounds& bounds) {
  std::vector<PeptideSequence> out;
  std::unordered_set<std::string> seen;
  bool in_record = false;

  auto finish = [&] {
    if (!in_record) return;
    validate_sequence(out.back(), bounds);
  };

  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '>') {
      finish();
      std::string_view header = trim(line.substr(1));
      // The id is the first whitespace-delimited token of the header.
      const auto ws = header.find_first_of(" \t");
      std::string id(header.substr(0, ws));
      if (id.empty()) {
        throw FormatError(kModule, "empty FASTA header at line " + std::to_string(line_no));
      }
      if (!seen.insert(id).second) throw DuplicateIdError(kModule, "duplicate id '" + id + "'");
      out.push_back(PeptideSequence{std::move(id), {}, std::nullopt});
      in_record = true;
      continue;
    }
    if (!in_record) {
      throw FormatError(kModule, "sequence data before first header at line " + std::to_string(line_no));
    }
    auto& residues = out.back().residues;
    for (char c : line) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      residues.push_back(c);
    }
  }
  finish();
  return out;
}

std::vector<PeptideSequence> read_fasta_file(const std::filesystem::path& path,
                                             const LengthBounds& bounds) {
  return parse_fasta(read_text(path), bounds);
}

std::string serialize_fasta(const std::vector<PeptideSequence>& seqs) {
  std::string out;
  for (const auto& s : seqs) {
    out += '>';
    out += s.id;
    out += '\n';
    out += s.residues;
    out += '\n';
  }
  return out;
}

void write_fasta_file(const std::filesystem::path& path, const std::vector<PeptideSequence>& seqs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(kModule, "cannot write '" + path.string() + "'");
  out << serialize_fasta(seqs);
}

LabeledDataset load_labels(std::string_view table, std::vector<PeptideSequence> seqs,
                           std::optional<std::size_t> class_count) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < seqs.size(); ++i) index.emplace(seqs[i].id, i);

  std::vector<bool> assigned(seqs.size(), false);
  int max_label = -1;
  std::size_t line_no = 0;
  while (!table.empty()) {
    const auto nl = table.find('\n');
    std::string_view line = trim(table.substr(0, nl));
    table = nl == std::string_view::npos ? std::string_view{} : table.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw FormatError(kModule, "label table line " + std::to_string(line_no) + " is not 'id,label'");
    }
    const std::string id(trim(line.substr(0, comma)));
    const std::string_view label_text = trim(line.substr(comma + 1));
    int label = 0;
    const auto [ptr, ec] = std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
    if (ec != std::errc{} || ptr != label_text.data() + label_text.size() || label < 0) {
      // A header row ("id,label") is tolerated on the first line only.
      if (line_no == 1 && label_text == "label") continue;
      throw FormatError(kModule, "label table line " + std::to_string(line_no) + " has invalid label '" +
                                     std::string(label_text) + "'");
    }
    const auto it = index.find(id);
    if (it == index.end()) throw LabelError(kModule, "label for unknown id '" + id + "'");
    seqs[it->second].label = label;
    assigned[it->second] = true;
    max_label = std::max(max_label, label);
  }

  std::string missing;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (!assigned[i]) {
      if (!missing.empty()) missing += ", ";
      missing += seqs[i].id;
    }
  }
  if (!missing.empty()) throw LabelError(kModule, "missing labels for: " + missing);

  LabeledDataset ds;
  ds.items = std::move(seqs);
  ds.class_count = class_count.value_or(std::max<std::size_t>(2, static_cast<std::size_t>(max_label + 1)));
  for (std::size_t c = 0; c < ds.class_count; ++c) ds.class_names.push_back("class" + std::to_string(c));
  for (const auto& item : ds.items) {
    if (static_cast<std::size_t>(*item.label) >= ds.class_count) {
      throw LabelError(kModule, "record '" + item.id + "' has label " + std::to_string(*item.label) +
                                    " outside [0, " + std::to_string(ds.class_count) + ")");
    }
  }
  return ds;
}

LabeledDataset load_labels_file(const std::filesystem::path& path, std::vector<PeptideSequence> seqs,
                                std::optional<std::size_t> class_count) {
  return load_labels(read_text(path), std::move(seqs), class_count);
}

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& ds, double ratio,
                                                           std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ConfigError(kModule, "split ratio must lie in (0, 1)");
  }
  if (ds.class_count < 2) throw ConfigError(kModule, "class_count must be at least 2");
  std::vector<std::vector<std::size_t>> by_class(ds.class_count);
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    const auto& label = ds.items[i].label;
    if (!label || *label < 0 || static_cast<std::size_t>(*label) >= ds.class_count) {
      throw LabelError(kModule, "record '" + ds.items[i].id + "' lacks a valid label");
    }
    by_class[static_cast<std::size_t>(*label)].push_back(i);
  }

  PortableRng rng(seed);
  std::vector<bool> to_train(ds.items.size(), false);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.size() < 2) {
      throw StratifyError(kModule, "class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                                       " item(s); at least 2 are needed to stratify");
    }
    rng.shuffle(std::span<std::size_t>(members));
    auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(members.size()) + 1e-9));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    for (std::size_t k = 0; k < n_train; ++k) to_train[members[k]] = true;
  }

  LabeledDataset train, test;
  train.class_count = test.class_count = ds.class_count;
  train.class_names = test.class_names = ds.class_names;
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    (to_train[i] ? train : test).items.push_back(ds.items[i]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace avp
