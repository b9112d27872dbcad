#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace avp {

// Canonical residue order used by every table and descriptor layout.
inline constexpr std::string_view kAlphabet = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr std::size_t kAlphabetSize = 20;

// Index of an uppercase residue in kAlphabet, or nullopt.
constexpr std::optional<std::size_t> residue_index(char c) noexcept {
  const auto pos = kAlphabet.find(c);
  if (pos == std::string_view::npos) return std::nullopt;
  return pos;
}

// Five physicochemical groups: aliphatic, aromatic, positive, negative,
// uncharged. They partition the alphabet.
inline constexpr std::size_t kGroupCount = 5;
inline constexpr std::array<std::string_view, kGroupCount> kGroupMembers = {
    "GAVLMI", "FYW", "KRH", "DE", "STCPNQ"};
inline constexpr std::array<std::string_view, kGroupCount> kGroupNames = {
    "aliphatic", "aromatic", "positive", "negative", "uncharged"};

constexpr std::size_t group_of(std::size_t residue) noexcept {
  const char c = kAlphabet[residue];
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    if (kGroupMembers[g].find(c) != std::string_view::npos) return g;
  }
  return kGroupCount;  // unreachable for valid residues
}

namespace tables {

// All tables are indexed in kAlphabet order. Sources live in core/data/.
extern const std::array<std::array<int, 20>, 20> kBlosum62;
extern const std::array<std::array<double, 20>, 20> kSchneiderWrede;
extern const std::array<std::array<double, 20>, 20> kGrantham;
extern const std::array<std::array<double, 5>, 20> kZScale;
// hydrophobicity, hydrophilicity, side-chain mass (raw, unnormalized)
extern const std::array<std::array<double, 3>, 20> kPaacProperties;
extern const std::array<int, 20> kCodonCounts;

}  // namespace tables
}  // namespace avp
