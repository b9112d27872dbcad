#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace avp {

enum class DescriptorKind {
  kAAC,
  kDPC,
  kCKSAAGP,
  kDistancePair,
  kPAAC,
  kQSOrder,
  kZScale,
  kGTPC,
  kBinary,
  kDDE,
};

// Fixed concatenation order of the global feature vector.
inline constexpr std::array<DescriptorKind, 10> kDescriptorLayout = {
    DescriptorKind::kAAC,  DescriptorKind::kDPC,     DescriptorKind::kCKSAAGP, DescriptorKind::kDistancePair,
    DescriptorKind::kPAAC, DescriptorKind::kQSOrder, DescriptorKind::kZScale,  DescriptorKind::kGTPC,
    DescriptorKind::kBinary, DescriptorKind::kDDE};

std::string_view descriptor_name(DescriptorKind kind) noexcept;
// Throws ConfigError for unknown names.
DescriptorKind parse_descriptor_kind(std::string_view name);

struct DescriptorConfig {
  int cksaagp_max_gap = 5;
  int distpair_max_dist = 3;
  int paac_lambda = 4;
  double paac_weight = 0.05;
  int qso_nlag = 3;
  double qso_weight = 0.1;
  int binary_max_len = 100;

  // Non-negative gaps, lags below `min_length`, positive weights.
  void validate(std::size_t min_length = 5) const;
};

struct FeatureSegment {
  DescriptorKind kind;
  std::size_t offset;
  std::size_t length;
};

struct FeatureVector {
  std::vector<double> values;
  std::vector<FeatureSegment> layout;

  std::span<const double> segment(DescriptorKind kind) const;
};

std::size_t descriptor_dim(DescriptorKind kind, const DescriptorConfig& cfg);
std::size_t descriptor_dim(std::string_view kind, const DescriptorConfig& cfg);
std::size_t feature_dim(const DescriptorConfig& cfg);

// Residues must already be validated against the alphabet.
//   AAC         20   residue frequencies
//   DPC         400  adjacent-pair frequencies
//   CKSAAGP     25 per gap g = 0..max_gap, group pairs (s[p], s[p+g+1])
//   DistancePair 25 per distance d = 0..max_dist, group pairs (s[p], s[p+d])
//   PAAC        20 + lambda, Chou pseudo composition on normalized properties
//   QSOrder     40 + 2 nlag, Schneider-Wrede then Grantham quasi-order
//   ZScale      5    mean z-scale over residues
//   GTPC        125  group tripeptide frequencies
//   Binary      20 * max_len one-hot rows, zero padded
//   DDE         400  (Dc - Tm) / sqrt(Tv) with codon-based expectations
// Gap / distance blocks with no counted pair are all zero. Throws
// LengthError when a PAAC / QSOrder lag reaches the sequence length or the
// sequence exceeds binary_max_len.
std::vector<double> compute_descriptor(DescriptorKind kind, std::string_view residues,
                                       const DescriptorConfig& cfg);
std::vector<double> compute_descriptor(std::string_view kind, std::string_view residues,
                                       const DescriptorConfig& cfg);

FeatureVector featurize(std::string_view residues, const DescriptorConfig& cfg);

// One column name per feature component, e.g. "AAC.A", "CKSAAGP.gap0.g1g2".
std::vector<std::string> feature_column_names(const DescriptorConfig& cfg);

// CSV with header "id,<columns...>", one row per sequence, %.9g floats, LF.
void write_feature_csv(std::ostream& out, std::span<const std::string> ids,
                       std::span<const FeatureVector> features, const DescriptorConfig& cfg);

}  // namespace avp
