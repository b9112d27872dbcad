#include "avp/descriptors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "avp/errors.hpp"
#include "avp/format.hpp"
#include "avp/tables.hpp"

namespace avp {

namespace {

constexpr const char* kModule = "descriptors";

std::vector<std::size_t> to_indices(std::string_view residues) {
  std::vector<std::size_t> idx;
  idx.reserve(residues.size());
  for (char c : residues) {
    const auto i = residue_index(c);
    if (!i) throw ValidationError(kModule, "<sequence>", c);
    idx.push_back(*i);
  }
  return idx;
}

void normalize(std::span<double> v, double total) {
  if (total <= 0.0) return;
  for (auto& x : v) x /= total;
}

std::vector<double> aac(const std::vector<std::size_t>& s) {
  std::vector<double> out(20, 0.0);
  for (auto r : s) out[r] += 1.0;
  normalize(out, static_cast<double>(s.size()));
  return out;
}

std::vector<double> dpc(const std::vector<std::size_t>& s) {
  std::vector<double> out(400, 0.0);
  for (std::size_t p = 0; p + 1 < s.size(); ++p) out[s[p] * 20 + s[p + 1]] += 1.0;
  normalize(out, static_cast<double>(s.size() > 0 ? s.size() - 1 : 0));
  return out;
}

// Group-pair frequencies at position offsets first..last (inclusive); block k
// counts pairs (s[p], s[p + first + k]).
std::vector<double> group_pairs(const std::vector<std::size_t>& s, std::size_t first, std::size_t blocks) {
  std::vector<double> out(25 * blocks, 0.0);
  for (std::size_t k = 0; k < blocks; ++k) {
    const std::size_t offset = first + k;
    if (offset >= s.size()) continue;
    auto block = std::span<double>(out).subspan(25 * k, 25);
    const std::size_t pairs = s.size() - offset;
    for (std::size_t p = 0; p < pairs; ++p) {
      block[group_of(s[p]) * 5 + group_of(s[p + offset])] += 1.0;
    }
    normalize(block, static_cast<double>(pairs));
  }
  return out;
}

const std::array<std::array<double, 20>, 3>& paac_normalized_properties() {
  static const auto table = [] {
    std::array<std::array<double, 20>, 3> t{};
    for (std::size_t k = 0; k < 3; ++k) {
      double mean = 0.0;
      for (std::size_t a = 0; a < 20; ++a) mean += tables::kPaacProperties[a][k];
      mean /= 20.0;
      double var = 0.0;
      for (std::size_t a = 0; a < 20; ++a) {
        const double d = tables::kPaacProperties[a][k] - mean;
        var += d * d;
      }
      const double sd = std::sqrt(var / 20.0);
      for (std::size_t a = 0; a < 20; ++a) t[k][a] = (tables::kPaacProperties[a][k] - mean) / sd;
    }
    return t;
  }();
  return table;
}

std::vector<double> paac(const std::vector<std::size_t>& s, const DescriptorConfig& cfg) {
  const auto lambda = static_cast<std::size_t>(cfg.paac_lambda);
  if (lambda >= s.size()) {
    throw LengthError(kModule, "PAAC lambda " + std::to_string(lambda) + " must be below sequence length " +
                                   std::to_string(s.size()));
  }
  const auto& props = paac_normalized_properties();
  std::vector<double> theta(lambda, 0.0);
  for (std::size_t j = 1; j <= lambda; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i + j < s.size(); ++i) {
      double corr = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const double d = props[k][s[i]] - props[k][s[i + j]];
        corr += d * d;
      }
      sum += corr / 3.0;
    }
    theta[j - 1] = sum / static_cast<double>(s.size() - j);
  }
  double theta_sum = 0.0;
  for (double t : theta) theta_sum += t;
  const double denom = 1.0 + cfg.paac_weight * theta_sum;

  std::vector<double> out = aac(s);
  for (auto& x : out) x /= denom;
  for (double t : theta) out.push_back(cfg.paac_weight * t / denom);
  return out;
}

std::vector<double> qso(const std::vector<std::size_t>& s, const DescriptorConfig& cfg) {
  const auto nlag = static_cast<std::size_t>(cfg.qso_nlag);
  if (nlag >= s.size()) {
    throw LengthError(kModule, "QSOrder nlag " + std::to_string(nlag) + " must be below sequence length " +
                                   std::to_string(s.size()));
  }
  auto coupling = [&](const std::array<std::array<double, 20>, 20>& dist) {
    std::vector<double> tau(nlag, 0.0);
    for (std::size_t d = 1; d <= nlag; ++d) {
      double sum = 0.0;
      for (std::size_t i = 0; i + d < s.size(); ++i) {
        const double v = dist[s[i]][s[i + d]];
        sum += v * v;
      }
      tau[d - 1] = sum;
    }
    return tau;
  };
  const auto tau_sw = coupling(tables::kSchneiderWrede);
  const auto tau_gm = coupling(tables::kGrantham);
  double sum_sw = 0.0, sum_gm = 0.0;
  for (double t : tau_sw) sum_sw += t;
  for (double t : tau_gm) sum_gm += t;
  const double denom_sw = 1.0 + cfg.qso_weight * sum_sw;
  const double denom_gm = 1.0 + cfg.qso_weight * sum_gm;

  const auto freq = aac(s);
  std::vector<double> out;
  out.reserve(40 + 2 * nlag);
  for (double f : freq) out.push_back(f / denom_sw);
  for (double f : freq) out.push_back(f / denom_gm);
  for (double t : tau_sw) out.push_back(cfg.qso_weight * t / denom_sw);
  for (double t : tau_gm) out.push_back(cfg.qso_weight * t / denom_gm);
  return out;
}

std::vector<double> zscale(const std::vector<std::size_t>& s) {
  std::vector<double> out(5, 0.0);
  for (auto r : s) {
    for (std::size_t k = 0; k < 5; ++k) out[k] += tables::kZScale[r][k];
  }
  normalize(out, static_cast<double>(s.size()));
  return out;
}

std::vector<double> gtpc(const std::vector<std::size_t>& s) {
  std::vector<double> out(125, 0.0);
  if (s.size() < 3) return out;
  for (std::size_t p = 0; p + 2 < s.size(); ++p) {
    out[group_of(s[p]) * 25 + group_of(s[p + 1]) * 5 + group_of(s[p + 2])] += 1.0;
  }
  normalize(out, static_cast<double>(s.size() - 2));
  return out;
}

std::vector<double> binary(const std::vector<std::size_t>& s, const DescriptorConfig& cfg) {
  const auto max_len = static_cast<std::size_t>(cfg.binary_max_len);
  if (s.size() > max_len) {
    throw LengthError(kModule, "sequence length " + std::to_string(s.size()) + " exceeds binary_max_len " +
                                   std::to_string(max_len));
  }
  std::vector<double> out(20 * max_len, 0.0);
  for (std::size_t p = 0; p < s.size(); ++p) out[p * 20 + s[p]] = 1.0;
  return out;
}

std::vector<double> dde(const std::vector<std::size_t>& s) {
  if (s.size() < 2) throw LengthError(kModule, "DDE needs at least two residues");
  const double pairs = static_cast<double>(s.size() - 1);
  auto out = dpc(s);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 20; ++j) {
      const double tm = (tables::kCodonCounts[i] / 61.0) * (tables::kCodonCounts[j] / 61.0);
      const double tv = tm * (1.0 - tm) / pairs;
      auto& v = out[i * 20 + j];
      v = (v - tm) / std::sqrt(tv);
    }
  }
  return out;
}

}  // namespace

std::string_view descriptor_name(DescriptorKind kind) noexcept {
  switch (kind) {
    case DescriptorKind::kAAC: return "AAC";
    case DescriptorKind::kDPC: return "DPC";
    case DescriptorKind::kCKSAAGP: return "CKSAAGP";
    case DescriptorKind::kDistancePair: return "DistancePair";
    case DescriptorKind::kPAAC: return "PAAC";
    case DescriptorKind::kQSOrder: return "QSOrder";
    case DescriptorKind::kZScale: return "ZScale";
    case DescriptorKind::kGTPC: return "GTPC";
    case DescriptorKind::kBinary: return "Binary";
    case DescriptorKind::kDDE: return "DDE";
  }
  return "?";
}

DescriptorKind parse_descriptor_kind(std::string_view name) {
  for (auto kind : kDescriptorLayout) {
    if (descriptor_name(kind) == name) return kind;
  }
  throw ConfigError(kModule, "unknown descriptor kind '" + std::string(name) + "'");
}

void DescriptorConfig::validate(std::size_t min_length) const {
  if (cksaagp_max_gap < 0 || distpair_max_dist < 0 || paac_lambda < 0 || qso_nlag < 0) {
    throw ConfigError(kModule, "gaps, distances and lags must be non-negative");
  }
  if (static_cast<std::size_t>(paac_lambda) >= min_length) {
    throw ConfigError(kModule, "paac_lambda must be below the minimum sequence length");
  }
  if (static_cast<std::size_t>(qso_nlag) >= min_length) {
    throw ConfigError(kModule, "qso_nlag must be below the minimum sequence length");
  }
  if (!(paac_weight >= 0.0) || !(qso_weight >= 0.0)) {
    throw ConfigError(kModule, "descriptor weights must be non-negative");
  }
  if (binary_max_len < 1) throw ConfigError(kModule, "binary_max_len must be positive");
}

std::span<const double> FeatureVector::segment(DescriptorKind kind) const {
  for (const auto& seg : layout) {
    if (seg.kind == kind) return std::span<const double>(values).subspan(seg.offset, seg.length);
  }
  throw ConfigError(kModule, "feature vector has no segment " + std::string(descriptor_name(kind)));
}

std::size_t descriptor_dim(DescriptorKind kind, const DescriptorConfig& cfg) {
  switch (kind) {
    case DescriptorKind::kAAC: return 20;
    case DescriptorKind::kDPC: return 400;
    case DescriptorKind::kCKSAAGP: return 25 * static_cast<std::size_t>(cfg.cksaagp_max_gap + 1);
    case DescriptorKind::kDistancePair: return 25 * static_cast<std::size_t>(cfg.distpair_max_dist + 1);
    case DescriptorKind::kPAAC: return 20 + static_cast<std::size_t>(cfg.paac_lambda);
    case DescriptorKind::kQSOrder: return 40 + 2 * static_cast<std::size_t>(cfg.qso_nlag);
    case DescriptorKind::kZScale: return 5;
    case DescriptorKind::kGTPC: return 125;
    case DescriptorKind::kBinary: return 20 * static_cast<std::size_t>(cfg.binary_max_len);
    case DescriptorKind::kDDE: return 400;
  }
  throw ConfigError(kModule, "unknown descriptor kind");
}

std::size_t descriptor_dim(std::string_view kind, const DescriptorConfig& cfg) {
  return descriptor_dim(parse_descriptor_kind(kind), cfg);
}

std::size_t feature_dim(const DescriptorConfig& cfg) {
  std::size_t total = 0;
  for (auto kind : kDescriptorLayout) total += descriptor_dim(kind, cfg);
  return total;
}

std::vector<double> compute_descriptor(DescriptorKind kind, std::string_view residues,
                                       const DescriptorConfig& cfg) {
  const auto s = to_indices(residues);
  if (s.empty()) throw LengthError(kModule, "empty sequence");
  switch (kind) {
    case DescriptorKind::kAAC: return aac(s);
    case DescriptorKind::kDPC: return dpc(s);
    case DescriptorKind::kCKSAAGP:
      return group_pairs(s, 1, static_cast<std::size_t>(cfg.cksaagp_max_gap + 1));
    case DescriptorKind::kDistancePair:
      return group_pairs(s, 0, static_cast<std::size_t>(cfg.distpair_max_dist + 1));
    case DescriptorKind::kPAAC: return paac(s, cfg);
    case DescriptorKind::kQSOrder: return qso(s, cfg);
    case DescriptorKind::kZScale: return zscale(s);
    case DescriptorKind::kGTPC: return gtpc(s);
    case DescriptorKind::kBinary: return binary(s, cfg);
    case DescriptorKind::kDDE: return dde(s);
  }
  throw ConfigError(kModule, "unknown descriptor kind");
}

std::vector<double> compute_descriptor(std::string_view kind, std::string_view residues,
                                       const DescriptorConfig& cfg) {
  return compute_descriptor(parse_descriptor_kind(kind), residues, cfg);
}

FeatureVector featurize(std::string_view residues, const DescriptorConfig& cfg) {
  FeatureVector fv;
  fv.values.reserve(feature_dim(cfg));
  for (auto kind : kDescriptorLayout) {
    auto part = compute_descriptor(kind, residues, cfg);
    fv.layout.push_back(FeatureSegment{kind, fv.values.size(), part.size()});
    fv.values.insert(fv.values.end(), part.begin(), part.end());
  }
  return fv;
}

std::vector<std::string> feature_column_names(const DescriptorConfig& cfg) {
  std::vector<std::string> names;
  names.reserve(feature_dim(cfg));
  auto aa = [](std::size_t i) { return std::string(1, kAlphabet[i]); };
  auto grp = [](std::size_t g) { return "g" + std::to_string(g + 1); };
  for (auto kind : kDescriptorLayout) {
    const std::string prefix = std::string(descriptor_name(kind)) + ".";
    switch (kind) {
      case DescriptorKind::kAAC:
        for (std::size_t i = 0; i < 20; ++i) names.push_back(prefix + aa(i));
        break;
      case DescriptorKind::kDPC:
      case DescriptorKind::kDDE:
        for (std::size_t i = 0; i < 20; ++i)
          for (std::size_t j = 0; j < 20; ++j) names.push_back(prefix + aa(i) + aa(j));
        break;
      case DescriptorKind::kCKSAAGP:
      case DescriptorKind::kDistancePair: {
        const bool gap = kind == DescriptorKind::kCKSAAGP;
        const int blocks = (gap ? cfg.cksaagp_max_gap : cfg.distpair_max_dist) + 1;
        for (int k = 0; k < blocks; ++k)
          for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t b = 0; b < 5; ++b)
              names.push_back(prefix + (gap ? "gap" : "d") + std::to_string(k) + "." + grp(a) + grp(b));
        break;
      }
      case DescriptorKind::kPAAC:
        for (std::size_t i = 0; i < 20; ++i) names.push_back(prefix + aa(i));
        for (int j = 1; j <= cfg.paac_lambda; ++j) names.push_back(prefix + "lambda" + std::to_string(j));
        break;
      case DescriptorKind::kQSOrder:
        for (std::size_t i = 0; i < 20; ++i) names.push_back(prefix + "sw." + aa(i));
        for (std::size_t i = 0; i < 20; ++i) names.push_back(prefix + "gm." + aa(i));
        for (int d = 1; d <= cfg.qso_nlag; ++d) names.push_back(prefix + "sw.lag" + std::to_string(d));
        for (int d = 1; d <= cfg.qso_nlag; ++d) names.push_back(prefix + "gm.lag" + std::to_string(d));
        break;
      case DescriptorKind::kZScale:
        for (int k = 1; k <= 5; ++k) names.push_back(prefix + "z" + std::to_string(k));
        break;
      case DescriptorKind::kGTPC:
        for (std::size_t a = 0; a < 5; ++a)
          for (std::size_t b = 0; b < 5; ++b)
            for (std::size_t c = 0; c < 5; ++c) names.push_back(prefix + grp(a) + grp(b) + grp(c));
        break;
      case DescriptorKind::kBinary:
        for (int p = 1; p <= cfg.binary_max_len; ++p)
          for (std::size_t i = 0; i < 20; ++i) names.push_back(prefix + "p" + std::to_string(p) + "." + aa(i));
        break;
    }
  }
  return names;
}

void write_feature_csv(std::ostream& out, std::span<const std::string> ids,
                       std::span<const FeatureVector> features, const DescriptorConfig& cfg) {
  if (ids.size() != features.size()) throw ShapeError(kModule, "ids and feature rows differ in count");
  out << "id";
  for (const auto& name : feature_column_names(cfg)) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < ids.size(); ++r) {
    out << ids[r];
    for (double v : features[r].values) out << ',' << format_g9(v);
    out << '\n';
  }
}

}  // namespace avp
