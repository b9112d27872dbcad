#include "avp/augment.hpp"

#include <algorithm>
#include <array>
#include <ostream>

#include "avp/errors.hpp"
#include "avp/tables.hpp"

namespace avp {

namespace {

constexpr const char* kModule = "augment";

const std::array<char, 20>& substitute_table() {
  static const auto table = [] {
    std::array<char, 20> t{};
    for (std::size_t a = 0; a < 20; ++a) {
      int best_score = 0;
      std::size_t best = 20;
      // kAlphabet is alphabetical, so the first strict maximum wins ties.
      for (std::size_t b = 0; b < 20; ++b) {
        if (b == a) continue;
        if (best == 20 || tables::kBlosum62[a][b] > best_score) {
          best = b;
          best_score = tables::kBlosum62[a][b];
        }
      }
      t[a] = kAlphabet[best];
    }
    return t;
  }();
  return table;
}

struct Fragment {
  std::string residues;
  std::vector<std::size_t> source;
};

void apply_mutation(Fragment& f, double prob, PortableRng& rng) {
  for (auto& c : f.residues) {
    if (rng.bernoulli(prob)) c = best_substitute(c);
  }
}

void apply_insertion(Fragment& f, double prob, PortableRng& rng) {
  Fragment out;
  out.residues.reserve(f.residues.size() * 2);
  for (std::size_t i = 0; i < f.residues.size(); ++i) {
    out.residues.push_back(f.residues[i]);
    out.source.push_back(f.source[i]);
    if (rng.bernoulli(prob)) {
      out.residues.push_back(kAlphabet[rng.below(20)]);
      out.source.push_back(f.source[i]);
    }
  }
  f = std::move(out);
}

void apply_deletion(Fragment& f, double prob, PortableRng& rng) {
  std::vector<bool> keep(f.residues.size());
  bool any = false;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    keep[i] = !rng.bernoulli(prob);
    any = any || keep[i];
  }
  // A fragment is never emptied: the first residue survives.
  if (!any && !keep.empty()) keep[0] = true;
  Fragment out;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    out.residues.push_back(f.residues[i]);
    out.source.push_back(f.source[i]);
  }
  f = std::move(out);
}

}  // namespace

void AugmentConfig::validate() const {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob_ok(insert_prob) || !prob_ok(delete_prob) || !prob_ok(mutate_prob) || !prob_ok(tta_mutate_prob)) {
    throw ConfigError(kModule, "probabilities must lie in [0, 1]");
  }
  if (n_fragments < 1) throw ConfigError(kModule, "n_fragments must be at least 1");
  if (m_steps < 1) throw ConfigError(kModule, "m_steps must be at least 1");
  if (tta_variants < 0) throw ConfigError(kModule, "tta_variants must be non-negative");
}

char best_substitute(char residue) noexcept {
  const auto idx = residue_index(residue);
  if (!idx) return residue;
  return substitute_table()[*idx];
}

TracedSequence augment_traced(const PeptideSequence& seq, const AugmentConfig& cfg, PortableRng& rng) {
  const auto n_frag = static_cast<std::size_t>(cfg.n_fragments);
  const std::size_t len = seq.residues.size();
  if (len < n_frag || len == 0) {
    throw LengthError(kModule, "record '" + seq.id + "' of length " + std::to_string(len) +
                                   " cannot be split into " + std::to_string(n_frag) + " fragments");
  }

  // Cut points: n_frag - 1 distinct positions in [1, len - 1], via a partial
  // Fisher-Yates over the candidate list.
  std::vector<std::size_t> candidates(len - 1);
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i + 1;
  std::vector<std::size_t> cuts;
  for (std::size_t k = 0; k + 1 < n_frag; ++k) {
    const auto j = k + static_cast<std::size_t>(rng.below(candidates.size() - k));
    std::swap(candidates[k], candidates[j]);
    cuts.push_back(candidates[k]);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(len);

  std::vector<Fragment> fragments;
  std::size_t start = 0;
  for (auto end : cuts) {
    Fragment f;
    f.residues = seq.residues.substr(start, end - start);
    for (std::size_t i = start; i < end; ++i) f.source.push_back(i);
    fragments.push_back(std::move(f));
    start = end;
  }

  for (std::size_t step = 0; step < static_cast<std::size_t>(cfg.m_steps); ++step) {
    for (std::size_t fi = 0; fi < fragments.size(); ++fi) {
      switch (strategy_for(fi, step)) {
        case EditStrategy::kMutation: apply_mutation(fragments[fi], cfg.mutate_prob, rng); break;
        case EditStrategy::kInsertion: apply_insertion(fragments[fi], cfg.insert_prob, rng); break;
        case EditStrategy::kDeletion: apply_deletion(fragments[fi], cfg.delete_prob, rng); break;
      }
    }
  }

  TracedSequence out;
  out.sequence.id = seq.id;
  out.sequence.label = seq.label;
  for (auto& f : fragments) {
    out.sequence.residues += f.residues;
    out.source_index.insert(out.source_index.end(), f.source.begin(), f.source.end());
  }
  return out;
}

PeptideSequence augment_sequence(const PeptideSequence& seq, const AugmentConfig& cfg, PortableRng& rng) {
  return augment_traced(seq, cfg, rng).sequence;
}

PeptideSequence mutate_sequence(const PeptideSequence& seq, double prob, PortableRng& rng) {
  PeptideSequence out = seq;
  for (auto& c : out.residues) {
    if (rng.bernoulli(prob)) c = best_substitute(c);
  }
  return out;
}

std::vector<PeptideSequence> tta_variants(const PeptideSequence& seq, const AugmentConfig& cfg,
                                          PortableRng& rng) {
  std::vector<PeptideSequence> out;
  out.reserve(static_cast<std::size_t>(std::max(cfg.tta_variants, 0)));
  for (int k = 0; k < cfg.tta_variants; ++k) {
    auto v = mutate_sequence(seq, cfg.tta_mutate_prob, rng);
    v.id = seq.id + "_tta" + std::to_string(k + 1);
    out.push_back(std::move(v));
  }
  return out;
}

void dump_blosum62(std::ostream& out) {
  out << "aa";
  for (char c : kAlphabet) out << '\t' << c;
  out << '\n';
  for (std::size_t a = 0; a < 20; ++a) {
    out << kAlphabet[a];
    for (std::size_t b = 0; b < 20; ++b) out << '\t' << tables::kBlosum62[a][b];
    out << '\n';
  }
}

}  // namespace avp
