#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "avp/rng.hpp"
#include "avp/seqio.hpp"

namespace avp {

struct AugmentConfig {
  int n_fragments = 3;
  int m_steps = 3;
  double insert_prob = 0.1;
  double delete_prob = 0.1;
  double mutate_prob = 0.15;
  int tta_variants = 8;
  double tta_mutate_prob = 0.05;

  void validate() const;
};

enum class EditStrategy { kMutation = 0, kInsertion = 1, kDeletion = 2 };

// Strategy applied to fragment `fragment` at step `step` (both 0-based):
// (fragment + step) mod 3.
constexpr EditStrategy strategy_for(std::size_t fragment, std::size_t step) noexcept {
  return static_cast<EditStrategy>((fragment + step) % 3);
}

// Highest-scoring BLOSUM62 partner distinct from `residue`; ties go to the
// alphabetically first letter. Returns `residue` unchanged if it is not in
// the alphabet.
char best_substitute(char residue) noexcept;

// An augmented sequence plus, for every output residue, the index of the
// input residue it descends from (inserted residues inherit the index of
// the residue they follow, or 0 at the front).
struct TracedSequence {
  PeptideSequence sequence;
  std::vector<std::size_t> source_index;
};

// Segmentation, m_steps rounds of per-fragment edits, recombination.
// Throws LengthError when the sequence is shorter than n_fragments.
TracedSequence augment_traced(const PeptideSequence& seq, const AugmentConfig& cfg, PortableRng& rng);
PeptideSequence augment_sequence(const PeptideSequence& seq, const AugmentConfig& cfg, PortableRng& rng);

// One BLOSUM62 mutation pass over the whole sequence at `prob`.
PeptideSequence mutate_sequence(const PeptideSequence& seq, double prob, PortableRng& rng);

// cfg.tta_variants mutation-only variants at cfg.tta_mutate_prob; the
// original is not included. Ids get the suffix "_ttaK".
std::vector<PeptideSequence> tta_variants(const PeptideSequence& seq, const AugmentConfig& cfg,
                                          PortableRng& rng);

// Tab-separated 20x20 table with a header row, for audit.
void dump_blosum62(std::ostream& out);

}  // namespace avp
