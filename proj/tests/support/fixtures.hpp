#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "avp/embed.hpp"
#include "avp/seqio.hpp"
#include "avp/train.hpp"

namespace avp::testing {

// Random peptide of length in [min_len, max_len]: each position takes a
// uniform residue from `enriched` with probability `enrich_prob`, otherwise
// a uniform residue from the full alphabet. Drawn from a PortableRng.
std::string random_peptide(PortableRng& rng, std::string_view enriched, double enrich_prob, std::size_t min_len,
                           std::size_t max_len);

// 200 positives enriched in K/R/L/W (label 1) and 200 negatives enriched in
// G/S (label 0), lengths 20..40, interleaved ids pos_i / neg_i.
LabeledDataset smoke_dataset(std::uint64_t seed = 2024);

struct Split {
  LabeledDataset train;
  LabeledDataset val;
  LabeledDataset test;
};

// Stratified 80 / 10 / 10.
Split split_three(const LabeledDataset& ds, std::uint64_t seed);

// Subclass task: 30 positives from the smoke positive generator with the
// enrichment set shifted to K/R/L/W/I and the motif "KWLK" planted at a random
// position; 300 negatives from the smoke negative generator.
LabeledDataset subclass_dataset(std::uint64_t seed);

inline constexpr std::size_t kSmokeEmbedDim = 64;
inline constexpr int kTransferEpochs = 10;

std::unique_ptr<EmbeddingProvider> smoke_embedder();

// Default architecture and stage-1 schedule capped at 30 epochs.
FitOptions smoke_fit_options(std::size_t descriptor_dim, std::uint64_t seed);

// Stage-2 schedule with kTransferEpochs epochs; shared by the fine-tuned and
// from-scratch arms of the transfer comparison.
FitOptions transfer_fit_options(const ModelConfig& model, std::uint64_t seed);

}  // namespace avp::testing
