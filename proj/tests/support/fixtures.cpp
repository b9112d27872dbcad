#include "fixtures.hpp"

#include <string>

#include "avp/tables.hpp"

namespace avp::testing {

std::string random_peptide(PortableRng& rng, std::string_view enriched, double enrich_prob, std::size_t min_len,
                           std::size_t max_len) {
  const auto len = static_cast<std::size_t>(min_len + rng.below(max_len - min_len + 1));
  std::string s;
  s.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (rng.bernoulli(enrich_prob)) {
      s.push_back(enriched[rng.below(enriched.size())]);
    } else {
      s.push_back(kAlphabet[rng.below(kAlphabetSize)]);
    }
  }
  return s;
}

LabeledDataset smoke_dataset(std::uint64_t seed) {
  PortableRng rng(seed);
  LabeledDataset ds;
  ds.class_count = 2;
  ds.class_names = {"non_avp", "avp"};
  for (int i = 0; i < 200; ++i) {
    ds.items.push_back({"pos_" + std::to_string(i), random_peptide(rng, "KRLW", 0.5, 20, 40), 1});
    ds.items.push_back({"neg_" + std::to_string(i), random_peptide(rng, "GS", 0.5, 20, 40), 0});
  }
  return ds;
}

Split split_three(const LabeledDataset& ds, std::uint64_t seed) {
  auto [train, rest] = stratified_split(ds, 0.8, seed);
  auto [val, test] = stratified_split(rest, 0.5, derive_seed(seed, 1));
  return {std::move(train), std::move(val), std::move(test)};
}

LabeledDataset subclass_dataset(std::uint64_t seed) {
  PortableRng rng(seed);
  LabeledDataset ds;
  ds.class_count = 2;
  ds.class_names = {"background", "subclass"};
  for (int i = 0; i < 30; ++i) {
    std::string s = random_peptide(rng, "KRLWI", 0.5, 20, 36);
    const auto at = static_cast<std::size_t>(rng.below(s.size() + 1));
    s.insert(at, "KWLK");
    ds.items.push_back({"sub_" + std::to_string(i), s, 1});
  }
  for (int i = 0; i < 300; ++i) {
    ds.items.push_back({"bg_" + std::to_string(i), random_peptide(rng, "GS", 0.5, 20, 40), 0});
  }
  return ds;
}

std::unique_ptr<EmbeddingProvider> smoke_embedder() {
  return make_embedding_provider("fallback:dim=" + std::to_string(kSmokeEmbedDim) + ":seed=7");
}

FitOptions smoke_fit_options(std::size_t descriptor_dim, std::uint64_t seed) {
  FitOptions o;
  o.model.embed_dim = kSmokeEmbedDim;
  o.model.descriptor_dim = descriptor_dim;
  o.train = TrainConfig::stage1();
  o.train.max_epochs = 30;
  o.train.seed = seed;
  return o;
}

FitOptions transfer_fit_options(const ModelConfig& model, std::uint64_t seed) {
  FitOptions o;
  o.model = model;
  o.train = TrainConfig::stage2();
  o.train.max_epochs = kTransferEpochs;
  o.train.seed = seed;
  return o;
}

}  // namespace avp::testing
