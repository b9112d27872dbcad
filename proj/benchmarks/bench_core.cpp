#include <benchmark/benchmark.h>

#include "avp/augment.hpp"
#include "avp/descriptors.hpp"
#include "avp/embed.hpp"
#include "avp/metrics.hpp"
#include "avp/model.hpp"
#include "avp/rng.hpp"
#include "avp/tables.hpp"
#include "avp/train.hpp"

using namespace avp;

namespace {

std::string peptide(std::size_t len, std::uint64_t seed) {
  PortableRng rng(seed);
  std::string s(len, 'A');
  for (auto& c : s) c = kAlphabet[rng.below(kAlphabetSize)];
  return s;
}

void BM_Featurize(benchmark::State& state) {
  const auto s = peptide(static_cast<std::size_t>(state.range(0)), 1);
  const DescriptorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(featurize(s, cfg));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Featurize)->Arg(20)->Arg(50)->Arg(100);

void BM_FallbackEmbed(benchmark::State& state) {
  const PeptideSequence seq{"b", peptide(static_cast<std::size_t>(state.range(0)), 2), std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(fallback_embed(seq, 64, 7));
}
BENCHMARK(BM_FallbackEmbed)->Arg(30)->Arg(100);

void BM_Augment(benchmark::State& state) {
  const PeptideSequence seq{"b", peptide(40, 3), std::nullopt};
  const AugmentConfig cfg;
  PortableRng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(augment_traced(seq, cfg, rng));
}
BENCHMARK(BM_Augment);

void BM_Predict(benchmark::State& state) {
  const auto embedder = make_embedding_provider("fallback:dim=64:seed=7");
  const FeaturePipeline pipe(DescriptorConfig{}, *embedder);
  ModelConfig cfg;
  cfg.embed_dim = 64;
  cfg.descriptor_dim = pipe.descriptor_dim();
  const auto params = init_params(cfg, 1);
  const auto in = pipe.bundle({"b", peptide(static_cast<std::size_t>(state.range(0)), 5), std::nullopt});
  for (auto _ : state) benchmark::DoNotOptimize(predict(params, cfg, in));
}
BENCHMARK(BM_Predict)->Arg(30)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto embedder = make_embedding_provider("fallback:dim=64:seed=7");
  const FeaturePipeline pipe(DescriptorConfig{}, *embedder);
  ModelConfig cfg;
  cfg.embed_dim = 64;
  cfg.descriptor_dim = pipe.descriptor_dim();
  const auto params = init_params(cfg, 1);
  const auto in = pipe.bundle({"b", peptide(30, 6), std::nullopt});
  for (auto _ : state) {
    ad::Tape tape;
    const auto bound = bind_params(tape, params);
    const auto f = forward(tape, bound, cfg, in);
    tape.backward(ad::sum(ad::log(f.probs)));
    benchmark::DoNotOptimize(bound);
  }
}
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMicrosecond);

void BM_Auroc(benchmark::State& state) {
  PortableRng rng(7);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = rng.uniform();
    y[i] = static_cast<int>(rng.below(2));
  }
  for (auto _ : state) benchmark::DoNotOptimize(auroc(s, y));
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(100000);

void BM_CheckpointRoundTrip(benchmark::State& state) {
  ModelConfig cfg;
  cfg.embed_dim = 64;
  cfg.descriptor_dim = feature_dim(DescriptorConfig{});
  const auto params = init_params(cfg, 1);
  for (auto _ : state) benchmark::DoNotOptimize(parse_checkpoint(serialize_checkpoint(params, cfg, {})));
}
BENCHMARK(BM_CheckpointRoundTrip)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
