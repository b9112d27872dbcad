// Acceptance run: one [PASS] / [FAIL] line per criterion 2..12.
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <httplib.h>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "avp/augment.hpp"
#include "avp/descriptors.hpp"
#include "avp/embed.hpp"
#include "avp/errors.hpp"
#include "avp/metrics.hpp"
#include "avp/model.hpp"
#include "avp/objective.hpp"
#include "avp/service.hpp"
#include "avp/tables.hpp"
#include "avp/train.hpp"
#include "avp_cli/cli.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"

using namespace avp;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kGradTol = 1e-4;
constexpr int kGradTrials = 100;
constexpr double kGradSeconds = 60.0;
constexpr double kContrastTol = 1e-6;
constexpr double kExactTol = 1e-12;
constexpr double kFocalTol = 1e-7;
constexpr double kConsistencyTol = 1e-6;
constexpr double kGMeanTol = 5e-5;
constexpr double kSumTol = 1e-12;
constexpr double kDdeMeanTol = 0.05;
constexpr double kOhemTol = 0.002;
constexpr double kChiSquareP = 0.01;
constexpr double kSmokeAcc = 0.95;
constexpr double kSmokeMcc = 0.90;
constexpr double kSmokeSeconds = 300.0;
constexpr int kSmokeEpochs = 30;
constexpr int kTransferSeeds = 5;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void report(const char* id, const char* title, Outcome o, const std::string& summary) {
  if (!o.pass) ++failures;
  std::printf("[%s] %s %s: %s%s%s\n", o.pass ? "PASS" : "FAIL", id, title, summary.c_str(),
              o.detail.empty() ? "" : " | ", o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double vsum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// ---------------------------------------------------------------- C2

void criterion_gradients() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::size_t coords = 0;
  for (const auto& name : avp::testing::primitive_names()) {
    const auto s = avp::testing::check_primitive(name, kGradTrials, 0xC0FFEE);
    coords += s.coordinates;
    if (s.worst > worst) {
      worst = s.worst;
      worst_name = name;
    }
    o.require(s.worst <= kGradTol, name + " rel err " + fmt(s.worst));
  }
  const auto comp = avp::testing::check_composite_model(kGradTrials, 77);
  coords += comp.coordinates;
  o.require(comp.worst <= kGradTol, "composite rel err " + fmt(comp.worst));
  const double secs = seconds_since(t0);
  o.require(secs < kGradSeconds, "runtime " + fmt(secs, 3) + " s");
  report("C2", "gradient integrity", o,
         std::to_string(avp::testing::primitive_names().size()) + " primitives + composite x " +
             std::to_string(kGradTrials) + " trials, " + std::to_string(coords) + " coords, worst primitive " +
             fmt(worst) + " (" + worst_name + "), composite " + fmt(comp.worst) + ", " + fmt(secs, 3) + " s");
}

// ---------------------------------------------------------------- C3

ad::Tensor row(std::vector<double> v) {
  const auto n = v.size();
  return ad::Tensor(1, n, std::move(v));
}

double contrastive_case(std::vector<double> a, std::vector<double> p, std::vector<double> n, double tau) {
  ad::Tape tape;
  const std::vector<ad::Var> anchors = {tape.constant(row(std::move(a)))};
  const std::vector<ad::Var> positives = {tape.constant(row(std::move(p)))};
  const std::vector<std::vector<ad::Var>> negs = {{tape.constant(row(std::move(n)))}};
  return contrastive_loss(tape, anchors, positives, negs, tape.constant(ad::Tensor(1, 1, tau))).item();
}

double focal_case(const ad::Tensor& probs, const std::vector<int>& labels, double gamma) {
  ad::Tape tape;
  FocalParams fp;
  fp.gamma = gamma;
  return focal_loss(tape.constant(probs), labels, fp).item();
}

double consistency_case(std::vector<double> p, std::vector<double> q) {
  ad::Tape tape;
  return consistency_loss(tape.constant(row(std::move(p))), tape.constant(row(std::move(q)))).item();
}

void criterion_losses() {
  Outcome o;
  const double con = contrastive_case({1, 0}, {3, 0}, {-2, 0}, 1.0);
  o.require(std::abs(con - 0.126928) <= kContrastTol, "contrastive " + fmt(con, 10));
  double ln2_err = 0.0;
  for (double tau : {0.01, 0.07, 0.3, 1.0}) {
    ln2_err = std::max(ln2_err, std::abs(contrastive_case({1, 0}, {1, 1}, {1, -1}, tau) - std::log(2.0)));
  }
  o.require(ln2_err <= kExactTol, "ln 2 case err " + fmt(ln2_err));
  const double foc = focal_case(row({0.1, 0.9}), {1}, 2.0);
  o.require(std::abs(foc - 0.0010536) <= kFocalTol, "focal " + fmt(foc, 10));

  PortableRng rng(3);
  double ce_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(16), c = 2 + rng.below(4);
    ad::Tensor probs(n, c);
    std::vector<int> labels(n);
    double want = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < c; ++j) total += (probs.at(i, j) = rng.uniform_open());
      for (std::size_t j = 0; j < c; ++j) probs.at(i, j) /= total;
      labels[i] = static_cast<int>(rng.below(c));
      want -= std::log(probs.at(i, static_cast<std::size_t>(labels[i])));
    }
    ce_err = std::max(ce_err, std::abs(focal_case(probs, labels, 0.0) - want / static_cast<double>(n)));
  }
  o.require(ce_err <= kExactTol, "gamma 0 vs cross-entropy err " + fmt(ce_err));

  const double cons = consistency_case({0.8, 0.2}, {0.2, 0.8});
  o.require(std::abs(cons - 0.831777) <= kConsistencyTol, "consistency " + fmt(cons, 10));
  bool symmetric = true;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t c = 2 + rng.below(5);
    std::vector<double> p(c), q(c);
    double sp = 0, sq = 0;
    for (std::size_t j = 0; j < c; ++j) {
      sp += (p[j] = rng.uniform_open());
      sq += (q[j] = rng.uniform_open());
    }
    for (std::size_t j = 0; j < c; ++j) {
      p[j] /= sp;
      q[j] /= sq;
    }
    symmetric &= consistency_case(p, q) == consistency_case(q, p);
  }
  o.require(symmetric, "consistency not bit-symmetric");
  report("C3", "loss hand cases", o,
         "contrastive " + fmt(con, 8) + ", ln2 err " + fmt(ln2_err, 3) + ", focal " + fmt(foc, 8) + ", CE err " +
             fmt(ce_err, 3) + ", consistency " + fmt(cons, 8) + ", symmetric " + (symmetric ? "yes" : "no"));
}

// ---------------------------------------------------------------- C4

void criterion_metrics() {
  Outcome o;
  PortableRng rng(4);
  int auroc_mismatch = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.below(2));
      s[i] = trial % 2 ? rng.uniform() : static_cast<double>(rng.below(10)) / 9.0;
    }
    y[0] = 1;
    y[1] = 0;
    std::uint64_t twice = 0, pos = 0, neg = 0;
    for (int v : y) (v ? pos : neg)++;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (y[i] == 1 && y[j] == 0) twice += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
    const double oracle = static_cast<double>(twice) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
    auroc_mismatch += auroc(s, y) != oracle;
  }
  o.require(auroc_mismatch == 0, std::to_string(auroc_mismatch) + " AUROC mismatches");

  int binary_mismatch = 0, macro_mismatch = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    ConfusionCounts c{rng.below(300), rng.below(300), rng.below(300), rng.below(300)};
    if (c.total() == 0) c.tp = 1;
    const auto m = binary_metrics(c);
    const double tp = c.tp, tn = c.tn, fp = c.fp, fn = c.fn;
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    bool ok = m.acc == (tp + tn) / (tp + tn + fp + fn);
    ok &= !m.sn_defined || m.sn == tp / (tp + fn);
    ok &= !m.sp_defined || m.sp == tn / (tn + fp);
    ok &= !(m.sn_defined && m.sp_defined) || m.gmean == std::sqrt(tp / (tp + fn) * (tn / (tn + fp)));
    ok &= !m.f1_defined || m.f1 == 2 * tp / (2 * tp + fp + fn);
    ok &= m.mcc == (den == 0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(den));
    binary_mismatch += !ok;

    const std::size_t k = 2 + rng.below(5);
    ConfusionMatrix cm(k, std::vector<std::uint64_t>(k));
    for (auto& r : cm)
      for (auto& v : r) v = rng.below(40);
    cm[0][0] += 1;
    const auto mm = macro_metrics(cm);
    double sp = 0, sr = 0, sf = 0;
    bool mok = true;
    for (std::size_t cl = 0; cl < k; ++cl) {
      double col = 0, rw = 0;
      for (std::size_t j = 0; j < k; ++j) {
        col += static_cast<double>(cm[j][cl]);
        rw += static_cast<double>(cm[cl][j]);
      }
      const double t = static_cast<double>(cm[cl][cl]);
      const double p = col > 0 ? t / col : 0.0, r = rw > 0 ? t / rw : 0.0, f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
      mok &= mm.precision[cl] == p && mm.recall[cl] == r && mm.f1[cl] == f;
      sp += p;
      sr += r;
      sf += f;
    }
    const double kd = static_cast<double>(k);
    mok &= std::abs(mm.macro_p - sp / kd) <= 1e-15 && std::abs(mm.macro_r - sr / kd) <= 1e-15 &&
           std::abs(mm.macro_f - sf / kd) <= 1e-15;
    macro_mismatch += !mok;
  }
  o.require(binary_mismatch == 0, std::to_string(binary_mismatch) + " binary table mismatches");
  o.require(macro_mismatch == 0, std::to_string(macro_mismatch) + " macro table mismatches");

  const double g5 = binary_metrics({9522, 9734, 266, 478}).gmean;
  const double g5_direct = std::sqrt(0.9522 * 0.9734);
  const double g2_direct = std::sqrt(0.8919 * 0.9919);
  o.require(std::abs(g5 - g5_direct) <= 1e-15, "binary_metrics G-mean differs from sqrt(SN*SP)");
  o.require(std::abs(g5_direct - 0.9628) <= kGMeanTol,
            "sqrt(0.9522*0.9734) = " + fmt(g5_direct, 8) + " vs 0.9628 (diff " + fmt(std::abs(g5_direct - 0.9628), 3) + ")");
  o.require(std::abs(g2_direct - 0.9406) <= kGMeanTol,
            "sqrt(0.8919*0.9919) = " + fmt(g2_direct, 8) + " vs 0.9406 (diff " + fmt(std::abs(g2_direct - 0.9406), 3) + ")");
  report("C4", "metric oracles", o,
         "AUROC 200/200 exact: " + std::string(auroc_mismatch ? "no" : "yes") + ", binary/macro 1000 tables: " +
             std::to_string(binary_mismatch) + "/" + std::to_string(macro_mismatch) + " mismatches, G-mean " +
             fmt(g5_direct, 8) + " and " + fmt(g2_direct, 8));
}

// ---------------------------------------------------------------- C5

std::string codon_uniform(PortableRng& rng, std::size_t len) {
  std::string letters;
  for (std::size_t a = 0; a < kAlphabetSize; ++a) {
    letters.append(static_cast<std::size_t>(tables::kCodonCounts[a]), kAlphabet[a]);
  }
  std::string s(len, 'A');
  for (auto& c : s) c = letters[rng.below(letters.size())];
  return s;
}

void criterion_descriptors() {
  Outcome o;
  const DescriptorConfig cfg;
  PortableRng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = avp::testing::random_peptide(rng, "", 0.0, 10, 100);
    for (const char* kind : {"AAC", "DPC", "GTPC"}) worst = std::max(worst, std::abs(vsum(compute_descriptor(kind, s, cfg)) - 1.0));
    for (const char* kind : {"CKSAAGP", "DistancePair"}) {
      const auto v = compute_descriptor(kind, s, cfg);
      for (std::size_t b = 0; b < v.size() / 25; ++b) {
        worst = std::max(worst, std::abs(vsum(std::span<const double>(v).subspan(25 * b, 25)) - 1.0));
      }
    }
  }
  o.require(worst <= kSumTol, "block sum err " + fmt(worst));

  int dim_mismatch = 0;
  for (int trial = 0; trial < 50; ++trial) {
    DescriptorConfig c;
    c.cksaagp_max_gap = static_cast<int>(rng.below(8));
    c.distpair_max_dist = static_cast<int>(rng.below(8));
    c.paac_lambda = static_cast<int>(rng.below(5));
    c.qso_nlag = static_cast<int>(rng.below(5));
    c.binary_max_len = 40 + static_cast<int>(rng.below(100));
    std::size_t expected = 0;
    for (auto kind : kDescriptorLayout) expected += descriptor_dim(kind, c);
    const auto fv = featurize(avp::testing::random_peptide(rng, "", 0.0, 5, 40), c);
    dim_mismatch += fv.values.size() != expected || feature_dim(c) != expected;
  }
  o.require(dim_mismatch == 0, std::to_string(dim_mismatch) + " dimension mismatches");

  double grand = 0.0;
  constexpr int kReplicates = 16;
  for (int r = 0; r < kReplicates; ++r) {
    const auto v = compute_descriptor("DDE", codon_uniform(rng, 10000), cfg);
    grand += vsum(v) / static_cast<double>(v.size());
  }
  grand /= kReplicates;
  o.require(std::abs(grand) < kDdeMeanTol, "DDE grand mean " + fmt(grand));
  report("C5", "descriptor invariants", o,
         "max block-sum err " + fmt(worst, 3) + ", 50 configs dims ok: " + (dim_mismatch ? "no" : "yes") +
             ", DDE grand mean at L=10000 " + fmt(grand, 4));
}

// ---------------------------------------------------------------- C6

void criterion_augment() {
  Outcome o;
  const std::string subs = {best_substitute('A'), best_substitute('W'), best_substitute('L')};
  o.require(subs == "SYI", "substitutes " + subs);
  AugmentConfig zero;
  zero.insert_prob = zero.delete_prob = zero.mutate_prob = 0.0;
  PortableRng rng(6);
  bool identity = true, deterministic = true;
  for (int trial = 0; trial < 200; ++trial) {
    const PeptideSequence seq{"s", avp::testing::random_peptide(rng, "", 0.0, 10, 60), std::nullopt};
    identity &= augment_sequence(seq, zero, rng).residues == seq.residues;
    const std::uint64_t seed = rng.next_u64();
    PortableRng a(seed), b(seed);
    deterministic &= augment_sequence(seq, AugmentConfig{}, a).residues == augment_sequence(seq, AugmentConfig{}, b).residues;
  }
  o.require(identity, "zero-rate config changed a sequence");
  o.require(deterministic, "fixed seed not reproducible");

  constexpr double p = 0.15;
  std::size_t positions = 0, mutated = 0;
  while (positions < 100000) {
    const PeptideSequence seq{"s", avp::testing::random_peptide(rng, "", 0.0, 100, 100), std::nullopt};
    const auto out = mutate_sequence(seq, p, rng);
    for (std::size_t i = 0; i < seq.residues.size(); ++i) mutated += out.residues[i] != seq.residues[i];
    positions += seq.residues.size();
  }
  const double n = static_cast<double>(positions);
  const double z = (static_cast<double>(mutated) - n * p) / std::sqrt(n * p * (1 - p));
  o.require(std::abs(z) < 3.0, "binomial z " + fmt(z));
  report("C6", "augmentation", o,
         "A/W/L -> " + subs + ", zero-rate identity, deterministic, mutation z = " + fmt(z, 3) + " over " +
             std::to_string(positions) + " positions");
}

// ---------------------------------------------------------------- C7

void criterion_ohem() {
  Outcome o;
  ContrastState st;
  st.enqueue(std::vector<double>{1.0, 0.0}, true);
  st.enqueue(std::vector<double>{0.1, std::sqrt(0.99)}, false);
  st.enqueue(std::vector<double>{0.9, std::sqrt(0.19)}, false);
  PortableRng rng(7);
  constexpr int kDraws = 100000;
  int hard = 0;
  for (int i = 0; i < kDraws; ++i) hard += st.sample_hard_negatives(1, rng)[0] == 1;
  const double freq = static_cast<double>(hard) / kDraws;
  const double expected = std::exp(9.0) / (std::exp(9.0) + std::exp(1.0));
  o.require(std::abs(freq - expected) <= kOhemTol, "hard frequency " + fmt(freq));

  ContrastState uni;
  uni.enqueue(std::vector<double>{1, 0, 0}, true);
  constexpr int kCand = 6;
  for (int i = 0; i < kCand; ++i) {
    const double a = 2.0 * M_PI * i / kCand;
    uni.enqueue(std::vector<double>{0.3, std::cos(a), std::sin(a)}, false);
  }
  std::vector<int> counts(kCand, 0);
  for (int i = 0; i < kDraws; ++i) ++counts[uni.sample_hard_negatives(1, rng)[0]];
  const double e = static_cast<double>(kDraws) / kCand;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - e) * (c - e) / e;
  const double pval = boost::math::cdf(boost::math::complement(boost::math::chi_squared(kCand - 1), chi2));
  o.require(pval > kChiSquareP, "chi-square p " + fmt(pval));
  report("C7", "hard-negative sampling", o,
         "hard frequency " + fmt(freq, 6) + " (expected " + fmt(expected, 6) + "), uniform chi2 " + fmt(chi2, 4) +
             " p = " + fmt(pval, 4));
}

// ---------------------------------------------------------------- C8 / C9

struct SmokeRun {
  avp::testing::Split split;
  std::unique_ptr<EmbeddingProvider> embedder;
  std::unique_ptr<FeaturePipeline> pipeline;
  FitResult fit;
  double seconds = 0.0;
};

BinaryMetrics test_metrics(const ModelParams& params, const ModelConfig& cfg, const FeaturePipeline& pipe,
                           const LabeledDataset& test) {
  ConfusionCounts c;
  for (const auto& s : test.items) {
    const auto probs = predict(params, cfg, pipe.bundle(s)).probs;
    const bool pred = probs[1] > probs[0], truth = *s.label == 1;
    if (truth && pred) ++c.tp;
    if (truth && !pred) ++c.fn;
    if (!truth && pred) ++c.fp;
    if (!truth && !pred) ++c.tn;
  }
  return binary_metrics(c);
}

void criterion_smoke(const SmokeRun& run) {
  Outcome o;
  const auto m = test_metrics(run.fit.best, run.fit.config, *run.pipeline, run.split.test);
  o.require(m.acc >= kSmokeAcc, "ACC " + fmt(m.acc, 4));
  o.require(m.mcc >= kSmokeMcc, "MCC " + fmt(m.mcc, 4));
  o.require(run.fit.epochs_run <= kSmokeEpochs, "epochs " + std::to_string(run.fit.epochs_run));
  o.require(run.seconds < kSmokeSeconds, "runtime " + fmt(run.seconds, 4) + " s");
  report("C8", "training smoke", o,
         "test ACC " + fmt(m.acc, 4) + ", MCC " + fmt(m.mcc, 4) + ", best epoch " + std::to_string(run.fit.best_epoch) +
             " of " + std::to_string(run.fit.epochs_run) + ", " + fmt(run.seconds, 4) + " s");
}

void criterion_dynamics(const SmokeRun& run) {
  Outcome o;
  const auto& log = run.fit.log;
  o.require(!log.empty(), "empty log");
  if (!log.empty()) {
    const auto& first = log.front();
    const auto& last = log.back();
    o.require(std::isfinite(first.mean_pos_sim) && std::isfinite(first.mean_hardneg_sim), "epoch 1 has no contrastive pairs");
    o.require(last.mean_pos_sim > first.mean_pos_sim,
              "positive similarity " + fmt(first.mean_pos_sim) + " -> " + fmt(last.mean_pos_sim));
    o.require(last.mean_hardneg_sim < first.mean_hardneg_sim,
              "hard-negative similarity " + fmt(first.mean_hardneg_sim) + " -> " + fmt(last.mean_hardneg_sim));
    std::ostringstream csv;
    write_dynamics_csv(csv, log);
    o.require(csv.str().rfind("epoch,total_loss,contrastive_loss,mean_pos_sim,mean_hardneg_sim,val_metric", 0) == 0,
              "dynamics CSV header");
    report("C9", "training dynamics", o,
           "positive similarity " + fmt(first.mean_pos_sim, 4) + " -> " + fmt(last.mean_pos_sim, 4) +
               ", hard-negative similarity " + fmt(first.mean_hardneg_sim, 4) + " -> " + fmt(last.mean_hardneg_sim, 4) +
               " (epoch 1 -> " + std::to_string(last.epoch) + ")");
  } else {
    report("C9", "training dynamics", o, "no epochs");
  }
}

// ---------------------------------------------------------------- C10

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void criterion_transfer(const SmokeRun& run) {
  Outcome o;
  std::vector<double> tuned, scratch;
  std::string per_seed;
  const Checkpoint base{run.fit.best, run.fit.config, {}};
  for (int seed = 1; seed <= kTransferSeeds; ++seed) {
    const auto sub = avp::testing::subclass_dataset(100 + static_cast<std::uint64_t>(seed));
    const auto [train, val] = stratified_split(sub, 0.8, 200 + static_cast<std::uint64_t>(seed));
    const auto test = avp::testing::subclass_dataset(900 + static_cast<std::uint64_t>(seed));
    const auto opts = avp::testing::transfer_fit_options(run.fit.config, static_cast<std::uint64_t>(seed));
    const auto ft = finetune_stage2(base, train, val, *run.pipeline, opts);
    const auto sc = fit_stage1(train, val, *run.pipeline, opts);
    tuned.push_back(test_metrics(ft.best, ft.config, *run.pipeline, test).mcc);
    scratch.push_back(test_metrics(sc.best, sc.config, *run.pipeline, test).mcc);
    per_seed += (per_seed.empty() ? "" : " ") + fmt(tuned.back(), 3) + "/" + fmt(scratch.back(), 3);
  }
  const double mt = median(tuned), ms = median(scratch);
  o.require(mt > ms, "fine-tuned median " + fmt(mt, 4) + " <= from-scratch " + fmt(ms, 4));
  report("C10", "transfer", o,
         "median MCC fine-tuned " + fmt(mt, 4) + " vs from-scratch " + fmt(ms, 4) + " over " +
             std::to_string(kTransferSeeds) + " seeds, " + std::to_string(avp::testing::kTransferEpochs) +
             " epochs each (per seed " + per_seed + ")");
}

// ---------------------------------------------------------------- C11

template <typename E, typename F>
bool throws(F&& f) {
  try {
    f();
  } catch (const E&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

void criterion_persistence(const SmokeRun& run) {
  Outcome o;
  const auto dir = fs::temp_directory_path() / "avp_acceptance";
  fs::create_directories(dir);
  save_checkpoint(dir / "smoke.ckpt", run.fit.best, run.fit.config, {});
  const auto ck = load_checkpoint(dir / "smoke.ckpt");
  std::size_t identical = 0;
  for (const auto& s : run.split.test.items) {
    const auto in = run.pipeline->bundle(s);
    identical += predict(run.fit.best, run.fit.config, in).probs == predict(ck.params, ck.config, in).probs;
  }
  o.require(identical == run.split.test.items.size(), "predictions differ after reload");

  EmbeddingMap map;
  for (const auto& s : run.split.test.items) map.emplace(s.id, run.embedder->embed(s));
  write_embeddings(dir / "test.pemb", map);
  const auto back = load_embeddings(dir / "test.pemb");
  bool pemb_exact = back.size() == map.size();
  for (const auto& [id, m] : map) {
    const auto it = back.find(id);
    pemb_exact &= it != back.end() && it->second.length == m.length && it->second.dim == m.dim &&
                  std::memcmp(it->second.values.data(), m.values.data(), m.values.size() * sizeof(float)) == 0;
  }
  o.require(pemb_exact, "PEMB1 round trip not bit-exact");

  const auto bytes = serialize_checkpoint(run.fit.best, run.fit.config, {});
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  auto old = bytes;
  old[7] = '1';
  old[8] = 1;
  auto magic = bytes;
  magic[0] = 'Z';
  auto pemb = serialize_embeddings(map);
  pemb[0] = 'Z';
  auto pemb_short = serialize_embeddings(map);
  pemb_short.resize(pemb_short.size() - 5);
  const bool corrupt = throws<CorruptionError>([&] { parse_checkpoint(flipped); });
  const bool version = throws<VersionError>([&] { parse_checkpoint(old); });
  const bool fmt_err = throws<FormatError>([&] { parse_checkpoint(magic); });
  const bool pemb_err = throws<FormatError>([&] { parse_embeddings(pemb); }) &&
                        throws<FormatError>([&] { parse_embeddings(pemb_short); });
  o.require(corrupt, "flipped checkpoint byte not CorruptionError");
  o.require(version, "old checkpoint version not VersionError");
  o.require(fmt_err, "bad checkpoint magic not FormatError");
  o.require(pemb_err, "malformed PEMB1 not FormatError");
  fs::remove_all(dir);
  report("C11", "persistence", o,
         std::to_string(identical) + "/" + std::to_string(run.split.test.items.size()) +
             " predictions bit-identical after reload, PEMB1 bit-exact " + (pemb_exact ? "yes" : "no") +
             ", corruption/version/magic/PEMB1 rejected " + (corrupt && version && fmt_err && pemb_err ? "yes" : "no"));
}

// ---------------------------------------------------------------- C12

PredictionService make_service(const SmokeRun& run, bool tta, int variants) {
  AugmentConfig aug;
  aug.tta_variants = variants;
  return PredictionService(Checkpoint{run.fit.best, run.fit.config, {}}, avp::testing::smoke_embedder(),
                           DescriptorConfig{}, LengthBounds{}, aug, tta, 17);
}

void criterion_service(const SmokeRun& run) {
  Outcome o;
  const auto plain = make_service(run, false, 8);
  const auto tta0 = make_service(run, true, 0);
  std::string seqs;
  for (std::size_t i = 0; i < 8; ++i) seqs += std::string(i ? "," : "") + "\"" + run.split.test.items[i].residues + "\"";
  const std::string body = "{\"sequences\": [" + seqs + "]}";
  const auto r1 = plain.handle_predict(body), r2 = plain.handle_predict(body);
  o.require(r1.status == 200, "status " + std::to_string(r1.status));
  o.require(r1.body == r2.body, "repeated requests differ");
  const auto t0 = tta0.handle_predict(body);
  o.require(t0.body == r1.body, "TTA with 0 variants differs from plain prediction");
  const int malformed = plain.handle_predict("{\"sequences\": 5}").status;
  const int notjson = plain.handle_predict("{oops").status;
  const int invalid = plain.handle_predict("{\"sequences\": [\"ACDEFGHIKZ\"]}").status;
  o.require(malformed == 400 && notjson == 400, "malformed status " + std::to_string(malformed) + "/" + std::to_string(notjson));
  o.require(invalid == 422, "invalid residue status " + std::to_string(invalid));

  bool http_ok = false;
  std::string http_note;
  try {
    cli::HttpFrontend front(plain);
    const int port = front.bind("127.0.0.1", 0);
    std::thread server([&] { front.listen(); });
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(60, 0);
    const auto res = client.Post("/predict", body, "application/json");
    const auto health = client.Get("/health");
    const auto bad = client.Post("/predict", "{\"sequences\": [\"ACDEFGHIKZ\"]}", "application/json");
    http_ok = res && res->status == 200 && res->body == r1.body && health && health->status == 200 && bad &&
              bad->status == 422;
    if (!http_ok) http_note = res ? "HTTP status " + std::to_string(res->status) : "HTTP request failed";
    front.stop();
    server.join();
  } catch (const std::exception& e) {
    http_note = e.what();
  }
  o.require(http_ok, "HTTP round trip: " + http_note);
  report("C12", "service", o,
         "deterministic 200, TTA(0) == plain, malformed " + std::to_string(malformed) + ", invalid residue " +
             std::to_string(invalid) + ", HTTP round trip " + (http_ok ? "ok" : "failed"));
}

}  // namespace

int main() {
  std::printf("criterion 1 (published benchmark tables) needs the full corpora and protein language model embeddings; not run\n");
  criterion_gradients();
  criterion_losses();
  criterion_metrics();
  criterion_descriptors();
  criterion_augment();
  criterion_ohem();

  SmokeRun run;
  run.split = avp::testing::split_three(avp::testing::smoke_dataset(), 11);
  run.embedder = avp::testing::smoke_embedder();
  run.pipeline = std::make_unique<FeaturePipeline>(DescriptorConfig{}, *run.embedder);
  const auto t0 = std::chrono::steady_clock::now();
  run.fit = fit_stage1(run.split.train, run.split.val, *run.pipeline,
                       avp::testing::smoke_fit_options(run.pipeline->descriptor_dim(), 1));
  run.seconds = seconds_since(t0);
  criterion_smoke(run);
  criterion_dynamics(run);
  criterion_persistence(run);
  criterion_service(run);
  criterion_transfer(run);

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
