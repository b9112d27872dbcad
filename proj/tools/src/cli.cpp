#include "avp_cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "avp/augment.hpp"
#include "avp/config.hpp"
#include "avp/errors.hpp"
#include "avp/format.hpp"
#include "avp/metrics.hpp"
#include "json.hpp"

namespace avp::cli {

namespace {

using nlohmann::json;

constexpr const char* kModule = "cli";
constexpr const char* kRunConfigAttr = "run_config";
constexpr const char* kEmbedderAttr = "embedder";
constexpr const char* kClassNamesAttr = "class_names";

struct EmbedFlags {
  std::string embedder;
  std::string embeddings;
};

void add_embed_flags(CLI::App* sub, EmbedFlags& f) {
  auto* a = sub->add_option("--embedder", f.embedder, "embedding provider spec, e.g. fallback:dim=64:seed=7");
  auto* b = sub->add_option("--embeddings", f.embeddings, "PEMB1 file with per-residue embeddings");
  a->excludes(b);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(kModule, "cannot write '" + path + "'");
  return out;
}

void check_written(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError(kModule, "write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig config_from(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

// --config wins; otherwise the configuration the checkpoint was trained with.
RunConfig config_for(const std::string& path, const Checkpoint& ck) {
  if (!path.empty()) return load_config(path);
  const auto it = ck.meta.attributes.find(kRunConfigAttr);
  return it == ck.meta.attributes.end() ? RunConfig{} : parse_config(it->second);
}

std::unique_ptr<EmbeddingProvider> resolve_embedder(const EmbedFlags& f, const RunConfig& cfg) {
  if (!f.embeddings.empty()) return make_embedding_provider("pemb1:" + f.embeddings);
  if (!f.embedder.empty()) return make_embedding_provider(f.embedder);
  if (!cfg.paths.embeddings.empty()) return make_embedding_provider("pemb1:" + cfg.paths.embeddings);
  if (!cfg.paths.embedder.empty()) return make_embedding_provider(cfg.paths.embedder);
  throw ConfigError(kModule, "no embedding source: pass --embeddings FILE or --embedder SPEC");
}

void check_embed_dim(const ModelConfig& model, const EmbeddingProvider& emb) {
  if (model.embed_dim != emb.dim()) {
    throw ConfigError(kModule, "model.embed_dim is " + std::to_string(model.embed_dim) + " but the embedder gives " +
                                   std::to_string(emb.dim()));
  }
}

LabeledDataset load_dataset(const std::string& fasta, const std::string& labels, const LengthBounds& bounds,
                            std::optional<std::size_t> class_count = std::nullopt) {
  return load_labels_file(labels, read_fasta_file(fasta, bounds), class_count);
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::function<void(const EpochLog&)> progress(std::ostream& err) {
  return [&err](const EpochLog& r) {
    err << "epoch " << r.epoch << " loss " << format_g9(r.total_loss) << " val " << format_g9(r.val_metric)
        << " lr " << format_g9(r.lr) << '\n';
  };
}

void save_fit(const FitResult& res, int stage, const RunConfig& cfg, const EmbeddingProvider& emb,
              const LabeledDataset& ds, const std::string& out_path, const std::string& dynamics) {
  CheckpointMeta meta;
  meta.stage = stage;
  meta.epoch = res.best_epoch;
  if (res.best_epoch > 0) meta.metrics["val_metric"] = res.best_metric;
  meta.attributes[kRunConfigAttr] = dump_config(cfg);
  meta.attributes[kEmbedderAttr] = emb.describe();
  if (!ds.class_names.empty()) meta.attributes[kClassNamesAttr] = join(ds.class_names);
  save_checkpoint(out_path, res.best, res.config, meta);
  if (!dynamics.empty()) {
    auto out = open_out(dynamics);
    write_dynamics_csv(out, res.log);
    check_written(out, dynamics);
  }
}

// ---- featurize ----

struct FeaturizeArgs {
  std::string in, out, config;
};

int cmd_featurize(const FeaturizeArgs& a) {
  const RunConfig cfg = config_from(a.config);
  const auto seqs = read_fasta_file(a.in, cfg.seqio);
  std::vector<std::string> ids;
  std::vector<FeatureVector> feats;
  for (const auto& s : seqs) {
    ids.push_back(s.id);
    feats.push_back(featurize(s.residues, cfg.descriptor));
  }
  auto out = open_out(a.out);
  write_feature_csv(out, ids, feats, cfg.descriptor);
  check_written(out, a.out);
  return 0;
}

// ---- augment ----

struct AugmentArgs {
  std::string in, out, config;
  int copies = 1;
  std::optional<std::uint64_t> seed;
  bool keep_original = false;
};

int cmd_augment(const AugmentArgs& a) {
  const RunConfig cfg = config_from(a.config);
  if (a.copies < 1) throw ConfigError(kModule, "--copies must be at least 1");
  const std::uint64_t seed = a.seed.value_or(cfg.augment_seed);
  const auto seqs = read_fasta_file(a.in, cfg.seqio);
  std::vector<PeptideSequence> out_seqs;
  for (std::size_t r = 0; r < seqs.size(); ++r) {
    if (a.keep_original) out_seqs.push_back(seqs[r]);
    PortableRng rng(derive_seed(seed, r));
    for (int k = 1; k <= a.copies; ++k) {
      PeptideSequence s = augment_sequence(seqs[r], cfg.augment, rng);
      s.id = seqs[r].id + "_aug" + std::to_string(k);
      out_seqs.push_back(std::move(s));
    }
  }
  write_fasta_file(a.out, out_seqs);
  return 0;
}

// ---- train / finetune ----

struct TrainArgs {
  std::string in, labels, out, dynamics, config, val_in, val_labels, base;
  EmbedFlags embed;
};

std::pair<LabeledDataset, LabeledDataset> train_val(const TrainArgs& a, const RunConfig& cfg,
                                                    const TrainConfig& tc) {
  LabeledDataset ds = load_dataset(a.in, a.labels, cfg.seqio);
  if (a.val_in.empty() != a.val_labels.empty()) {
    throw ConfigError(kModule, "--val-in and --val-labels must be given together");
  }
  if (!a.val_in.empty()) {
    LabeledDataset val = load_dataset(a.val_in, a.val_labels, cfg.seqio, ds.class_count);
    return {std::move(ds), std::move(val)};
  }
  return stratified_split(ds, 1.0 - tc.val_fraction, tc.seed);
}

int cmd_train(const TrainArgs& a, std::ostream& err) {
  const RunConfig cfg = config_from(a.config);
  const auto emb = resolve_embedder(a.embed, cfg);
  check_embed_dim(cfg.model_config(), *emb);
  auto [train, val] = train_val(a, cfg, cfg.train);
  if (train.class_count != 2) throw ConfigError(kModule, "train expects binary labels (0 / 1)");
  const FeaturePipeline pipe(cfg.descriptor, *emb, cfg.seqio);
  FitOptions opts = cfg.fit_options(1);
  opts.on_epoch = progress(err);
  const FitResult res = fit_stage1(train, val, pipe, opts);
  save_fit(res, 1, cfg, *emb, train, a.out, a.dynamics);
  err << "best epoch " << res.best_epoch << " val " << format_g9(res.best_metric) << '\n';
  return 0;
}

int cmd_finetune(const TrainArgs& a, std::ostream& err) {
  const Checkpoint base = load_checkpoint(a.base);
  const RunConfig cfg = config_for(a.config, base);
  const auto emb = resolve_embedder(a.embed, cfg);
  auto [train, val] = train_val(a, cfg, cfg.finetune);
  const FeaturePipeline pipe(cfg.descriptor, *emb, cfg.seqio);
  FitOptions opts = cfg.fit_options(2);
  opts.on_epoch = progress(err);
  const FitResult res = finetune_stage2(base, train, val, pipe, opts);
  save_fit(res, 2, cfg, *emb, train, a.out, a.dynamics);
  err << "best epoch " << res.best_epoch << " val " << format_g9(res.best_metric) << '\n';
  return 0;
}

// ---- predict ----

struct PredictArgs {
  std::string checkpoint, in, out, config, interpret;
  bool tta = false;
  std::optional<int> tta_variants;
  std::optional<std::uint64_t> seed;
  EmbedFlags embed;
};

int cmd_predict(const PredictArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  RunConfig cfg = config_for(a.config, ck);
  if (a.tta_variants) cfg.augment.tta_variants = *a.tta_variants;
  cfg.augment.validate();
  const auto emb = resolve_embedder(a.embed, cfg);
  check_embed_dim(ck.config, *emb);
  const FeaturePipeline pipe(cfg.descriptor, *emb, cfg.seqio);
  if (pipe.descriptor_dim() != ck.config.descriptor_dim) {
    throw VersionError(kModule, "checkpoint expects " + std::to_string(ck.config.descriptor_dim) +
                                    " descriptor columns, the configuration gives " +
                                    std::to_string(pipe.descriptor_dim()));
  }
  const auto seqs = read_fasta_file(a.in, cfg.seqio);
  const std::uint64_t seed = a.seed.value_or(cfg.augment_seed);

  auto out = open_out(a.out);
  out << "id";
  for (std::size_t c = 0; c < ck.config.class_count; ++c) out << ",prob_" << c;
  out << ",predicted_label,gate_lambda\n";
  std::vector<ForwardOutput> outputs;
  for (std::size_t r = 0; r < seqs.size(); ++r) {
    ForwardOutput fo = predict(ck.params, ck.config, pipe.bundle(seqs[r]));
    std::vector<double> probs = fo.probs;
    if (a.tta) {
      PortableRng rng(derive_seed(seed, r));
      probs = tta_predict(ck.params, ck.config, pipe, seqs[r], cfg.augment, rng);
    }
    const auto label = std::max_element(probs.begin(), probs.end()) - probs.begin();
    out << seqs[r].id;
    for (double p : probs) out << ',' << format_g9(p);
    out << ',' << label << ',' << format_g9(fo.gate_lambda) << '\n';
    if (!a.interpret.empty()) {
      fo.label = seqs[r].label;
      outputs.push_back(std::move(fo));
    }
  }
  check_written(out, a.out);
  if (!a.interpret.empty()) {
    std::filesystem::create_directories(a.interpret);
    export_interpretability(outputs, a.interpret);
  }
  return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string predictions, labels, out, curves, config;
  std::optional<double> threshold;
  std::optional<int> positive_class;
};

struct PredictionTable {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> probs;
};

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  }
  return out;
}

double parse_number(std::string_view s, const std::string& where) {
  const std::string t(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw FormatError(kModule, where + ": '" + t + "' is not a number");
  return v;
}

PredictionTable read_predictions(const std::string& path) {
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  if (lines.empty()) throw FormatError(kModule, "'" + path + "' is empty");
  const auto header = split_csv(lines[0]);
  if (header.empty() || header[0] != "id") throw FormatError(kModule, "'" + path + "' must start with an id column");
  std::vector<std::size_t> prob_cols;
  for (std::size_t c = 0;; ++c) {
    const std::string name = "prob_" + std::to_string(c);
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) break;
    prob_cols.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  if (prob_cols.size() < 2) throw FormatError(kModule, "'" + path + "' needs columns prob_0 and prob_1 at least");
  PredictionTable t;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    if (cells.size() != header.size()) {
      throw FormatError(kModule, "'" + path + "' line " + std::to_string(i + 1) + " has the wrong column count");
    }
    t.ids.emplace_back(cells[0]);
    std::vector<double> p;
    for (std::size_t c : prob_cols) p.push_back(parse_number(cells[c], path + " line " + std::to_string(i + 1)));
    t.probs.push_back(std::move(p));
  }
  return t;
}

std::map<std::string, int> read_label_table(const std::string& path) {
  std::map<std::string, int> out;
  const std::string text = read_text(path);
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].front() == '#') continue;
    const auto cells = split_csv(lines[i]);
    if (cells.size() != 2) throw FormatError(kModule, "'" + path + "' line " + std::to_string(i + 1) + " is not 'id,label'");
    int label = 0;
    const auto [ptr, ec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), label);
    if (ec != std::errc() || ptr != cells[1].data() + cells[1].size() || label < 0) {
      if (i == 0 && cells[1] == "label") continue;
      throw FormatError(kModule, "'" + path + "' line " + std::to_string(i + 1) + " has an invalid label");
    }
    if (!out.emplace(std::string(cells[0]), label).second) {
      throw DuplicateIdError(kModule, "duplicate id '" + std::string(cells[0]) + "' in '" + path + "'");
    }
  }
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_evaluate(const EvaluateArgs& a) {
  const RunConfig cfg = config_from(a.config);
  const double threshold = a.threshold.value_or(cfg.metrics.threshold);
  const int positive = a.positive_class.value_or(cfg.metrics.positive_class);
  const PredictionTable pt = read_predictions(a.predictions);
  const auto labels = read_label_table(a.labels);
  const std::size_t C = pt.probs.empty() ? 2 : pt.probs.front().size();
  std::vector<int> truth;
  for (const auto& id : pt.ids) {
    const auto it = labels.find(id);
    if (it == labels.end()) throw LabelError(kModule, "no label for prediction '" + id + "'");
    if (static_cast<std::size_t>(it->second) >= C) {
      throw LabelError(kModule, "label " + std::to_string(it->second) + " of '" + id + "' exceeds the class count");
    }
    truth.push_back(it->second);
  }
  if (truth.empty()) throw EmptyError(kModule, "no predictions to evaluate");

  json doc;
  doc["n"] = truth.size();
  doc["class_count"] = C;
  json warnings = json::array();
  if (C == 2) {
    if (positive < 0 || positive > 1) throw ConfigError(kModule, "positive class must be 0 or 1 for binary input");
    std::vector<double> scores;
    std::vector<int> y;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      scores.push_back(pt.probs[i][static_cast<std::size_t>(positive)]);
      y.push_back(truth[i] == positive ? 1 : 0);
    }
    const ConfusionCounts cc = confusion_at(scores, y, threshold);
    const BinaryMetrics m = binary_metrics(cc);
    doc["threshold"] = threshold;
    doc["positive_class"] = positive;
    doc["confusion"] = {{"tp", cc.tp}, {"tn", cc.tn}, {"fp", cc.fp}, {"fn", cc.fn}};
    doc["acc"] = number_or_null(m.acc);
    doc["sn"] = number_or_null(m.sn);
    doc["sp"] = number_or_null(m.sp);
    doc["mcc"] = number_or_null(m.mcc);
    doc["gmean"] = number_or_null(m.gmean);
    doc["f1"] = number_or_null(m.f1);
    if (!m.sn_defined) warnings.push_back("sensitivity undefined: no positives");
    if (!m.sp_defined) warnings.push_back("specificity undefined: no negatives");
    if (!m.f1_defined) warnings.push_back("F1 undefined");
    if (m.mcc_zero_denominator) warnings.push_back("MCC denominator is zero; reported as 0");
    const bool both = cc.tp + cc.fn > 0 && cc.tn + cc.fp > 0;
    if (both) {
      doc["auroc"] = auroc(scores, y);
      doc["auprc"] = auprc(scores, y);
      if (!a.curves.empty()) {
        std::filesystem::create_directories(a.curves);
        const std::string path = (std::filesystem::path(a.curves) / "roc_pr.csv").string();
        auto out = open_out(path);
        write_curve_csv(out, roc_pr_curve(scores, y));
        check_written(out, path);
      }
    } else {
      doc["auroc"] = nullptr;
      doc["auprc"] = nullptr;
      warnings.push_back("AUROC / AUPRC need both classes");
    }
  } else {
    std::vector<int> pred;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const auto& p = pt.probs[i];
      pred.push_back(static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()));
      correct += pred.back() == truth[i];
    }
    const ConfusionMatrix cm = confusion_matrix(truth, pred, C);
    const MacroMetrics mm = macro_metrics(cm);
    doc["acc"] = static_cast<double>(correct) / static_cast<double>(truth.size());
    doc["mcc"] = multiclass_mcc(cm);
    doc["macro_p"] = mm.macro_p;
    doc["macro_r"] = mm.macro_r;
    doc["macro_f"] = mm.macro_f;
    doc["precision"] = mm.precision;
    doc["recall"] = mm.recall;
    doc["f1"] = mm.f1;
    doc["confusion"] = cm;
    for (const auto& w : mm.warnings) warnings.push_back(w);
  }
  doc["warnings"] = warnings;
  auto out = open_out(a.out);
  out << doc.dump(2) << '\n';
  check_written(out, a.out);
  return 0;
}

// ---- compose-stats ----

struct ComposeArgs {
  std::string group_a, group_b, out, config;
};

int cmd_compose(const ComposeArgs& a) {
  const RunConfig cfg = config_from(a.config);
  const auto ga = read_fasta_file(a.group_a, cfg.seqio);
  const auto gb = read_fasta_file(a.group_b, cfg.seqio);
  auto out = open_out(a.out);
  write_composition_csv(out, composition_analysis(ga, gb));
  check_written(out, a.out);
  return 0;
}

// ---- serve ----

struct ServeArgs {
  std::string checkpoint, config, host = "127.0.0.1";
  int port = 8080;
  bool tta = false;
  EmbedFlags embed;
};

int cmd_serve(const ServeArgs& a, std::ostream& err) {
  Checkpoint ck = load_checkpoint(a.checkpoint);
  const RunConfig cfg = config_for(a.config, ck);
  auto emb = resolve_embedder(a.embed, cfg);
  const PredictionService service(std::move(ck), std::move(emb), cfg.descriptor, cfg.seqio, cfg.augment, a.tta,
                                  cfg.augment_seed);
  HttpFrontend http(service);
  const int port = http.bind(a.host, a.port);
  err << "listening on " << a.host << ':' << port << std::endl;
  http.listen();
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Antiviral peptide prediction pipeline", "avp"};
  app.require_subcommand(1);

  FeaturizeArgs fz;
  auto* featurize_cmd = app.add_subcommand("featurize", "descriptor CSV for a FASTA file");
  featurize_cmd->add_option("--in", fz.in, "input FASTA")->required();
  featurize_cmd->add_option("--out", fz.out, "output CSV")->required();
  featurize_cmd->add_option("--config", fz.config, "run configuration file");

  AugmentArgs ag;
  auto* augment_cmd = app.add_subcommand("augment", "augmented copies of a FASTA file");
  augment_cmd->add_option("--in", ag.in, "input FASTA")->required();
  augment_cmd->add_option("--out", ag.out, "output FASTA")->required();
  augment_cmd->add_option("--copies", ag.copies, "copies per sequence")->capture_default_str();
  augment_cmd->add_option("--seed", ag.seed, "seed (default augment.seed)");
  augment_cmd->add_flag("--keep-original", ag.keep_original, "write each original before its copies");
  augment_cmd->add_option("--config", ag.config, "run configuration file");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "stage-1 training");
  train_cmd->add_option("--in", tr.in, "training FASTA")->required();
  train_cmd->add_option("--labels", tr.labels, "id,label table")->required();
  train_cmd->add_option("--out", tr.out, "checkpoint path")->required();
  train_cmd->add_option("--dynamics", tr.dynamics, "per-epoch dynamics CSV");
  train_cmd->add_option("--val-in", tr.val_in, "validation FASTA (default: split from --in)");
  train_cmd->add_option("--val-labels", tr.val_labels, "validation labels");
  train_cmd->add_option("--config", tr.config, "run configuration file");
  add_embed_flags(train_cmd, tr.embed);

  TrainArgs ft;
  auto* finetune_cmd = app.add_subcommand("finetune", "stage-2 transfer from a stage-1 checkpoint");
  finetune_cmd->add_option("--base", ft.base, "stage-1 checkpoint")->required();
  finetune_cmd->add_option("--in", ft.in, "training FASTA")->required();
  finetune_cmd->add_option("--labels", ft.labels, "id,label table")->required();
  finetune_cmd->add_option("--out", ft.out, "checkpoint path")->required();
  finetune_cmd->add_option("--dynamics", ft.dynamics, "per-epoch dynamics CSV");
  finetune_cmd->add_option("--val-in", ft.val_in, "validation FASTA (default: split from --in)");
  finetune_cmd->add_option("--val-labels", ft.val_labels, "validation labels");
  finetune_cmd->add_option("--config", ft.config, "run configuration file (default: the base checkpoint's)");
  add_embed_flags(finetune_cmd, ft.embed);

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "class probabilities for a FASTA file");
  predict_cmd->add_option("--checkpoint", pr.checkpoint, "model checkpoint")->required();
  predict_cmd->add_option("--in", pr.in, "input FASTA")->required();
  predict_cmd->add_option("--out", pr.out, "output CSV")->required();
  predict_cmd->add_flag("--tta", pr.tta, "average over mutation variants");
  predict_cmd->add_option("--tta-variants", pr.tta_variants, "variant count (default augment.tta_variants)");
  predict_cmd->add_option("--seed", pr.seed, "TTA seed (default augment.seed)");
  predict_cmd->add_option("--interpret", pr.interpret, "directory for gate and attention CSVs");
  predict_cmd->add_option("--config", pr.config, "run configuration file (default: the checkpoint's)");
  add_embed_flags(predict_cmd, pr.embed);

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "metrics for a prediction CSV");
  evaluate_cmd->add_option("--predictions", ev.predictions, "CSV written by predict")->required();
  evaluate_cmd->add_option("--labels", ev.labels, "id,label table")->required();
  evaluate_cmd->add_option("--out", ev.out, "metrics JSON")->required();
  evaluate_cmd->add_option("--curves", ev.curves, "directory for the ROC / PR curve CSV");
  evaluate_cmd->add_option("--threshold", ev.threshold, "decision threshold (default metrics.threshold)");
  evaluate_cmd->add_option("--positive-class", ev.positive_class, "positive class (default metrics.positive_class)");
  evaluate_cmd->add_option("--config", ev.config, "run configuration file");

  ComposeArgs cs;
  auto* compose_cmd = app.add_subcommand("compose-stats", "per-residue composition comparison of two groups");
  compose_cmd->add_option("--group-a", cs.group_a, "FASTA of group A")->required();
  compose_cmd->add_option("--group-b", cs.group_b, "FASTA of group B")->required();
  compose_cmd->add_option("--out", cs.out, "output CSV")->required();
  compose_cmd->add_option("--config", cs.config, "run configuration file");

  ServeArgs sv;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP prediction service");
  serve_cmd->add_option("--checkpoint", sv.checkpoint, "model checkpoint")->required();
  serve_cmd->add_option("--host", sv.host, "bind address")->capture_default_str();
  serve_cmd->add_option("--port", sv.port, "port")->capture_default_str();
  serve_cmd->add_flag("--tta", sv.tta, "TTA on by default");
  serve_cmd->add_option("--config", sv.config, "run configuration file (default: the checkpoint's)");
  add_embed_flags(serve_cmd, sv.embed);

  std::string dump_cfg_path;
  auto* dump_config_cmd = app.add_subcommand("dump-config", "print the configuration with every key");
  dump_config_cmd->add_option("--config", dump_cfg_path, "configuration to normalize (default: defaults)");
  auto* dump_blosum_cmd = app.add_subcommand("dump-blosum", "print the BLOSUM62 table");

  if (!args.empty() && !args.front().empty() && args.front().front() != '-') {
    const auto subs = app.get_subcommands([](CLI::App*) { return true; });
    const bool known =
        std::any_of(subs.begin(), subs.end(), [&](const CLI::App* s) { return s->get_name() == args.front(); });
    if (!known) {
      err << "avp: unknown subcommand '" << args.front() << "'\n" << app.help();
      return 1;
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "avp: " << e.what() << '\n';
    if (e.get_name() == "ExtrasError" || e.get_name() == "RequiredError" || app.get_subcommands().empty()) {
      err << app.help();
    }
    return 1;
  }

  try {
    if (featurize_cmd->parsed()) return cmd_featurize(fz);
    if (augment_cmd->parsed()) return cmd_augment(ag);
    if (train_cmd->parsed()) return cmd_train(tr, err);
    if (finetune_cmd->parsed()) return cmd_finetune(ft, err);
    if (predict_cmd->parsed()) return cmd_predict(pr);
    if (evaluate_cmd->parsed()) return cmd_evaluate(ev);
    if (compose_cmd->parsed()) return cmd_compose(cs);
    if (serve_cmd->parsed()) return cmd_serve(sv, err);
    if (dump_config_cmd->parsed()) {
      out << dump_config(config_from(dump_cfg_path));
      return 0;
    }
    if (dump_blosum_cmd->parsed()) {
      dump_blosum62(out);
      return 0;
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace avp::cli
