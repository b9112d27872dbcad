#include "avp/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "avp/errors.hpp"
#include "avp/format.hpp"

namespace avp {

namespace {

constexpr const char* kModule = "config";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError(kModule, "key '" + std::string(key) + "': '" + std::string(value) + "' is not " + expected);
}

template <typename T>
T parse_integer(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "an integer in range");
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(d)) {
    bad_value(key, v, "a finite number");
  }
  return d;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "true or false");
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view key, std::string_view v, Parse parse) {
  std::vector<T> out;
  if (v.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = v.find(',', start);
    out.push_back(parse(key, trim(v.substr(start, comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string show(int v) { return std::to_string(v); }
static_assert(std::is_same_v<std::size_t, std::uint64_t>, "seed keys reuse the size_t overloads");
std::string show(std::size_t v) { return std::to_string(v); }
std::string show(double v) { return format_g17(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(const std::string& v) { return v; }

template <typename T>
std::string show_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += show(v[i]);
  }
  return out;
}

void assign(std::string_view key, std::string_view v, int& out) { out = parse_integer<int>(key, v); }
void assign(std::string_view key, std::string_view v, std::size_t& out) { out = parse_integer<std::size_t>(key, v); }
void assign(std::string_view key, std::string_view v, double& out) { out = parse_double(key, v); }
void assign(std::string_view key, std::string_view v, bool& out) { out = parse_bool(key, v); }
void assign(std::string_view, std::string_view v, std::string& out) { out = std::string(v); }
void assign(std::string_view key, std::string_view v, std::vector<std::size_t>& out) {
  out = parse_list<std::size_t>(key, v, parse_integer<std::size_t>);
}
void assign(std::string_view key, std::string_view v, std::vector<double>& out) {
  out = parse_list<double>(key, v, parse_double);
}

template <typename T>
std::string show_any(const T& v) {
  if constexpr (std::is_same_v<T, std::vector<std::size_t>> || std::is_same_v<T, std::vector<double>>) {
    return show_list(v);
  } else {
    return show(v);
  }
}

struct Key {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <typename Access>
Key field(std::string name, Access access) {
  Key k;
  k.name = name;
  k.get = [access](const RunConfig& c) { return show_any(access(const_cast<RunConfig&>(c))); };
  k.set = [access, name](RunConfig& c, std::string_view v) { assign(name, v, access(c)); };
  return k;
}

#define AVP_KEY(name, expr) field(name, [](RunConfig& c) -> auto& { return expr; })

void add_train_keys(std::vector<Key>& keys, const std::string& section, TrainConfig RunConfig::*member) {
  auto k = [&](const char* leaf, auto access) {
    keys.push_back(field(section + "." + leaf, [member, access](RunConfig& c) -> auto& {
      return access(c.*member);
    }));
  };
  k("lr_peak", [](TrainConfig& t) -> auto& { return t.lr_peak; });
  k("weight_decay", [](TrainConfig& t) -> auto& { return t.weight_decay; });
  k("beta1", [](TrainConfig& t) -> auto& { return t.beta1; });
  k("beta2", [](TrainConfig& t) -> auto& { return t.beta2; });
  k("eps", [](TrainConfig& t) -> auto& { return t.eps; });
  k("warmup_epochs", [](TrainConfig& t) -> auto& { return t.warmup_epochs; });
  k("max_epochs", [](TrainConfig& t) -> auto& { return t.max_epochs; });
  k("batch_size", [](TrainConfig& t) -> auto& { return t.batch_size; });
  k("accum_steps", [](TrainConfig& t) -> auto& { return t.accum_steps; });
  k("patience", [](TrainConfig& t) -> auto& { return t.patience; });
  k("val_fraction", [](TrainConfig& t) -> auto& { return t.val_fraction; });
  k("seed", [](TrainConfig& t) -> auto& { return t.seed; });
}

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back(AVP_KEY("seqio.min_length", c.seqio.min_length));
    k.push_back(AVP_KEY("seqio.max_length", c.seqio.max_length));

    k.push_back(AVP_KEY("descriptor.cksaagp_max_gap", c.descriptor.cksaagp_max_gap));
    k.push_back(AVP_KEY("descriptor.distpair_max_dist", c.descriptor.distpair_max_dist));
    k.push_back(AVP_KEY("descriptor.paac_lambda", c.descriptor.paac_lambda));
    k.push_back(AVP_KEY("descriptor.paac_weight", c.descriptor.paac_weight));
    k.push_back(AVP_KEY("descriptor.qso_nlag", c.descriptor.qso_nlag));
    k.push_back(AVP_KEY("descriptor.qso_weight", c.descriptor.qso_weight));
    k.push_back(AVP_KEY("descriptor.binary_max_len", c.descriptor.binary_max_len));

    k.push_back(AVP_KEY("augment.n_fragments", c.augment.n_fragments));
    k.push_back(AVP_KEY("augment.m_steps", c.augment.m_steps));
    k.push_back(AVP_KEY("augment.insert_prob", c.augment.insert_prob));
    k.push_back(AVP_KEY("augment.delete_prob", c.augment.delete_prob));
    k.push_back(AVP_KEY("augment.mutate_prob", c.augment.mutate_prob));
    k.push_back(AVP_KEY("augment.tta_variants", c.augment.tta_variants));
    k.push_back(AVP_KEY("augment.tta_mutate_prob", c.augment.tta_mutate_prob));
    k.push_back(AVP_KEY("augment.seed", c.augment_seed));

    k.push_back(AVP_KEY("model.embed_dim", c.model.embed_dim));
    k.push_back(AVP_KEY("model.kernel_sizes", c.model.kernel_sizes));
    k.push_back(AVP_KEY("model.conv_channels", c.model.conv_channels));
    k.push_back(AVP_KEY("model.lstm_hidden", c.model.lstm_hidden));
    k.push_back(AVP_KEY("model.attention_dim", c.model.attention_dim));
    k.push_back(AVP_KEY("model.gate_hidden", c.model.gate_hidden));
    k.push_back(AVP_KEY("model.per_dim_gate", c.model.per_dim_gate));
    {
      Key f;
      f.name = "model.f_match";
      f.get = [](const RunConfig& c) {
        return std::string(c.model.f_match == FMatch::kIdentity ? "identity" : "linear");
      };
      f.set = [](RunConfig& c, std::string_view v) {
        if (v == "linear") {
          c.model.f_match = FMatch::kLinear;
        } else if (v == "identity") {
          c.model.f_match = FMatch::kIdentity;
        } else {
          bad_value("model.f_match", v, "linear or identity");
        }
      };
      k.push_back(std::move(f));
    }
    k.push_back(AVP_KEY("model.mlp_hidden", c.model.mlp_hidden));
    k.push_back(AVP_KEY("model.dropout", c.model.dropout));

    add_train_keys(k, "train", &RunConfig::train);
    k.push_back(AVP_KEY("train.focal_gamma", c.focal_gamma));
    k.push_back(AVP_KEY("train.focal_alpha", c.focal_alpha));
    k.push_back(AVP_KEY("train.contrastive_weight", c.weights.contrastive));
    k.push_back(AVP_KEY("train.consistency_weight", c.weights.consistency));
    k.push_back(AVP_KEY("train.positive_class", c.positive_class));
    add_train_keys(k, "finetune", &RunConfig::finetune);

    k.push_back(AVP_KEY("contrast.pos_capacity", c.contrast.pos_capacity));
    k.push_back(AVP_KEY("contrast.neg_capacity", c.contrast.neg_capacity));
    k.push_back(AVP_KEY("contrast.hard_negatives", c.contrast.hard_negatives));
    k.push_back(AVP_KEY("contrast.sampling_sharpness", c.contrast.sampling_sharpness));
    k.push_back(AVP_KEY("contrast.temperature_init", c.contrast.temperature_init));
    k.push_back(AVP_KEY("contrast.temperature_min", c.contrast.temperature_min));
    k.push_back(AVP_KEY("contrast.temperature_max", c.contrast.temperature_max));

    k.push_back(AVP_KEY("metrics.threshold", c.metrics.threshold));
    k.push_back(AVP_KEY("metrics.positive_class", c.metrics.positive_class));

    k.push_back(AVP_KEY("paths.embedder", c.paths.embedder));
    k.push_back(AVP_KEY("paths.embeddings", c.paths.embeddings));
    return k;
  }();
  return keys;
}

#undef AVP_KEY

}  // namespace

void RunConfig::validate() const {
  seqio.validate();
  descriptor.validate(seqio.min_length);
  augment.validate();
  model_config().validate();
  train.validate();
  finetune.validate();
  if (train.stage != 1 || finetune.stage != 2) throw ConfigError(kModule, "train / finetune stage mismatch");
  contrast.validate();
  weights.validate();
  FocalParams fp{focal_gamma, focal_alpha};
  fp.validate(focal_alpha.empty() ? 0 : focal_alpha.size());
  if (positive_class < 0) throw ConfigError(kModule, "train.positive_class must be non-negative");
  if (!(metrics.threshold >= 0.0 && metrics.threshold <= 1.0)) {
    throw ConfigError(kModule, "metrics.threshold must lie in [0, 1]");
  }
  if (metrics.positive_class < 0) throw ConfigError(kModule, "metrics.positive_class must be non-negative");
  if (!paths.embedder.empty() && !paths.embeddings.empty()) {
    throw ConfigError(kModule, "paths.embedder and paths.embeddings are mutually exclusive");
  }
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m = model;
  m.descriptor_dim = feature_dim(descriptor);
  return m;
}

FitOptions RunConfig::fit_options(int stage) const {
  FitOptions o;
  o.model = model_config();
  o.train = stage == 2 ? finetune : train;
  o.contrast = contrast;
  o.weights = weights;
  o.focal_gamma = focal_gamma;
  o.focal_alpha = focal_alpha;
  o.augment = augment;
  o.positive_class = positive_class;
  return o;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.push_back(k.name);
  return out;
}

std::string dump_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : key_table()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(kModule, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& table = key_table();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) throw ConfigError(kModule, "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) throw ConfigError(kModule, "key '" + std::string(key) + "' repeated");
    it->set(cfg, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(kModule, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace avp
