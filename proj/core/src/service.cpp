#include "avp/service.hpp"

#include <algorithm>

#include "avp/errors.hpp"
#include "json.hpp"

namespace avp {

namespace {

using nlohmann::json;

ServiceResponse reply(int status, const json& body) { return {status, body.dump()}; }

ServiceResponse client_error(const std::string& message) { return reply(400, json{{"error", message}}); }

// FNV-1a, used to key the TTA stream on the residues so equal requests give
// equal answers.
std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

PredictionService::PredictionService(Checkpoint checkpoint, std::unique_ptr<EmbeddingProvider> embedder,
                                     DescriptorConfig descriptors, LengthBounds bounds, AugmentConfig augment,
                                     bool tta_default, std::uint64_t seed)
    : checkpoint_(std::move(checkpoint)),
      embedder_(std::move(embedder)),
      pipeline_(descriptors, *embedder_, bounds),
      augment_(augment),
      tta_default_(tta_default),
      seed_(seed) {
  checkpoint_.config.validate();
  augment_.validate();
  if (pipeline_.embed_dim() != checkpoint_.config.embed_dim ||
      pipeline_.descriptor_dim() != checkpoint_.config.descriptor_dim) {
    throw VersionError("service", "checkpoint expects " + std::to_string(checkpoint_.config.embed_dim) + " + " +
                                      std::to_string(checkpoint_.config.descriptor_dim) +
                                      " input columns, the feature pipeline gives " +
                                      std::to_string(pipeline_.embed_dim()) + " + " +
                                      std::to_string(pipeline_.descriptor_dim()));
  }
}

ServiceResponse PredictionService::handle_health() const { return reply(200, json{{"status", "ok"}}); }

ServiceResponse PredictionService::handle_predict(std::string_view body) const {
  json req;
  try {
    req = json::parse(body.begin(), body.end());
  } catch (const json::parse_error& e) {
    return client_error(std::string("body is not valid JSON: ") + e.what());
  }
  if (!req.is_object()) return client_error("body must be a JSON object");
  const auto seqs = req.find("sequences");
  if (seqs == req.end()) return client_error("missing field 'sequences'");
  if (!seqs->is_array()) return client_error("'sequences' must be an array");
  for (const auto& s : *seqs) {
    if (!s.is_string()) return client_error("'sequences' must contain only strings");
  }
  std::vector<std::string> ids;
  if (const auto it = req.find("ids"); it != req.end()) {
    if (!it->is_array() || it->size() != seqs->size()) {
      return client_error("'ids' must be an array with one entry per sequence");
    }
    for (const auto& id : *it) {
      if (!id.is_string() || id.get<std::string>().empty()) return client_error("'ids' must be non-empty strings");
      ids.push_back(id.get<std::string>());
    }
  } else {
    for (std::size_t i = 0; i < seqs->size(); ++i) ids.push_back("seq" + std::to_string(i));
  }
  bool tta = tta_default_;
  if (const auto it = req.find("tta"); it != req.end()) {
    if (!it->is_boolean()) return client_error("'tta' must be a boolean");
    tta = it->get<bool>();
  }

  // Validate everything before any model work.
  std::vector<PeptideSequence> items;
  for (std::size_t i = 0; i < seqs->size(); ++i) {
    PeptideSequence p{ids[i], seqs->at(i).get<std::string>(), std::nullopt};
    std::transform(p.residues.begin(), p.residues.end(), p.residues.begin(),
                   [](char c) { return c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A') : c; });
    try {
      validate_sequence(p, pipeline_.bounds());
    } catch (const ValidationError& e) {
      return reply(422, json{{"error", e.what()},
                             {"index", i},
                             {"id", p.id},
                             {"character", std::string(1, e.offending())}});
    } catch (const Error& e) {
      return reply(422, json{{"error", e.what()}, {"index", i}, {"id", p.id}});
    }
    items.push_back(std::move(p));
  }

  json results = json::array();
  const auto& cfg = checkpoint_.config;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const ForwardOutput out = predict(checkpoint_.params, cfg, pipeline_.bundle(items[i]));
    std::vector<double> probs = out.probs;
    if (tta) {
      PortableRng rng(derive_seed(seed_, fnv1a(items[i].residues)));
      probs = tta_predict(checkpoint_.params, cfg, pipeline_, items[i], augment_, rng);
    }
    const auto label = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    results.push_back(json{{"index", i},
                           {"id", items[i].id},
                           {"probabilities", probs},
                           {"predicted_label", label},
                           {"gate_lambda", out.gate_lambda}});
  }
  return reply(200, json{{"results", results}});
}

}  // namespace avp
