#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "avp/augment.hpp"
#include "avp/embed.hpp"
#include "avp/model.hpp"
#include "avp/train.hpp"

namespace avp {

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
};

// Request handling for the prediction endpoint over one immutable model.
// Handlers are const and safe to call from concurrent threads.
//
// POST body: {"sequences": ["ACDE...", ...], "ids": [...] (optional),
//             "tta": bool (optional, default from construction)}
// 200: {"results": [{"index", "id", "probabilities", "predicted_label",
//       "gate_lambda"}, ...]}
// 400: body is not JSON or does not have the shape above.
// 422: a sequence fails validation; names the sequence and the character.
class PredictionService {
 public:
  PredictionService(Checkpoint checkpoint, std::unique_ptr<EmbeddingProvider> embedder, DescriptorConfig descriptors,
                    LengthBounds bounds, AugmentConfig augment, bool tta_default, std::uint64_t seed);

  ServiceResponse handle_predict(std::string_view body) const;
  ServiceResponse handle_health() const;

  const Checkpoint& checkpoint() const noexcept { return checkpoint_; }

 private:
  Checkpoint checkpoint_;
  std::unique_ptr<EmbeddingProvider> embedder_;
  FeaturePipeline pipeline_;
  AugmentConfig augment_;
  bool tta_default_;
  std::uint64_t seed_;
};

}  // namespace avp
