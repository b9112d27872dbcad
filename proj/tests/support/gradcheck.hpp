#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avp/model.hpp"

namespace avp::testing {

struct GradCheckSummary {
  std::string name;
  int trials = 0;
  std::size_t coordinates = 0;
  double worst = 0.0;  // max relative error over all trials
};

// Every differentiable primitive with a randomized finite-difference case.
std::vector<std::string> primitive_names();

// `trials` random shapes and values for one primitive, each reduced to a
// scalar through a random linear functional.
GradCheckSummary check_primitive(const std::string& name, int trials, std::uint64_t seed);

// Small architecture used by the composite check.
ModelConfig tiny_model_config();

// Composite training objective (contrastive + focal + consistency) of a
// 3-sequence batch with augmented twins, differentiated with respect to
// every model tensor.
GradCheckSummary check_composite_model(int trials, std::uint64_t seed);

}  // namespace avp::testing
