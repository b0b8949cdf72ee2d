#pragma once

#include <cstdint>
#include <utility>

#include <json.hpp>

#include "topoae/diffnet/tape.hpp"

namespace topoae::diffnet {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moments are kept over the flattened parameter vector (same order as
// MlpWeights::flatten / Autoencoder::flatten).
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  Vector first_moment;
  Vector second_moment;

  AdamState() = default;
  AdamState(Eigen::Index num_params, AdamConfig cfg);

  // Bias-corrected Adam update in place. Throws NumericalError on a
  // non-finite gradient, leaving weights and state untouched.
  void update(Vector& weights, const Vector& gradient);

  nlohmann::json to_json() const;
  static AdamState from_json(const nlohmann::json& j);
};

std::pair<Vector, AdamState> adam_step(const AdamState& state, const Vector& weights,
                                       const Vector& gradient);

}  // namespace topoae::diffnet
