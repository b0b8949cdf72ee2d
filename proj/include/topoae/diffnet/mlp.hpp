#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "topoae/diffnet/tape.hpp"

namespace topoae::diffnet {

// kSinUnit is (sin(z) + 1) / 2, used as a decoder output map onto [0, 1].
enum class Activation { kSin, kTanh, kIdentity, kSinUnit };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct MlpSpec {
  std::vector<int> layer_sizes;  // [d_in, h_1, ..., h_L, d_out]
  Activation activation = Activation::kSin;
  Activation output_activation = Activation::kIdentity;

  void validate() const;
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  std::size_t num_layers() const { return layer_sizes.size() - 1; }
  Activation activation_of(std::size_t layer) const {
    return layer + 1 == num_layers() ? output_activation : activation;
  }
  std::size_t num_params() const;

  bool operator==(const MlpSpec&) const = default;
};

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

struct MlpWeights {
  std::vector<Layer> layers;

  std::size_t num_params() const;
  // Layer by layer: weight (column-major), then bias.
  Vector flatten() const;
  void assign(const Vector& flat);
  bool all_finite() const;
};

void check_shapes(const MlpSpec& spec, const MlpWeights& weights);

// Uniform Glorot init in [-sqrt(6/(fan_in+fan_out)), +...]; zero biases.
MlpWeights init_weights(const MlpSpec& spec, std::uint64_t seed);

struct ForwardTrace {
  std::vector<Vector> pre_activations;  // z_l, one per layer
  std::vector<Vector> activations;      // a_0 = x, a_1, ..., a_L
};

struct ForwardResult {
  Vector output;
  ForwardTrace trace;
};

ForwardResult forward(const MlpSpec& spec, const MlpWeights& weights, const Vector& x);

// Column-wise batch evaluation (d_in x B -> d_out x B).
Matrix forward_batch(const MlpSpec& spec, const MlpWeights& weights, const Matrix& x);

// d_out x d_in Jacobian by the layerwise product W_L diag(s_{L-1}) ... diag(s_1) W_1.
Matrix jacobian(const MlpSpec& spec, const MlpWeights& weights, const Vector& x);

// --- differentiable path ---------------------------------------------------

struct MlpVars {
  std::vector<Var> weight;
  std::vector<Var> bias;
};

MlpVars bind(Tape& tape, const MlpWeights& weights, bool trainable = true);

// Gradient shaped like the weights from a tape on which backward() ran.
MlpWeights gradient_of(const Tape& tape, const MlpVars& vars);

Var forward(const MlpSpec& spec, const MlpVars& vars, Var x);

// Value and forward tangents. `tangent` carries k = tangent.cols()/x.cols()
// directions per sample, stored sample-major.
struct Jet {
  Var value;
  Var tangent;
};

Jet forward_jet(const MlpSpec& spec, const MlpVars& vars, Var x, Var tangent);

// Jet seeded with the identity for every sample, so the returned tangent is
// [J(x_1) J(x_2) ...] (d_out x B*d_in).
Jet forward_jet_identity(const MlpSpec& spec, const MlpVars& vars, Var x);

using ScalarLoss = std::function<Var(Tape&, const MlpVars&)>;

// Exact gradient of loss(weights) by reverse sweep over the recorded graph.
// Losses may contain Jacobian entries built by forward_jet*.
MlpWeights grad_scalar_loss(const ScalarLoss& loss, const MlpWeights& weights);

// Checkpoint serialisation; weights row-major.
nlohmann::json to_json(const MlpSpec& spec);
MlpSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MlpWeights& weights);
MlpWeights weights_from_json(const nlohmann::json& j);

}  // namespace topoae::diffnet
