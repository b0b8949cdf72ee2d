#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "topoae/diffnet/mlp.hpp"

namespace topoae::training {

using diffnet::Matrix;
using diffnet::Vector;

// Encoder phi: R^{m2} -> Omega_{m1}, decoder nu: Omega_{m1} -> R^{m2}.
struct Autoencoder {
  diffnet::MlpSpec encoder_spec;
  diffnet::MlpWeights encoder;
  diffnet::MlpSpec decoder_spec;
  diffnet::MlpWeights decoder;

  // Throws ArgumentError unless encoder out = decoder in = m1 <= m2 =
  // encoder in = decoder out and the weights match their specs.
  void validate() const;

  int latent_dim() const { return encoder_spec.output_dim(); }
  int ambient_dim() const { return encoder_spec.input_dim(); }

  std::size_t num_params() const { return encoder.num_params() + decoder.num_params(); }
  // Encoder parameters first, then decoder.
  Vector flatten() const;
  void assign(const Vector& flat);

  Matrix encode(const Matrix& x) const;
  Matrix decode(const Matrix& z) const;
  Matrix reconstruct(const Matrix& x) const { return decode(encode(x)); }

  nlohmann::json to_json() const;
  static Autoencoder from_json(const nlohmann::json& j);
};

struct AutoencoderShape {
  int ambient_dim = 0;
  int latent_dim = 0;
  std::vector<int> hidden;  // encoder widths; the decoder mirrors them
  diffnet::Activation activation = diffnet::Activation::kSin;
  diffnet::Activation decoder_output = diffnet::Activation::kIdentity;
};

// Encoder output is always sin so codes lie in [-1, 1]^{m1}.
Autoencoder make_autoencoder(const AutoencoderShape& shape, std::uint64_t seed);

struct AutoencoderVars {
  diffnet::MlpVars encoder;
  diffnet::MlpVars decoder;
};

AutoencoderVars bind(diffnet::Tape& tape, const Autoencoder& ae, bool trainable = true);

// Flattened gradient in Autoencoder::flatten order.
Vector gradient_of(const diffnet::Tape& tape, const AutoencoderVars& vars);

}  // namespace topoae::training
