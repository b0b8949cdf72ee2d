#include "topoae/training/autoencoder.hpp"

#include <random>

#include "topoae/errors.hpp"

namespace topoae::training {

void Autoencoder::validate() const {
  diffnet::check_shapes(encoder_spec, encoder);
  diffnet::check_shapes(decoder_spec, decoder);
  const int m1 = encoder_spec.output_dim();
  const int m2 = encoder_spec.input_dim();
  if (decoder_spec.input_dim() != m1) {
    throw ArgumentError("Autoencoder: decoder input dim must equal encoder output dim");
  }
  if (decoder_spec.output_dim() != m2) {
    throw ArgumentError("Autoencoder: decoder output dim must equal encoder input dim");
  }
  if (m1 > m2) throw ArgumentError("Autoencoder: latent dim must not exceed ambient dim");
}

Vector Autoencoder::flatten() const {
  Vector flat(static_cast<Eigen::Index>(num_params()));
  const Vector e = encoder.flatten();
  flat.head(e.size()) = e;
  flat.tail(flat.size() - e.size()) = decoder.flatten();
  return flat;
}

void Autoencoder::assign(const Vector& flat) {
  if (flat.size() != static_cast<Eigen::Index>(num_params())) {
    throw ArgumentError("Autoencoder::assign: parameter count mismatch");
  }
  const auto ne = static_cast<Eigen::Index>(encoder.num_params());
  encoder.assign(flat.head(ne));
  decoder.assign(flat.tail(flat.size() - ne));
}

Matrix Autoencoder::encode(const Matrix& x) const {
  return diffnet::forward_batch(encoder_spec, encoder, x);
}

Matrix Autoencoder::decode(const Matrix& z) const {
  return diffnet::forward_batch(decoder_spec, decoder, z);
}

nlohmann::json Autoencoder::to_json() const {
  return {{"encoder", {{"spec", diffnet::to_json(encoder_spec)}, {"layers", diffnet::to_json(encoder)}}},
          {"decoder", {{"spec", diffnet::to_json(decoder_spec)}, {"layers", diffnet::to_json(decoder)}}}};
}

Autoencoder Autoencoder::from_json(const nlohmann::json& j) {
  Autoencoder ae;
  try {
    ae.encoder_spec = diffnet::spec_from_json(j.at("encoder").at("spec"));
    ae.encoder = diffnet::weights_from_json(j.at("encoder").at("layers"));
    ae.decoder_spec = diffnet::spec_from_json(j.at("decoder").at("spec"));
    ae.decoder = diffnet::weights_from_json(j.at("decoder").at("layers"));
    ae.validate();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  return ae;
}

Autoencoder make_autoencoder(const AutoencoderShape& shape, std::uint64_t seed) {
  Autoencoder ae;
  ae.encoder_spec.layer_sizes.push_back(shape.ambient_dim);
  for (int h : shape.hidden) ae.encoder_spec.layer_sizes.push_back(h);
  ae.encoder_spec.layer_sizes.push_back(shape.latent_dim);
  ae.encoder_spec.activation = shape.activation;
  ae.encoder_spec.output_activation = diffnet::Activation::kSin;

  ae.decoder_spec.layer_sizes.assign(ae.encoder_spec.layer_sizes.rbegin(),
                                     ae.encoder_spec.layer_sizes.rend());
  ae.decoder_spec.activation = shape.activation;
  ae.decoder_spec.output_activation = shape.decoder_output;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xAEu};
  std::vector<std::uint64_t> s(2);
  seq.generate(s.begin(), s.end());
  ae.encoder = diffnet::init_weights(ae.encoder_spec, s[0]);
  ae.decoder = diffnet::init_weights(ae.decoder_spec, s[1]);
  ae.validate();
  return ae;
}

AutoencoderVars bind(diffnet::Tape& tape, const Autoencoder& ae, bool trainable) {
  return {diffnet::bind(tape, ae.encoder, trainable), diffnet::bind(tape, ae.decoder, trainable)};
}

Vector gradient_of(const diffnet::Tape& tape, const AutoencoderVars& vars) {
  const Vector ge = diffnet::gradient_of(tape, vars.encoder).flatten();
  const Vector gd = diffnet::gradient_of(tape, vars.decoder).flatten();
  Vector g(ge.size() + gd.size());
  g << ge, gd;
  return g;
}

}  // namespace topoae::training
