#include "topoae/training/losses.hpp"

#include "topoae/errors.hpp"

namespace topoae::training {

using diffnet::Tape;
using diffnet::Var;

namespace {

Tape& tape_of(const AutoencoderVars& vars) {
  if (vars.encoder.weight.empty() || !vars.encoder.weight.front().valid()) {
    throw ArgumentError("loss: autoencoder variables are not bound");
  }
  return *vars.encoder.weight.front().tape();
}

template <typename Build>
double evaluate(const Autoencoder& ae, Build&& build) {
  Tape tape;
  const AutoencoderVars vars = bind(tape, ae, false);
  return build(vars).value()(0, 0);
}

}  // namespace

Var reconstruction_term(const Autoencoder& ae, const AutoencoderVars& vars, const Matrix& batch) {
  if (batch.cols() == 0) throw ArgumentError("loss_reconstruction: empty batch");
  if (batch.rows() != ae.ambient_dim()) throw ArgumentError("loss_reconstruction: ambient dim mismatch");
  Tape& tape = tape_of(vars);
  Var x = tape.constant(batch);
  Var y = diffnet::forward(ae.decoder_spec, vars.decoder,
                           diffnet::forward(ae.encoder_spec, vars.encoder, x));
  return diffnet::sum_squares(diffnet::sub(x, y));
}

Var latent_reg_term(const Autoencoder& ae, const AutoencoderVars& vars, const Matrix& grid_points) {
  const int m1 = ae.latent_dim();
  if (grid_points.rows() != m1 || grid_points.cols() == 0) {
    throw ArgumentError("loss_latent_reg: points must be m1 x k with k >= 1");
  }
  Tape& tape = tape_of(vars);
  Var p = tape.constant(grid_points);
  const auto dec = diffnet::forward_jet_identity(ae.decoder_spec, vars.decoder, p);
  const auto enc = diffnet::forward_jet(ae.encoder_spec, vars.encoder, dec.value, dec.tangent);
  Var eye = tape.constant(Matrix::Identity(m1, m1).replicate(1, grid_points.cols()));
  return diffnet::sum_squares(diffnet::sub(eye, enc.tangent));
}

Var contractive_term(const Autoencoder& ae, const AutoencoderVars& vars, const Matrix& batch) {
  if (batch.cols() == 0) throw ArgumentError("loss_contractive: empty batch");
  if (batch.rows() != ae.ambient_dim()) throw ArgumentError("loss_contractive: ambient dim mismatch");
  Tape& tape = tape_of(vars);
  const double m2 = ae.ambient_dim();
  Var total;
  for (Eigen::Index c = 0; c < batch.cols(); ++c) {
    Var x = tape.constant(batch.col(c));
    const auto enc = diffnet::forward_jet_identity(ae.encoder_spec, vars.encoder, x);
    const auto dec = diffnet::forward_jet_identity(ae.decoder_spec, vars.decoder, enc.value);
    const Var& j_phi = enc.tangent;  // m1 x m2
    const Var& j_nu = dec.tangent;   // m2 x m1
    Var gram_nu = diffnet::matmul(diffnet::transpose(j_nu), j_nu);
    Var gram_phi = diffnet::matmul(j_phi, diffnet::transpose(j_phi));
    Var frob = diffnet::sum(diffnet::hadamard(gram_nu, gram_phi));
    Var tr = diffnet::trace(diffnet::matmul(j_phi, j_nu));
    Var term = diffnet::shift(diffnet::sub(frob, diffnet::scale(tr, 2.0)), m2);
    total = total.valid() ? diffnet::add(total, term) : term;
  }
  return total;
}

Var hybrid_reconstruction_term(const Autoencoder& ae, const AutoencoderVars& vars,
                               const Matrix& images, const Matrix& scaled_coeffs,
                               const chebyshev::RegressionOperator& regression,
                               const chebyshev::CoeffScaler& scaler) {
  if (scaler.size() != ae.decoder_spec.output_dim() || scaler.size() != regression.matrix().cols()) {
    throw ConfigError("hybrid loss: scaler, regression and decoder output sizes disagree");
  }
  if (scaled_coeffs.rows() != ae.ambient_dim()) {
    throw ConfigError("hybrid loss: encoder input dim must equal (n+1)^2");
  }
  if (images.rows() != regression.matrix().rows() || images.cols() != scaled_coeffs.cols() ||
      images.cols() == 0) {
    throw ArgumentError("hybrid loss: images do not match regression resolution or batch");
  }
  Tape& tape = tape_of(vars);
  Var theta = tape.constant(scaled_coeffs);
  Var decoded = diffnet::forward(ae.decoder_spec, vars.decoder,
                                 diffnet::forward(ae.encoder_spec, vars.encoder, theta));
  Var coeffs = diffnet::row_affine(decoded, scaler.inverse_gain(), scaler.inverse_bias());
  Var pixels = diffnet::matmul(tape.constant(regression.matrix()), coeffs);
  return diffnet::sum_squares(diffnet::sub(tape.constant(images), pixels));
}

double loss_reconstruction(const Autoencoder& ae, const Matrix& batch) {
  return evaluate(ae, [&](const AutoencoderVars& v) { return reconstruction_term(ae, v, batch); });
}

double loss_latent_reg(const Autoencoder& ae, const Matrix& grid_points) {
  return evaluate(ae, [&](const AutoencoderVars& v) { return latent_reg_term(ae, v, grid_points); });
}

double loss_contractive(const Autoencoder& ae, const Matrix& batch) {
  return evaluate(ae, [&](const AutoencoderVars& v) { return contractive_term(ae, v, batch); });
}

double loss_hybrid_reconstruction(const Autoencoder& ae, const Matrix& images,
                                  const Matrix& scaled_coeffs,
                                  const chebyshev::RegressionOperator& regression,
                                  const chebyshev::CoeffScaler& scaler) {
  return evaluate(ae, [&](const AutoencoderVars& v) {
    return hybrid_reconstruction_term(ae, v, images, scaled_coeffs, regression, scaler);
  });
}

}  // namespace topoae::training
