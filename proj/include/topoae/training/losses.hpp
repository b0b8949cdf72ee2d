#pragma once

#include "topoae/chebyshev.hpp"
#include "topoae/training/autoencoder.hpp"

namespace topoae::training {

// Columns of every matrix argument are samples.

// sum_x ||x - nu(phi(x))||^2
double loss_reconstruction(const Autoencoder& ae, const Matrix& batch);

// sum_p ||I - J(phi o nu)(p)||_F^2 over latent points p (m1 x k).
double loss_latent_reg(const Autoencoder& ae, const Matrix& grid_points);

// sum_x ||J(nu o phi)(x) - I||_F^2 in the ambient space.
double loss_contractive(const Autoencoder& ae, const Matrix& batch);

// Pixel-space loss of an autoencoder acting on scaled Chebyshev
// coefficients: sum_d ||d - R unscale(nu(phi(theta_d)))||^2.
double loss_hybrid_reconstruction(const Autoencoder& ae, const Matrix& images,
                                  const Matrix& scaled_coeffs,
                                  const chebyshev::RegressionOperator& regression,
                                  const chebyshev::CoeffScaler& scaler);

// Differentiable versions recorded on the tape that owns `vars`.
diffnet::Var reconstruction_term(const Autoencoder& ae, const AutoencoderVars& vars,
                                 const Matrix& batch);
diffnet::Var latent_reg_term(const Autoencoder& ae, const AutoencoderVars& vars,
                             const Matrix& grid_points);
// Evaluated per sample through ||J_nu J_phi||_F^2 - 2 tr(J_phi J_nu) + m2, which
// needs only m1 x m1 products instead of the m2 x m2 Jacobian.
diffnet::Var contractive_term(const Autoencoder& ae, const AutoencoderVars& vars,
                              const Matrix& batch);
diffnet::Var hybrid_reconstruction_term(const Autoencoder& ae, const AutoencoderVars& vars,
                                        const Matrix& images, const Matrix& scaled_coeffs,
                                        const chebyshev::RegressionOperator& regression,
                                        const chebyshev::CoeffScaler& scaler);

}  // namespace topoae::training
