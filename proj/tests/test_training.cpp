#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "topoae/chebyshev.hpp"
#include "topoae/errors.hpp"
#include "topoae/training/losses.hpp"
#include "topoae/training/train.hpp"

using namespace topoae;
using namespace topoae::training;
using diffnet::Activation;

namespace {

Autoencoder linear_pair(const Matrix& enc, const Matrix& dec) {
  Autoencoder ae;
  ae.encoder_spec = {{static_cast<int>(enc.cols()), static_cast<int>(enc.rows())}, Activation::kIdentity,
                     Activation::kIdentity};
  ae.decoder_spec = {{static_cast<int>(dec.cols()), static_cast<int>(dec.rows())}, Activation::kIdentity,
                     Activation::kIdentity};
  ae.encoder.layers = {{enc, Vector::Zero(enc.rows())}};
  ae.decoder.layers = {{dec, Vector::Zero(dec.rows())}};
  ae.validate();
  return ae;
}

Matrix uniform(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Autoencoder random_ae(int m2, int m1, std::vector<int> hidden, std::uint64_t seed,
                      Activation out = Activation::kIdentity) {
  auto ae = make_autoencoder({m2, m1, std::move(hidden), Activation::kSin, out}, seed);
  std::mt19937_64 rng(seed + 1);
  for (auto* net : {&ae.encoder, &ae.decoder}) {
    for (auto& l : net->layers) l.bias = uniform(l.bias.size(), 1, rng, -0.5, 0.5);
  }
  return ae;
}

Matrix composite_jacobian_fd(const Autoencoder& ae, const Vector& x, bool latent_side) {
  const double h = 1e-5;
  const auto f = [&](const Vector& v) -> Vector {
    return latent_side ? Vector(ae.encode(ae.decode(v))) : Vector(ae.reconstruct(v));
  };
  Matrix j(x.size(), x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    Vector p = x;
    Vector m = x;
    p(c) += h;
    m(c) -= h;
    j.col(c) = (f(p) - f(m)) / (2 * h);
  }
  return j;
}

Vector fd_gradient(const Autoencoder& ae, const std::function<double(const Autoencoder&)>& loss, double h) {
  const Vector p = ae.flatten();
  Vector g(p.size());
  Autoencoder work = ae;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    Vector a = p;
    Vector b = p;
    a(i) += h;
    b(i) -= h;
    work.assign(a);
    const double fa = loss(work);
    work.assign(b);
    g(i) = (fa - loss(work)) / (2 * h);
  }
  return g;
}

template <class Term>
Vector tape_gradient(const Autoencoder& ae, Term term) {
  diffnet::Tape tape;
  const auto vars = bind(tape, ae);
  tape.backward(term(vars));
  return gradient_of(tape, vars);
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("loss examples on linear pairs") {
    std::mt19937_64 rng(1);
    const Matrix x2 = uniform(2, 4, rng);
    const auto id = linear_pair(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    CHECK(loss_reconstruction(id, x2) == 0.0);
    CHECK(loss_latent_reg(id, x2) == 0.0);
    CHECK(loss_contractive(id, x2) == doctest::Approx(0.0).epsilon(1e-15));

    const auto twice = linear_pair(2 * Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    CHECK(loss_latent_reg(twice, x2) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(loss_reconstruction(twice, x2) == doctest::Approx(x2.squaredNorm()).epsilon(1e-14));

    const auto half = linear_pair(0.5 * Matrix::Identity(3, 3), Matrix::Identity(3, 3));
    CHECK(loss_contractive(half, uniform(3, 1, rng)) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(loss_contractive(half, uniform(3, 5, rng)) == doctest::Approx(3.75).epsilon(1e-14));

    Matrix p = Matrix::Zero(2, 3);
    p(0, 0) = 1;
    p(1, 1) = 1;
    const auto proj = linear_pair(p, p.transpose());
    CHECK(loss_latent_reg(proj, x2) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(loss_contractive(proj, uniform(3, 2, rng)) == doctest::Approx(2.0).epsilon(1e-14));
  }

  TEST_CASE("property: loss values match central-difference Jacobians") {
    for (std::uint64_t s = 0; s < 8; ++s) {
      std::mt19937_64 rng(100 + s);
      const int m1 = 1 + static_cast<int>(rng() % 3);
      const int m2 = m1 + static_cast<int>(rng() % 3);
      const auto ae = random_ae(m2, m1, {4, 3}, s);
      const Matrix z = uniform(m1, 3, rng);
      const Matrix x = uniform(m2, 3, rng);
      double latent = 0.0;
      double ambient = 0.0;
      double recon = 0.0;
      for (Eigen::Index c = 0; c < 3; ++c) {
        latent += (Matrix::Identity(m1, m1) - composite_jacobian_fd(ae, z.col(c), true)).squaredNorm();
        ambient += (Matrix::Identity(m2, m2) - composite_jacobian_fd(ae, x.col(c), false)).squaredNorm();
        recon += (x.col(c) - ae.reconstruct(x.col(c))).squaredNorm();
      }
      CHECK(loss_latent_reg(ae, z) == doctest::Approx(latent).epsilon(1e-7));
      CHECK(loss_contractive(ae, x) == doctest::Approx(ambient).epsilon(1e-7));
      CHECK(loss_reconstruction(ae, x) == doctest::Approx(recon).epsilon(1e-12));
    }
  }

  TEST_CASE("property: loss gradients match finite differences") {
    for (std::uint64_t s = 0; s < 6; ++s) {
      std::mt19937_64 rng(200 + s);
      const int m1 = 1 + static_cast<int>(rng() % 3);
      const int m2 = m1 + 1 + static_cast<int>(rng() % 2);
      const auto ae = random_ae(m2, m1, {5, 4}, s);
      const Matrix x = uniform(m2, 4, rng);
      const Matrix z = uniform(m1, 5, rng);
      const double h = 1e-6;

      const Vector gr = tape_gradient(ae, [&](const AutoencoderVars& v) { return reconstruction_term(ae, v, x); });
      const Vector fr = fd_gradient(ae, [&](const Autoencoder& a) { return loss_reconstruction(a, x); }, h);
      CHECK((gr - fr).norm() / std::max(1.0, fr.norm()) < 1e-6);

      const Vector gl = tape_gradient(ae, [&](const AutoencoderVars& v) { return latent_reg_term(ae, v, z); });
      const Vector fl = fd_gradient(ae, [&](const Autoencoder& a) { return loss_latent_reg(a, z); }, h);
      CHECK((gl - fl).norm() / std::max(1.0, fl.norm()) < 1e-6);

      const Vector gc = tape_gradient(ae, [&](const AutoencoderVars& v) { return contractive_term(ae, v, x); });
      const Vector fc = fd_gradient(ae, [&](const Autoencoder& a) { return loss_contractive(a, x); }, h);
      CHECK((gc - fc).norm() / std::max(1.0, fc.norm()) < 1e-6);
    }
  }

  TEST_CASE("tape terms agree with the plain loss values") {
    const auto ae = random_ae(5, 2, {6}, 9);
    std::mt19937_64 rng(9);
    const Matrix x = uniform(5, 3, rng);
    const Matrix z = uniform(2, 4, rng);
    diffnet::Tape tape;
    const auto v = bind(tape, ae, false);
    CHECK(reconstruction_term(ae, v, x).value()(0, 0) == doctest::Approx(loss_reconstruction(ae, x)).epsilon(1e-13));
    CHECK(latent_reg_term(ae, v, z).value()(0, 0) == doctest::Approx(loss_latent_reg(ae, z)).epsilon(1e-13));
    CHECK(contractive_term(ae, v, x).value()(0, 0) == doctest::Approx(loss_contractive(ae, x)).epsilon(1e-12));
  }

  TEST_CASE("hybrid loss") {
    const int r = 8;
    const int n = 3;
    const auto op = chebyshev::build_regression(r, n);
    std::mt19937_64 rng(3);
    const Matrix images = uniform(r * r, 5, rng, 0.0, 1.0);
    const Matrix coeffs = op.solve(images);
    const auto scaler = chebyshev::coeff_scaler(coeffs);
    const Matrix scaled = scaler.apply(coeffs);
    const int k = (n + 1) * (n + 1);

    const auto id = linear_pair(Matrix::Identity(k, k), Matrix::Identity(k, k));
    double residuals = 0.0;
    for (Eigen::Index c = 0; c < images.cols(); ++c) {
      const Vector col = images.col(c);
      residuals += std::pow(chebyshev::fit(op, {col.data(), static_cast<std::size_t>(col.size())}).residual, 2);
    }
    CHECK(loss_hybrid_reconstruction(id, images, scaled, op, scaler) == doctest::Approx(residuals).epsilon(1e-10));

    auto ae = random_ae(k, 4, {6}, 5, Activation::kSin);
    const Matrix pix = op.matrix() * scaler.unapply(ae.reconstruct(scaled));
    const double direct = (images - pix).squaredNorm();
    CHECK(loss_hybrid_reconstruction(ae, images, scaled, op, scaler) == doctest::Approx(direct).epsilon(1e-12));

    const Vector g = tape_gradient(ae, [&](const AutoencoderVars& v) {
      return hybrid_reconstruction_term(ae, v, images, scaled, op, scaler);
    });
    const Vector fd = fd_gradient(
        ae, [&](const Autoencoder& a) { return loss_hybrid_reconstruction(a, images, scaled, op, scaler); }, 1e-6);
    CHECK((g - fd).norm() / std::max(1.0, fd.norm()) < 1e-6);
  }

  TEST_CASE("autoencoder construction") {
    const auto ae = make_autoencoder({15, 2, {6, 6}, Activation::kSin, Activation::kIdentity}, 4);
    CHECK(ae.encoder_spec.layer_sizes == std::vector<int>{15, 6, 6, 2});
    CHECK(ae.decoder_spec.layer_sizes == std::vector<int>{2, 6, 6, 15});
    CHECK(ae.encoder_spec.output_activation == Activation::kSin);
    std::mt19937_64 rng(4);
    const Matrix codes = ae.encode(uniform(15, 30, rng, -5, 5));
    CHECK(codes.cwiseAbs().maxCoeff() <= 1.0);
    CHECK_THROWS_AS(make_autoencoder({2, 3, {4}, Activation::kSin, Activation::kIdentity}, 1), ArgumentError);

    const auto back = Autoencoder::from_json(nlohmann::json::parse(ae.to_json().dump()));
    CHECK(back.flatten() == ae.flatten());
    Autoencoder copy = ae;
    copy.assign(ae.flatten());
    CHECK(copy.flatten() == ae.flatten());
    CHECK(static_cast<std::size_t>(ae.flatten().size()) == ae.num_params());
  }

  TEST_CASE("latent grid sampler") {
    std::mt19937_64 rng(1);
    LatentGridSampler small(2, 5);
    CHECK(small.enumerated());
    const Matrix p = small.sample(36, rng);
    CHECK(p.cols() == 36);
    std::set<std::pair<double, double>> seen;
    for (Eigen::Index c = 0; c < 36; ++c) seen.insert({p(0, c), p(1, c)});
    CHECK(seen.size() == 36);

    LatentGridSampler big(10, 21);
    CHECK_FALSE(big.enumerated());
    const Matrix q = big.sample(50, rng);
    const auto& nodes = big.grid1d().nodes;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      CHECK(std::find(nodes.begin(), nodes.end(), q.data()[i]) != nodes.end());
    }
  }

  TEST_CASE("training reduces the loss and is deterministic") {
    std::mt19937_64 rng(7);
    Matrix x(4, 12);
    for (Eigen::Index c = 0; c < 12; ++c) {
      const double t = 2 * M_PI * c / 12.0;
      x.col(c) << std::cos(t), std::sin(t), 0.5 * std::cos(t), -0.3 * std::sin(t);
    }
    const auto init = make_autoencoder({4, 2, {8}, Activation::kSin, Activation::kIdentity}, 11);
    TrainConfig cfg;
    cfg.variant = Variant::kAeReg;
    cfg.lambda = 0.1;
    cfg.grid_degree = 7;
    cfg.grid_batch = 8;
    cfg.batch_size = 4;
    cfg.epochs = 200;
    cfg.learning_rate = 5e-3;
    cfg.seed = 3;
    const auto a = train(init, x, cfg);
    const auto b = train(init, x, cfg);
    REQUIRE(a.report.epochs.size() == 200);
    CHECK(a.report.epochs.back().total < 0.5 * a.report.epochs.front().total);
    CHECK(a.model.flatten() == b.model.flatten());
    std::ostringstream ca;
    std::ostringstream cb;
    a.report.write_csv(ca);
    b.report.write_csv(cb);
    CHECK(ca.str() == cb.str());
    CHECK(ca.str().rfind("epoch,l0,l1,total\n", 0) == 0);
    CHECK(a.optimizer.step > 0);

    cfg.seed = 4;
    CHECK(train(init, x, cfg).model.flatten() != a.model.flatten());
  }

  TEST_CASE("zero lambda latent regularisation equals the plain autoencoder") {
    std::mt19937_64 rng(8);
    const Matrix x = uniform(3, 10, rng);
    const auto init = make_autoencoder({3, 2, {5}, Activation::kSin, Activation::kIdentity}, 2);
    TrainConfig cfg;
    cfg.grid_degree = 5;
    cfg.grid_batch = 6;
    cfg.batch_size = 5;
    cfg.epochs = 30;
    cfg.lambda = 0.0;
    cfg.seed = 9;
    cfg.variant = Variant::kAeReg;
    const auto reg = train(init, x, cfg);
    cfg.variant = Variant::kMlpAe;
    const auto plain = train(init, x, cfg);
    CHECK(reg.model.flatten() == plain.model.flatten());
  }

  TEST_CASE("invalid training configs") {
    const auto ae = make_autoencoder({3, 2, {4}, Activation::kSin, Activation::kIdentity}, 1);
    const Matrix x = Matrix::Zero(3, 4);
    TrainConfig cfg;
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(train(ae, x, cfg), ConfigError);
    cfg = {};
    cfg.variant = Variant::kHybridAeReg;
    CHECK_THROWS(train(ae, x, cfg));
    cfg = {};
    CHECK_THROWS(train(ae, Matrix::Zero(4, 4), cfg));
    Matrix bad = x;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(train(ae, bad, cfg), TrainingAborted);
  }

  TEST_CASE("non-finite training aborts with the last finite model") {
    const auto ae = make_autoencoder({2, 2, {3}, Activation::kSin, Activation::kIdentity}, 1);
    Matrix x = Matrix::Constant(2, 4, 1e200);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    try {
      train(ae, x, cfg);
      FAIL("expected an abort");
    } catch (const TrainingAborted& e) {
      CHECK(e.model.flatten() == ae.flatten());
      CHECK(e.report.epochs.empty());
    }
  }

  TEST_CASE("variant names") {
    for (auto v : {Variant::kMlpAe, Variant::kAeReg, Variant::kContraAe, Variant::kHybridAeReg}) {
      CHECK(variant_from_string(to_string(v)) == v);
    }
    CHECK_THROWS(variant_from_string("nope"));
  }
}
