#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "topoae/errors.hpp"
#include "topoae/evaluation/geodesic.hpp"
#include "topoae/evaluation/metrics.hpp"
#include "topoae/evaluation/topology.hpp"

using namespace topoae;
using namespace topoae::evaluation;

namespace {

Matrix uniform(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Matrix loop(std::initializer_list<std::pair<double, double>> pts) {
  Matrix m(2, static_cast<Eigen::Index>(pts.size()));
  Eigen::Index c = 0;
  for (auto [x, y] : pts) m.col(c++) << x, y;
  return m;
}

training::Autoencoder scaled_identity(int m, double s) {
  training::Autoencoder ae;
  ae.encoder_spec = {{m, m}, diffnet::Activation::kIdentity, diffnet::Activation::kIdentity};
  ae.decoder_spec = ae.encoder_spec;
  ae.encoder.layers = {{s * Matrix::Identity(m, m), Eigen::VectorXd::Zero(m)}};
  ae.decoder.layers = {{Matrix::Identity(m, m), Eigen::VectorXd::Zero(m)}};
  return ae;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("psnr examples") {
    std::mt19937_64 rng(1);
    const Matrix a = uniform(8, 8, rng);
    CHECK(psnr(a, a) == kPsnrCap);
    CHECK(psnr(Matrix::Zero(4, 4), Matrix::Ones(4, 4)) == doctest::Approx(0.0));
    CHECK(psnr(Matrix::Zero(4, 4), Matrix::Constant(4, 4, 0.1)) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK_THROWS_AS(psnr(a, Matrix::Zero(8, 7)), ArgumentError);
  }

  TEST_CASE("property: psnr decreases along nested perturbations") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
      const Matrix ref = uniform(16, 16, rng);
      const Matrix dir = uniform(16, 16, rng, -1, 1);
      double last = psnr(ref, ref);
      for (double s = 0.01; s < 1.0; s *= 2) {
        const double p = psnr(ref, ref + s * dir);
        CHECK(p < last);
        last = p;
      }
    }
  }

  TEST_CASE("ssim examples") {
    std::mt19937_64 rng(3);
    const Matrix a = uniform(32, 32, rng);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ssim(Matrix::Constant(9, 9, 0.4), Matrix::Constant(9, 9, 0.4)) == doctest::Approx(1.0).epsilon(1e-15));
    const Matrix shifted = (a.array() + 0.5).min(1.0).matrix();
    CHECK(std::abs(ssim(a, shifted) - oracle::ssim(a, shifted)) < 1e-9);
    CHECK(ssim(a, shifted) < 1.0);
    CHECK_THROWS_AS(ssim(Matrix::Zero(6, 6), Matrix::Zero(6, 6)), ArgumentError);
    CHECK_THROWS_AS(ssim(Matrix::Zero(8, 9), Matrix::Zero(8, 9)), ArgumentError);
    CHECK_THROWS_AS(ssim(Matrix::Zero(8, 8), Matrix::Zero(9, 9)), ArgumentError);
  }

  TEST_CASE("property: ssim matches the definition oracle and is symmetric") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
      const int side = 7 + static_cast<int>(rng() % 26);
      const Matrix x = uniform(side, side, rng);
      const Matrix y = (x + uniform(side, side, rng, -0.3, 0.3)).cwiseMax(0.0).cwiseMin(1.0);
      CHECK(std::abs(ssim(x, y) - oracle::ssim(x, y)) < 1e-9);
      CHECK(std::abs(ssim(x, y) - ssim(y, x)) < 1e-15);
      CHECK(ssim(x, y) <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("score_images and metric rows") {
    std::mt19937_64 rng(5);
    const Matrix ref = uniform(64, 3, rng);
    Matrix cand = ref;
    cand(0, 0) = 1.7;
    const auto rec = score_images("AE-REG", 10.0, ref, cand, 8);
    CHECK(rec.count == 3);
    Matrix clamped = cand;
    clamped(0, 0) = 1.0;
    const double p0 = psnr(ref.col(0), clamped.col(0));
    CHECK(rec.psnr_mean == doctest::Approx((p0 + 2 * kPsnrCap) / 3));
    CHECK(rec.ssim_mean <= 1.0);
    CHECK_THROWS_AS(score_images("x", 0, ref, cand, 7), ArgumentError);

    const auto ms = mean_std({1.0, 2.0, 3.0, 4.0});
    CHECK(ms.mean == 2.5);
    CHECK(ms.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(mean_std({7.0}).std == 0.0);
    CHECK_THROWS_AS(mean_std({}), ArgumentError);

    const auto rows = rows_of(rec);
    REQUIRE(rows.size() == 2);
    std::ostringstream os;
    write_metrics_csv(rows, os);
    CHECK(os.str().rfind("variant,noise_pct,metric,mean,std,n\n", 0) == 0);
    std::istringstream is(os.str());
    const auto back = read_metrics_csv(is);
    REQUIRE(back.size() == 2);
    CHECK(back[0].mean == rows[0].mean);
    CHECK(back[1].std == rows[1].std);
    CHECK(back[0].metric == rows[0].metric);

    std::istringstream bad_header("a,b\n");
    CHECK_THROWS_AS(read_metrics_csv(bad_header), FormatError);
    std::istringstream bad_row("variant,noise_pct,metric,mean,std,n\nx,0,psnr,abc,0,1\n");
    CHECK_THROWS_AS(read_metrics_csv(bad_row), FormatError);
  }

  TEST_CASE("simple closed curve examples") {
    CHECK(simple_closed_curve_check(loop({{0, 0}, {1, 0}, {1, 1}, {0, 1}})).simple);
    const auto bowtie = simple_closed_curve_check(loop({{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
    CHECK_FALSE(bowtie.simple);
    CHECK(bowtie.crossing_pairs.size() == 1);
    const auto dup = simple_closed_curve_check(loop({{0, 0}, {0, 0}, {1, 0}, {1, 1}, {1, 1}, {0, 1}, {0, 0}}));
    CHECK(dup.simple);
    CHECK(dup.distinct_points == 4);
    CHECK_FALSE(simple_closed_curve_check(loop({{0, 0}, {2, 0}, {1, 0}, {1, 1}})).simple);
    CHECK_FALSE(simple_closed_curve_check(loop({{0, 0}, {2, 0}, {2, 2}, {1, 0}, {0, 2}})).simple);
    CHECK_THROWS_AS(simple_closed_curve_check(loop({{0, 0}, {1, 1}, {1, 1}, {0, 0}})), ArgumentError);
    CHECK_THROWS_AS(simple_closed_curve_check(Matrix::Zero(3, 5)), ArgumentError);

    Matrix circle(2, 2000);
    for (Eigen::Index i = 0; i < 2000; ++i) circle.col(i) << std::cos(2 * std::numbers::pi * i / 2000.0),
        std::sin(2 * std::numbers::pi * i / 2000.0);
    CHECK(simple_closed_curve_check(circle).simple);
    Matrix figure8(2, 400);
    for (Eigen::Index i = 0; i < 400; ++i) {
      const double t = 2 * std::numbers::pi * (i + 0.5) / 400.0;
      figure8.col(i) << std::sin(t), std::sin(t) * std::cos(t);
    }
    CHECK(simple_closed_curve_check(figure8).crossing_pairs.size() == 1);
    Matrix twice(2, 600);
    for (Eigen::Index i = 0; i < 600; ++i) {
      const double t = 4 * std::numbers::pi * (i + 0.25) / 600.0;
      twice.col(i) << (1 + 0.3 * std::cos(t / 2)) * std::cos(t), (1 + 0.3 * std::cos(t / 2)) * std::sin(t);
    }
    CHECK(simple_closed_curve_check(twice).crossing_pairs.size() == 1);
  }

  TEST_CASE("property: curve check agrees with a parametric crossing oracle") {
    std::mt19937_64 rng(6);
    int non_simple = 0;
    for (int t = 0; t < 100; ++t) {
      const Matrix pts = uniform(2, 4 + static_cast<Eigen::Index>(rng() % 12), rng);
      const auto check = simple_closed_curve_check(pts);
      const auto expected = oracle::polygon_crossings(pts);
      CHECK(check.crossing_pairs.size() == expected);
      CHECK(check.simple == (expected == 0));
      non_simple += !check.simple;
    }
    CHECK(non_simple > 10);
  }

  TEST_CASE("injectivity proxy") {
    std::mt19937_64 rng(7);
    const Matrix angles = uniform(2, 30, rng, 0.0, 2 * std::numbers::pi);
    CHECK(injectivity_proxy(angles, angles, 0.01, 0.5).empty());
    Matrix latent(1, 2);
    latent << 0.3, 0.3;
    Matrix intr(2, 2);
    intr << 0.0, 3.0, 0.0, 3.0;
    const auto v = injectivity_proxy(latent, intr, 0.1, 1.0);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == IndexPair{0, 1});
    CHECK_THROWS_AS(injectivity_proxy(latent, angles, 0.1, 1.0), ArgumentError);

    Eigen::VectorXd a(2), b(2);
    a << 0.1, 6.2;
    b << 2 * std::numbers::pi - 0.1, 0.1;
    CHECK(toroidal_distance(a, b) == doctest::Approx(std::hypot(0.2, 2 * std::numbers::pi - 6.1)));

    Matrix line(1, 5);
    line << 0, 1, 3, 6, 10;
    CHECK(pairwise_distance_quantile(line, 0.0) == 1.0);
    CHECK(pairwise_distance_quantile(line, 0.1) == 1.0);
    CHECK(pairwise_distance_quantile(line, 0.5) == 4.0);
    CHECK(pairwise_distance_quantile(line, 1.0) == 10.0);
  }

  TEST_CASE("random encoders fold the torus") {
    std::mt19937_64 rng(8);
    const Matrix intr = uniform(2, 400, rng, 0.0, 2 * std::numbers::pi);
    Matrix pts(3, 400);
    for (Eigen::Index c = 0; c < 400; ++c) {
      const double th = intr(0, c), ps = intr(1, c);
      pts.col(c) << (2 + 0.7 * std::cos(th)) * std::cos(ps), (2 + 0.7 * std::cos(th)) * std::sin(ps),
          0.7 * std::sin(th);
    }
    diffnet::MlpSpec spec{{3, 32, 32, 3}, diffnet::Activation::kSin, diffnet::Activation::kSin};
    const auto w = diffnet::init_weights(spec, 3);
    const Matrix codes = diffnet::forward_batch(spec, w, pts);
    const double delta = pairwise_distance_quantile(codes, 0.01);
    CHECK_FALSE(injectivity_proxy(codes, intr, delta, 1.0).empty());
  }

  TEST_CASE("jacobian identity residual") {
    std::mt19937_64 rng(9);
    const Matrix p = uniform(2, 10, rng, -1, 1);
    const auto id = jacobian_identity_residual(scaled_identity(2, 1.0), p);
    CHECK(id.mean == 0.0);
    CHECK(id.max == 0.0);
    for (double r : jacobian_identity_residuals(scaled_identity(2, 2.0), p)) CHECK(r == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(jacobian_identity_residual(scaled_identity(2, 1.0), Matrix::Zero(3, 2)), ArgumentError);
  }

  TEST_CASE("geodesic examples") {
    Matrix line(1, 3);
    line << 0, 1, 2;
    const auto g = vr_geodesic(line, 0, 2);
    CHECK(g.epsilon_star == 1.0);
    CHECK(g.path == std::vector<std::size_t>{0, 1, 2});
    CHECK(g.path_length == 2.0);
    CHECK(g.to_json()["indices"].size() == 3);

    Matrix two(2, 2);
    two << 0, 3, 0, 4;
    const auto d = vr_geodesic(two, 1, 0);
    CHECK(d.epsilon_star == 5.0);
    CHECK(d.path == std::vector<std::size_t>{1, 0});

    Matrix ring(2, 100);
    for (Eigen::Index i = 0; i < 100; ++i) {
      ring.col(i) << 0.8 * std::cos(2 * std::numbers::pi * i / 100), 0.8 * std::sin(2 * std::numbers::pi * i / 100);
    }
    const auto arc = vr_geodesic(ring, 0, 50);
    CHECK(std::abs(arc.path_length - std::numbers::pi * 0.8) < 0.05 * std::numbers::pi * 0.8);
    CHECK(arc.path.size() == 51);

    CHECK_THROWS_AS(vr_geodesic(line, 1, 1), ArgumentError);
    CHECK_THROWS_AS(vr_geodesic(line, 0, 3), ArgumentError);
    CHECK_THROWS_AS(vr_geodesic(Matrix::Zero(2, 1), 0, 0), ArgumentError);
  }

  TEST_CASE("property: geodesics match brute force and the MST bottleneck") {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 200; ++t) {
      const auto n = 2 + static_cast<Eigen::Index>(rng() % 9);
      const Matrix pts = uniform(1 + static_cast<Eigen::Index>(rng() % 3), n, rng, -1, 1);
      const std::size_t a = rng() % static_cast<std::size_t>(n);
      std::size_t b = rng() % static_cast<std::size_t>(n);
      if (a == b) b = (a + 1) % static_cast<std::size_t>(n);
      const auto g = vr_geodesic(pts, a, b);
      CHECK(g.epsilon_star == oracle::mst_bottleneck(pts, a, b));
      CHECK(g.path_length == doctest::Approx(oracle::brute_force_path(pts, a, b, g.epsilon_star)).epsilon(1e-12));
      CHECK(g.path.front() == a);
      CHECK(g.path.back() == b);
      CHECK(g.path_length >= (pts.col(static_cast<Eigen::Index>(a)) - pts.col(static_cast<Eigen::Index>(b))).norm() - 1e-12);
      double len = 0.0;
      for (std::size_t k = 1; k < g.path.size(); ++k) {
        const double e = (pts.col(static_cast<Eigen::Index>(g.path[k])) - pts.col(static_cast<Eigen::Index>(g.path[k - 1]))).norm();
        CHECK(e <= g.epsilon_star);
        len += e;
      }
      CHECK(len == doctest::Approx(g.path_length).epsilon(1e-12));
    }
  }
}
