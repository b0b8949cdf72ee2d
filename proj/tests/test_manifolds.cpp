#include <doctest.h>

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "topoae/errors.hpp"
#include "topoae/manifolds.hpp"

using namespace topoae;
using namespace topoae::manifolds;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "topoae_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void put_be32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<unsigned char>(v >> s));
}

std::vector<unsigned char> idx_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols) {
  std::vector<unsigned char> b;
  put_be32(b, 0x803);
  put_be32(b, count);
  put_be32(b, rows);
  put_be32(b, cols);
  for (std::uint32_t i = 0; i < count * rows * cols; ++i) b.push_back(static_cast<unsigned char>((i * 7 + 3) % 256));
  return b;
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& b) {
  std::ofstream os(p, std::ios::binary);
  os.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

void write_gz(const fs::path& p, const std::vector<unsigned char>& b) {
  gzFile f = gzopen(p.c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, b.data(), static_cast<unsigned>(b.size()));
  gzclose(f);
}

}  // namespace

TEST_SUITE("manifolds") {
  TEST_CASE("embedding matrix") {
    const auto spec = make_embedding(Generator::kCircle, 15, 2.0, 3);
    CHECK(spec.matrix.rows() == 15);
    CHECK(spec.matrix.cols() == 2);
    CHECK(spec.matrix.cwiseAbs().maxCoeff() <= 2.0);
    CHECK(spec.matrix.jacobiSvd().singularValues().minCoeff() > 1e-3);
    CHECK(make_embedding(Generator::kCircle, 15, 2.0, 3).matrix == spec.matrix);
    CHECK(make_embedding(Generator::kCircle, 15, 2.0, 4).matrix != spec.matrix);
    const auto tor = make_embedding(Generator::kTorus, 1024, 1.0, 1);
    CHECK(tor.matrix.cols() == 3);
    CHECK(tor.matrix.cwiseAbs().maxCoeff() <= 1.0);
    CHECK_THROWS_AS(make_embedding(Generator::kTorus, 2, 1.0, 1), ArgumentError);
    CHECK_THROWS_AS(make_embedding(Generator::kCircle, 15, 0.0, 1), ArgumentError);
  }

  TEST_CASE("circle data lies on the embedded unit circle") {
    const auto spec = make_embedding(Generator::kCircle, 15, 2.0, 5);
    const auto d = circle_dataset(spec, 3, 8);
    CHECK(d.points.rows() == 15);
    CHECK(d.points.cols() == 3);
    const Matrix pinv = spec.matrix.completeOrthogonalDecomposition().pseudoInverse();
    const auto sweep = circle_dataset(spec, 2000, 9);
    for (Eigen::Index c = 0; c < sweep.size(); ++c) {
      CHECK(std::abs((pinv * sweep.points.col(c)).norm() - 1.0) < 1e-10);
      const double t = sweep.intrinsic(0, c);
      CHECK(t >= 0.0);
      CHECK(t < 2 * std::numbers::pi);
    }
    std::vector<double> t(sweep.intrinsic.data(), sweep.intrinsic.data() + sweep.size());
    std::sort(t.begin(), t.end());
    double gap = t.front() + 2 * std::numbers::pi - t.back();
    for (std::size_t i = 1; i < t.size(); ++i) gap = std::max(gap, t[i] - t[i - 1]);
    CHECK(gap < 2 * std::numbers::pi * 10 / 2000);

    const auto ordered = circle_sweep(spec, 8);
    CHECK(ordered.intrinsic(0, 2) == doctest::Approx(std::numbers::pi / 2));
    CHECK((ordered.points.col(0) - spec.matrix.col(0)).norm() < 1e-15);
  }

  TEST_CASE("torus data") {
    const Eigen::Vector3d p = torus_point(0.0, 0.0, 0.7, 2.0);
    CHECK(p(0) == doctest::Approx(2.7));
    CHECK(p(1) == 0.0);
    CHECK(p(2) == 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    for (int i = 0; i < 200; ++i) {
      const Eigen::Vector3d q = torus_point(u(rng), u(rng), 0.7, 2.0);
      CHECK(std::abs(std::pow(std::hypot(q(0), q(1)) - 2.0, 2) + q(2) * q(2) - 0.49) < 1e-12);
    }
    auto spec = make_embedding(Generator::kTorus, 1024, 1.0, 2);
    const auto d = torus_dataset(spec, 50, 3);
    CHECK(d.points.rows() == 1024);
    CHECK(d.points.cols() == 50);
    CHECK(d.intrinsic.rows() == 2);
    for (Eigen::Index c = 0; c < 50; ++c) {
      const Eigen::Vector3d q = torus_point(d.intrinsic(0, c), d.intrinsic(1, c), 0.7, 2.0);
      CHECK((spec.matrix * q - d.points.col(c)).norm() < 1e-12);
    }
    CHECK_THROWS_AS(torus_dataset(make_embedding(Generator::kCircle, 15, 1.0, 1), 5, 1), ArgumentError);
  }

  TEST_CASE("gaussian noise") {
    Dataset zero;
    zero.points = Matrix::Zero(100, 1000);
    CHECK(add_gaussian_noise(zero, 0.0, 1).points == zero.points);
    CHECK(add_gaussian_noise(zero, 10.0, 1).points == zero.points);
    const double n = static_cast<double>(zero.points.size());

    Dataset img = zero;
    img.image_side = 10;
    const auto raw = add_gaussian_noise(img, 10.0, 2, false);
    const double m2 = raw.points.mean();
    const double sd2 = std::sqrt((raw.points.array() - m2).square().sum() / (n - 1));
    CHECK(std::abs(sd2 - 0.1) < 3 * 0.1 / std::sqrt(2 * n));
    const auto clamped = add_gaussian_noise(img, 50.0, 2);
    CHECK(clamped.points.minCoeff() >= 0.0);
    CHECK(clamped.points.maxCoeff() <= 1.0);
    CHECK(add_gaussian_noise(img, 10.0, 2).points == add_gaussian_noise(img, 10.0, 2).points);
    CHECK_THROWS_AS(add_gaussian_noise(img, 101.0, 1), ArgumentError);
    CHECK_THROWS_AS(add_gaussian_noise(img, -1.0, 1), ArgumentError);

    Dataset pts;
    pts.points = Matrix::Zero(2, 50000);
    pts.points(0, 0) = 4.0;
    const auto scaled = add_gaussian_noise(pts, 5.0, 3);
    const Eigen::ArrayXd row = scaled.points.row(1).array();
    const double sd3 = std::sqrt((row - row.mean()).square().sum() / (row.size() - 1));
    CHECK(std::abs(sd3 - 0.2) < 3 * 0.2 / std::sqrt(2.0 * row.size()));
  }

  TEST_CASE("flips") {
    Matrix img(3, 3);
    img << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    Matrix h(3, 3);
    h << 3, 2, 1, 6, 5, 4, 9, 8, 7;
    Matrix v(3, 3);
    v << 7, 8, 9, 4, 5, 6, 1, 2, 3;
    CHECK(flip(img, FlipAxis::kHorizontal) == h);
    CHECK(flip(img, FlipAxis::kVertical) == v);
    CHECK(flip(flip(img, FlipAxis::kVertical), FlipAxis::kVertical) == img);
    CHECK(column_to_image(image_to_column(img), 3) == img);
    CHECK(image_to_column(img)(1) == 2.0);
    CHECK_THROWS_AS(flip(Matrix::Zero(2, 3), FlipAxis::kVertical), ArgumentError);

    Dataset d;
    d.image_side = 3;
    d.points = image_to_column(img);
    CHECK(column_to_image(flip_images(d, FlipAxis::kHorizontal).points.col(0), 3) == h);
    Dataset notimg;
    notimg.points = Matrix::Zero(9, 1);
    CHECK_THROWS_AS(flip_images(notimg, FlipAxis::kHorizontal), ArgumentError);
  }

  TEST_CASE("IDX reader") {
    const auto dir = scratch("idx");
    const auto bytes = idx_images(5, 28, 28);
    write_bytes(dir / "img.idx", bytes);
    write_gz(dir / "img.idx.gz", bytes);
    std::vector<unsigned char> lab;
    put_be32(lab, 0x801);
    put_be32(lab, 5);
    for (unsigned char l : {3, 1, 4, 1, 5}) lab.push_back(l);
    write_bytes(dir / "lab.idx", lab);

    const auto all = load_idx_images(dir / "img.idx", 100, 0, dir / "lab.idx");
    CHECK(all.image_side == 32);
    CHECK(all.size() == 5);
    CHECK(all.labels == std::vector<int>{3, 1, 4, 1, 5});
    CHECK(all.points(0, 0) == 0.0);
    CHECK(all.points(2 * 32 + 2, 0) == 3 / 255.0);
    CHECK(all.points(2 * 32 + 3, 0) == 10 / 255.0);
    const std::size_t pix = 28 * 28;
    CHECK(all.points(29 * 32 + 29, 4) == bytes[16 + 4 * pix + 27 * 28 + 27] / 255.0);
    CHECK(all.points.row(31).isZero());

    const auto gz = load_idx_images(dir / "img.idx.gz", 100, 0);
    CHECK(gz.points == all.points);

    const auto some = load_idx_images(dir / "img.idx", 3, 7, dir / "lab.idx");
    CHECK(some.size() == 3);
    CHECK(load_idx_images(dir / "img.idx", 3, 7).points == some.points);

    write_bytes(dir / "odd.idx", idx_images(2, 4, 4));
    CHECK(load_idx_images(dir / "odd.idx", 10, 0).image_side == 4);

    auto bad = bytes;
    bad[3] = 0x02;
    write_bytes(dir / "bad.idx", bad);
    CHECK_THROWS_AS(load_idx_images(dir / "bad.idx", 10, 0), FormatError);
    write_bytes(dir / "short.idx", std::vector<unsigned char>(bytes.begin(), bytes.end() - 1));
    CHECK_THROWS_AS(load_idx_images(dir / "short.idx", 10, 0), FormatError);
    write_bytes(dir / "hdr.idx", std::vector<unsigned char>(bytes.begin(), bytes.begin() + 10));
    CHECK_THROWS_AS(load_idx_images(dir / "hdr.idx", 10, 0), FormatError);
    write_bytes(dir / "rect.idx", idx_images(1, 4, 5));
    CHECK_THROWS_AS(load_idx_images(dir / "rect.idx", 10, 0), FormatError);
    CHECK_THROWS_AS(load_idx_images(dir / "missing.idx", 10, 0), FormatError);
    CHECK_THROWS_AS(load_idx_images(dir / "img.idx", 10, 0, dir / "img.idx"), FormatError);
  }

  TEST_CASE("synthetic garments") {
    const auto a = synthetic_fashion(40, 1);
    CHECK(a.image_side == 32);
    CHECK(a.size() == 40);
    CHECK(a.labels.size() == 40);
    CHECK(a.points.minCoeff() >= 0.0);
    CHECK(a.points.maxCoeff() <= 1.0);
    CHECK(a.points.row(0).isZero());
    CHECK(a.points.maxCoeff() > 0.5);
    CHECK(synthetic_fashion(40, 1).points == a.points);
    CHECK(synthetic_fashion(40, 2).points != a.points);
    for (int l : a.labels) {
      CHECK(l >= 0);
      CHECK(l < 10);
    }
  }

  TEST_CASE("dataset files round trip") {
    const auto dir = scratch("dataset");
    auto spec = make_embedding(Generator::kTorus, 15, 1.0, 4);
    const auto d = torus_dataset(spec, 20, 5);
    save_dataset(d, dir / "torus");
    const auto back = load_dataset(dir / "torus");
    CHECK(back.points == d.points);
    CHECK(back.intrinsic == d.intrinsic);

    auto imgs = synthetic_fashion(6, 3);
    save_dataset(imgs, dir / "imgs");
    const auto b2 = load_dataset(dir / "imgs");
    CHECK(b2.points == imgs.points);
    CHECK(b2.labels == imgs.labels);
    CHECK(b2.image_side == 32);
    CHECK_THROWS_AS(load_dataset(dir / "nothing"), FormatError);

    std::ofstream(dir / "ragged.csv") << "1,2\n3\n";
    CHECK_THROWS_AS(read_points_csv(dir / "ragged.csv"), FormatError);
    std::ofstream(dir / "word.csv") << "1,x\n";
    CHECK_THROWS_AS(read_points_csv(dir / "word.csv"), FormatError);
  }

  TEST_CASE("subset") {
    auto spec = make_embedding(Generator::kCircle, 4, 1.0, 1);
    const auto d = circle_dataset(spec, 5, 1);
    const auto s = d.subset({4, 0});
    CHECK(s.points.col(0) == d.points.col(4));
    CHECK(s.intrinsic(0, 1) == d.intrinsic(0, 0));
    CHECK_THROWS_AS(d.subset({5}), ArgumentError);
  }
}
