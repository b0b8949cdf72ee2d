#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace topoae::manifolds {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Generator { kCircle, kTorus };

struct EmbeddingSpec {
  int ambient_dim = 15;
  Generator generator = Generator::kCircle;
  double minor_radius = 0.7;  // torus r
  double major_radius = 2.0;  // torus R
  Eigen::Vector3d axis_scale = Eigen::Vector3d::Ones();  // optional torus squeeze
  double matrix_range = 2.0;  // entries of A uniform in [-range, range]
  std::uint64_t seed = 0;
  Matrix matrix;  // ambient_dim x (2 or 3)

  int intrinsic_dim() const { return generator == Generator::kCircle ? 2 : 3; }
  nlohmann::json to_json() const;
};

// Draws A (resampling until its smallest singular value exceeds 1e-3).
EmbeddingSpec make_embedding(Generator generator, int ambient_dim, double matrix_range,
                             std::uint64_t seed);

struct Dataset {
  Matrix points;            // ambient_dim x N
  std::vector<int> labels;  // optional, one per point
  Matrix intrinsic;         // optional parameters per point (angles), k x N
  int image_side = 0;       // > 0 when columns are row-major square images in [0,1]
  nlohmann::json provenance = nlohmann::json::object();

  Eigen::Index size() const { return points.cols(); }
  int dim() const { return static_cast<int>(points.rows()); }
  bool is_image() const { return image_side > 0; }
  Dataset subset(const std::vector<std::size_t>& idx) const;
};

// A (cos t, sin t) with t uniform in [0, 2 pi); angles stored in `intrinsic`.
Dataset circle_dataset(const EmbeddingSpec& spec, std::size_t count, std::uint64_t sample_seed);
// Evenly spaced sweep t_i = 2 pi i / count, in order.
Dataset circle_sweep(const EmbeddingSpec& spec, std::size_t count);

// Pre-embedding torus point ((R + r cos th) cos ps, (R + r cos th) sin ps, r sin th).
Eigen::Vector3d torus_point(double theta, double psi, double minor_radius, double major_radius);
// (theta, psi) uniform on [0, 2 pi)^2, embedded by A; intrinsic rows (theta, psi).
Dataset torus_dataset(const EmbeddingSpec& spec, std::size_t count, std::uint64_t sample_seed);

// x + (percent/100) * range * eta with eta ~ N(0, I). Images use range 1 and
// are clamped to [0, 1] unless clamp_images is false; other data use their
// max - min.
Dataset add_gaussian_noise(const Dataset& data, double percent, std::uint64_t seed,
                           bool clamp_images = true);

enum class FlipAxis { kHorizontal, kVertical };
// Horizontal reverses each row, vertical reverses the row order.
Matrix flip(const Matrix& image, FlipAxis axis);
// Same on a dataset of flattened square images.
Dataset flip_images(const Dataset& data, FlipAxis axis);

Matrix column_to_image(const Vector& column, int side);
Vector image_to_column(const Matrix& image);

// IDX image file (magic 0x00000803), optionally gzip-compressed. Returns a
// uniform seeded sub-sample of `limit` images (all when limit >= count) in
// ascending index order, scaled to [0,1]; 28x28 sources are zero-padded to 32x32.
// Labels are read from `labels_path` (magic 0x00000801) when given.
Dataset load_idx_images(const std::filesystem::path& path, std::size_t limit, std::uint64_t seed,
                        const std::optional<std::filesystem::path>& labels_path = std::nullopt);

// Deterministic 10-class garment-silhouette images (28x28 content padded to
// 32x32), a stand-in when no IDX file is available.
Dataset synthetic_fashion(std::size_t count, std::uint64_t seed);

// points.csv (one point per row) plus manifest.json {source, seed, count, dims, ...}.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);
// Plain CSV, one point per row.
Matrix read_points_csv(const std::filesystem::path& path);

}  // namespace topoae::manifolds
