#include "topoae/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "topoae/errors.hpp"

namespace topoae::manifolds {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string generator_name(Generator g) { return g == Generator::kCircle ? "circle" : "torus"; }

}  // namespace

nlohmann::json EmbeddingSpec::to_json() const {
  return {{"generator", generator_name(generator)},
          {"ambient_dim", ambient_dim},
          {"matrix_range", matrix_range},
          {"minor_radius", minor_radius},
          {"major_radius", major_radius},
          {"axis_scale", {axis_scale[0], axis_scale[1], axis_scale[2]}},
          {"seed", seed}};
}

EmbeddingSpec make_embedding(Generator generator, int ambient_dim, double matrix_range,
                             std::uint64_t seed) {
  EmbeddingSpec spec;
  spec.generator = generator;
  spec.ambient_dim = ambient_dim;
  spec.matrix_range = matrix_range;
  spec.seed = seed;
  const int k = spec.intrinsic_dim();
  if (ambient_dim < k) throw ArgumentError("make_embedding: ambient dim below intrinsic dim");
  if (!(matrix_range > 0.0)) throw ArgumentError("make_embedding: matrix range must be > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(-matrix_range, matrix_range);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix a(ambient_dim, k);
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = entry(rng);
    }
    const Eigen::JacobiSVD<Matrix> svd(a);
    if (svd.singularValues().minCoeff() > 1e-3) {
      spec.matrix = std::move(a);
      return spec;
    }
  }
  throw ConvergenceError("make_embedding: could not draw a full-rank matrix");
}

Dataset Dataset::subset(const std::vector<std::size_t>& idx) const {
  Dataset out;
  out.image_side = image_side;
  out.provenance = provenance;
  out.points.resize(points.rows(), static_cast<Eigen::Index>(idx.size()));
  if (intrinsic.size() > 0) out.intrinsic.resize(intrinsic.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const auto src = static_cast<Eigen::Index>(idx[c]);
    if (src >= points.cols()) throw ArgumentError("Dataset::subset: index out of range");
    out.points.col(static_cast<Eigen::Index>(c)) = points.col(src);
    if (intrinsic.size() > 0) out.intrinsic.col(static_cast<Eigen::Index>(c)) = intrinsic.col(src);
    if (!labels.empty()) out.labels.push_back(labels[idx[c]]);
  }
  return out;
}

namespace {

void require_generator(const EmbeddingSpec& spec, Generator g) {
  if (spec.generator != g) {
    throw ArgumentError("dataset: spec generator is " + generator_name(spec.generator));
  }
  if (spec.matrix.rows() != spec.ambient_dim || spec.matrix.cols() != spec.intrinsic_dim()) {
    throw ArgumentError("dataset: embedding matrix has the wrong shape");
  }
}

Dataset circle_from_angles(const EmbeddingSpec& spec, const std::vector<double>& angles) {
  Dataset d;
  const auto n = static_cast<Eigen::Index>(angles.size());
  Matrix unit(2, n);
  d.intrinsic.resize(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    unit(0, i) = std::cos(angles[static_cast<std::size_t>(i)]);
    unit(1, i) = std::sin(angles[static_cast<std::size_t>(i)]);
    d.intrinsic(0, i) = angles[static_cast<std::size_t>(i)];
  }
  d.points = spec.matrix * unit;
  d.provenance = {{"source", "circle"}, {"embedding", spec.to_json()}};
  return d;
}

}  // namespace

Dataset circle_dataset(const EmbeddingSpec& spec, std::size_t count, std::uint64_t sample_seed) {
  require_generator(spec, Generator::kCircle);
  if (count < 1) throw ArgumentError("circle_dataset: count must be >= 1");
  std::mt19937_64 rng(sample_seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::vector<double> t(count);
  for (auto& v : t) v = angle(rng);
  Dataset d = circle_from_angles(spec, t);
  d.provenance["sample_seed"] = sample_seed;
  return d;
}

Dataset circle_sweep(const EmbeddingSpec& spec, std::size_t count) {
  require_generator(spec, Generator::kCircle);
  if (count < 1) throw ArgumentError("circle_sweep: count must be >= 1");
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = kTwoPi * static_cast<double>(i) / count;
  Dataset d = circle_from_angles(spec, t);
  d.provenance["sweep"] = true;
  return d;
}

Eigen::Vector3d torus_point(double theta, double psi, double minor_radius, double major_radius) {
  const double ring = major_radius + minor_radius * std::cos(theta);
  return {ring * std::cos(psi), ring * std::sin(psi), minor_radius * std::sin(theta)};
}

Dataset torus_dataset(const EmbeddingSpec& spec, std::size_t count, std::uint64_t sample_seed) {
  require_generator(spec, Generator::kTorus);
  if (count < 1) throw ArgumentError("torus_dataset: count must be >= 1");
  std::mt19937_64 rng(sample_seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  const auto n = static_cast<Eigen::Index>(count);
  Matrix raw(3, n);
  Dataset d;
  d.intrinsic.resize(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double theta = angle(rng);
    const double psi = angle(rng);
    raw.col(i) = torus_point(theta, psi, spec.minor_radius, spec.major_radius)
                     .cwiseProduct(spec.axis_scale);
    d.intrinsic(0, i) = theta;
    d.intrinsic(1, i) = psi;
  }
  d.points = spec.matrix * raw;
  d.provenance = {{"source", "torus"}, {"embedding", spec.to_json()}, {"sample_seed", sample_seed}};
  return d;
}

Dataset add_gaussian_noise(const Dataset& data, double percent, std::uint64_t seed,
                           bool clamp_images) {
  if (!(percent >= 0.0 && percent <= 100.0)) {
    throw ArgumentError("add_gaussian_noise: percent must be in [0, 100]");
  }
  Dataset out = data;
  out.provenance["noise_percent"] = percent;
  out.provenance["noise_seed"] = seed;
  if (percent == 0.0) return out;
  const double range = data.is_image() ? 1.0 : data.points.maxCoeff() - data.points.minCoeff();
  const double sigma = percent / 100.0 * range;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eta(0.0, 1.0);
  for (Eigen::Index c = 0; c < out.points.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.points.rows(); ++r) out.points(r, c) += sigma * eta(rng);
  }
  if (data.is_image() && clamp_images) out.points = out.points.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

Matrix flip(const Matrix& image, FlipAxis axis) {
  if (image.rows() != image.cols()) throw ArgumentError("flip: image must be square");
  return axis == FlipAxis::kHorizontal ? Matrix(image.rowwise().reverse())
                                       : Matrix(image.colwise().reverse());
}

Matrix column_to_image(const Vector& column, int side) {
  if (column.size() != static_cast<Eigen::Index>(side) * side) {
    throw ArgumentError("column_to_image: length is not side^2");
  }
  Matrix img(side, side);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) img(i, j) = column[static_cast<Eigen::Index>(i) * side + j];
  }
  return img;
}

Vector image_to_column(const Matrix& image) {
  Vector col(image.size());
  for (Eigen::Index i = 0; i < image.rows(); ++i) {
    for (Eigen::Index j = 0; j < image.cols(); ++j) col[i * image.cols() + j] = image(i, j);
  }
  return col;
}

Dataset flip_images(const Dataset& data, FlipAxis axis) {
  if (!data.is_image()) throw ArgumentError("flip_images: dataset does not hold images");
  Dataset out = data;
  for (Eigen::Index c = 0; c < data.points.cols(); ++c) {
    out.points.col(c) = image_to_column(flip(column_to_image(data.points.col(c), data.image_side), axis));
  }
  out.provenance["flip"] = axis == FlipAxis::kHorizontal ? "horizontal" : "vertical";
  return out;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "points.csv");
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index c = 0; c < data.points.cols(); ++c) {
      for (Eigen::Index r = 0; r < data.points.rows(); ++r) {
        if (r) os << ',';
        os << data.points(r, c);
      }
      os << '\n';
    }
  }
  nlohmann::json manifest = {{"source", data.provenance.value("source", "unknown")},
                             {"seed", data.provenance.value("sample_seed", std::uint64_t{0})},
                             {"count", data.size()},
                             {"dims", data.dim()},
                             {"image_side", data.image_side},
                             {"labels", data.labels},
                             {"provenance", data.provenance}};
  if (data.intrinsic.size() > 0) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < data.intrinsic.rows(); ++r) {
      rows.emplace_back(data.intrinsic.cols());
      for (Eigen::Index c = 0; c < data.intrinsic.cols(); ++c) {
        rows.back()[static_cast<std::size_t>(c)] = data.intrinsic(r, c);
      }
    }
    manifest["intrinsic"] = rows;
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

Matrix read_points_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError(path.string() + ": bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(path.string() + ": ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + ": no points");
  Matrix out(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    for (std::size_t r = 0; r < rows[c].size(); ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[c][r];
    }
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset d;
  d.points = read_points_csv(dir / "points.csv");
  std::ifstream ms(dir / "manifest.json");
  if (!ms) throw FormatError("missing manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ms);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest.json: ") + e.what());
  }
  if (manifest.value("count", Eigen::Index{-1}) != d.size() || manifest.value("dims", -1) != d.dim()) {
    throw FormatError("manifest.json disagrees with points.csv");
  }
  d.image_side = manifest.value("image_side", 0);
  d.labels = manifest.value("labels", std::vector<int>{});
  d.provenance = manifest.value("provenance", nlohmann::json::object());
  if (manifest.contains("intrinsic")) {
    const auto rows = manifest["intrinsic"].get<std::vector<std::vector<double>>>();
    d.intrinsic.resize(static_cast<Eigen::Index>(rows.size()), d.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (Eigen::Index c = 0; c < d.size(); ++c) {
        d.intrinsic(static_cast<Eigen::Index>(r), c) = rows[r].at(static_cast<std::size_t>(c));
      }
    }
  }
  return d;
}

}  // namespace topoae::manifolds
