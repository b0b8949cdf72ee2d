#include "topoae/chebyshev.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "topoae/errors.hpp"

namespace topoae::chebyshev {

double cheb_eval(int k, double x) {
  if (k < 0) throw ArgumentError("cheb_eval: negative degree");
  if (k == 0) return 1.0;
  double t_prev = 1.0;
  double t = x;
  for (int j = 1; j < k; ++j) {
    const double t_next = 2.0 * x * t - t_prev;
    t_prev = t;
    t = t_next;
  }
  return t;
}

PixelGrid::PixelGrid(int r) : resolution(r) {
  if (r < 1) throw ArgumentError("PixelGrid: resolution must be >= 1");
  coords.resize(r);
  for (int i = 0; i < r; ++i) coords[i] = -1.0 + (2.0 * i + 1.0) / r;
}

namespace {

// V(i, k) = T_k(coords[i])
Eigen::MatrixXd cheb_vandermonde(const PixelGrid& grid, int degree) {
  Eigen::MatrixXd v(grid.resolution, degree + 1);
  for (int i = 0; i < grid.resolution; ++i) {
    for (int k = 0; k <= degree; ++k) v(i, k) = cheb_eval(k, grid.coords[i]);
  }
  return v;
}

}  // namespace

RegressionOperator::RegressionOperator(int resolution, int degree)
    : resolution_(resolution), degree_(degree) {
  if (degree < 0) throw ArgumentError("build_regression: degree must be >= 0");
  const long rows = static_cast<long>(resolution) * resolution;
  const long cols = static_cast<long>(degree + 1) * (degree + 1);
  if (rows < cols) {
    throw ArgumentError("build_regression: r^2 must be >= (n+1)^2");
  }
  const PixelGrid grid(resolution);
  const Eigen::MatrixXd v = cheb_vandermonde(grid, degree);
  matrix_.resize(rows, cols);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      const long row = static_cast<long>(i) * resolution + j;
      for (int a1 = 0; a1 <= degree; ++a1) {
        for (int a2 = 0; a2 <= degree; ++a2) {
          matrix_(row, a1 * (degree + 1) + a2) = v(j, a1) * v(i, a2);
        }
      }
    }
  }
  auto qr = std::make_shared<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>>(matrix_);
  if (qr->rank() < cols) {
    throw ConditioningError("build_regression: regression matrix is rank deficient (rank " +
                            std::to_string(qr->rank()) + " of " + std::to_string(cols) + ")");
  }
  qr_ = std::move(qr);
}

Eigen::MatrixXd RegressionOperator::solve(const Eigen::MatrixXd& images) const {
  if (images.rows() != matrix_.rows()) throw ArgumentError("fit: image size does not match");
  if (!images.allFinite()) throw InputError("fit: non-finite pixel values");
  return qr_->solve(images);
}

RegressionOperator build_regression(int r, int n) { return RegressionOperator(r, n); }

ChebSurrogate fit(const RegressionOperator& op, std::span<const double> image) {
  const Eigen::Map<const Eigen::VectorXd> d(image.data(), static_cast<Eigen::Index>(image.size()));
  if (d.size() != op.matrix().rows()) throw ArgumentError("fit: image size does not match");
  ChebSurrogate s;
  s.degree = op.degree();
  s.coeffs = op.solve(d);
  s.residual = (op.matrix() * s.coeffs - d).norm();
  return s;
}

Eigen::MatrixXd fit_batch(const RegressionOperator& op, const Eigen::MatrixXd& images) {
  return op.solve(images);
}

Eigen::VectorXd reconstruct(const ChebSurrogate& surrogate, const PixelGrid& grid) {
  const int n = surrogate.degree;
  if (surrogate.coeffs.size() != static_cast<Eigen::Index>(n + 1) * (n + 1)) {
    throw ArgumentError("reconstruct: coefficient count must be (n+1)^2");
  }
  const Eigen::MatrixXd v = cheb_vandermonde(grid, n);
  // theta(a1, a2) laid out row-major over (a1, a2).
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      theta(surrogate.coeffs.data(), n + 1, n + 1);
  // image(i, j) = sum_{a1,a2} T_a1(x_j) T_a2(y_i) theta(a1, a2)
  const Eigen::MatrixXd img = v * theta.transpose() * v.transpose();
  Eigen::VectorXd out(img.size());
  const int r = grid.resolution;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) out[static_cast<Eigen::Index>(i) * r + j] = img(i, j);
  }
  return out;
}

nlohmann::json ChebSurrogate::to_json() const {
  return {{"degree", degree},
          {"coeffs", std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size())},
          {"residual", residual}};
}

ChebSurrogate ChebSurrogate::from_json(const nlohmann::json& j) {
  ChebSurrogate s;
  s.degree = j.at("degree").get<int>();
  const auto c = j.at("coeffs").get<std::vector<double>>();
  if (c.size() != static_cast<std::size_t>(s.degree + 1) * (s.degree + 1)) {
    throw FormatError("surrogate: coefficient count must be (degree+1)^2");
  }
  s.coeffs = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  s.residual = j.value("residual", 0.0);
  return s;
}

Eigen::MatrixXd CoeffScaler::apply(const Eigen::MatrixXd& coeffs) const {
  if (coeffs.rows() != size()) throw ConfigError("CoeffScaler: coefficient count mismatch");
  return (coeffs.array().colwise() * scale.array()).colwise() + offset.array();
}

Eigen::MatrixXd CoeffScaler::unapply(const Eigen::MatrixXd& scaled) const {
  if (scaled.rows() != size()) throw ConfigError("CoeffScaler: coefficient count mismatch");
  return (scaled.array().colwise() * inverse_gain().array()).colwise() + inverse_bias().array();
}

Eigen::VectorXd CoeffScaler::inverse_gain() const {
  Eigen::VectorXd g(size());
  for (Eigen::Index i = 0; i < size(); ++i) g[i] = scale[i] != 0.0 ? 1.0 / scale[i] : 0.0;
  return g;
}

Eigen::VectorXd CoeffScaler::inverse_bias() const {
  Eigen::VectorXd b(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    b[i] = scale[i] != 0.0 ? -offset[i] / scale[i] : center[i];
  }
  return b;
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json CoeffScaler::to_json() const {
  return {{"scale", to_vec(scale)}, {"offset", to_vec(offset)}, {"center", to_vec(center)}};
}

CoeffScaler CoeffScaler::from_json(const nlohmann::json& j) {
  CoeffScaler s;
  s.scale = from_vec(j.at("scale").get<std::vector<double>>());
  s.offset = from_vec(j.at("offset").get<std::vector<double>>());
  s.center = from_vec(j.at("center").get<std::vector<double>>());
  if (s.offset.size() != s.scale.size() || s.center.size() != s.scale.size()) {
    throw FormatError("CoeffScaler: inconsistent lengths");
  }
  return s;
}

CoeffScaler coeff_scaler(const Eigen::MatrixXd& coeff_columns) {
  if (coeff_columns.cols() == 0) throw ArgumentError("coeff_scaler: empty training set");
  const Eigen::VectorXd lo = coeff_columns.rowwise().minCoeff();
  const Eigen::VectorXd hi = coeff_columns.rowwise().maxCoeff();
  CoeffScaler s;
  const Eigen::Index n = coeff_columns.rows();
  s.scale.resize(n);
  s.offset.resize(n);
  s.center = 0.5 * (lo + hi);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double span = hi[i] - lo[i];
    if (span > 0.0) {
      s.scale[i] = 2.0 / span;
      s.offset[i] = -(hi[i] + lo[i]) / span;
    } else {
      s.scale[i] = 0.0;
      s.offset[i] = 0.0;
    }
  }
  return s;
}

CoeffScaler coeff_scaler(std::span<const ChebSurrogate> train_coeffs) {
  if (train_coeffs.empty()) throw ArgumentError("coeff_scaler: empty training set");
  Eigen::MatrixXd cols(train_coeffs.front().coeffs.size(),
                       static_cast<Eigen::Index>(train_coeffs.size()));
  for (std::size_t k = 0; k < train_coeffs.size(); ++k) {
    if (train_coeffs[k].coeffs.size() != cols.rows()) {
      throw ArgumentError("coeff_scaler: surrogates have different degrees");
    }
    cols.col(static_cast<Eigen::Index>(k)) = train_coeffs[k].coeffs;
  }
  return coeff_scaler(cols);
}

void write_coeff_csv(const Eigen::MatrixXd& coeff_columns, std::ostream& os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index c = 0; c < coeff_columns.cols(); ++c) {
    for (Eigen::Index r = 0; r < coeff_columns.rows(); ++r) {
      if (r) os << ',';
      os << coeff_columns(r, c);
    }
    os << '\n';
  }
}

Eigen::MatrixXd read_coeff_csv(std::istream& is) {
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
        throw FormatError("coefficient CSV: bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("coefficient CSV: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd out(rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()),
                      static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    for (std::size_t r = 0; r < rows[c].size(); ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[c][r];
    }
  }
  return out;
}

}  // namespace topoae::chebyshev
