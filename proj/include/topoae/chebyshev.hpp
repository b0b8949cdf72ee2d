#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace topoae::chebyshev {

// T_k(x) via T_{k+1} = 2x T_k - T_{k-1}.
double cheb_eval(int k, double x);

// Equidistant cell-centre coordinates -1 + (2i+1)/r along each axis. Pixel
// (i, j) sits at x = coords[j], y = coords[i]; images are row-major r x r.
struct PixelGrid {
  int resolution = 0;
  std::vector<double> coords;

  explicit PixelGrid(int r);
};

// Coefficients theta_alpha over lexicographic A_{2,n}: column alpha1*(n+1)+alpha2
// multiplies T_alpha1(x) T_alpha2(y).
struct ChebSurrogate {
  int degree = 0;
  Eigen::VectorXd coeffs;
  double residual = 0.0;  // ||R theta - d|| of the fit that produced it

  nlohmann::json to_json() const;
  static ChebSurrogate from_json(const nlohmann::json& j);
};

// Regression matrix R (r^2 x (n+1)^2) with a cached column-pivoted QR.
class RegressionOperator {
 public:
  RegressionOperator(int resolution, int degree);

  int resolution() const { return resolution_; }
  int degree() const { return degree_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  // Least-squares coefficients for each column of `images` (r^2 x N).
  Eigen::MatrixXd solve(const Eigen::MatrixXd& images) const;

 private:
  int resolution_;
  int degree_;
  Eigen::MatrixXd matrix_;
  std::shared_ptr<const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>> qr_;
};

RegressionOperator build_regression(int r, int n);

// `image` is a flattened row-major r x r array.
ChebSurrogate fit(const RegressionOperator& op, std::span<const double> image);

// Batch variant: columns of `images` are flattened images; returns
// coefficient columns.
Eigen::MatrixXd fit_batch(const RegressionOperator& op, const Eigen::MatrixXd& images);

// Evaluate Q_theta on the grid; returns a flattened row-major image.
Eigen::VectorXd reconstruct(const ChebSurrogate& surrogate, const PixelGrid& grid);

// Per-index affine map scale*c + offset sending the training min/max to
// [-1, 1]. Indices with min == max get scale 0, offset 0 and unscale to
// their constant value.
struct CoeffScaler {
  Eigen::VectorXd scale;
  Eigen::VectorXd offset;
  Eigen::VectorXd center;

  Eigen::Index size() const { return scale.size(); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& coeffs) const;
  Eigen::MatrixXd unapply(const Eigen::MatrixXd& scaled) const;

  // Inverse map as c = a .* s + b, for use inside differentiable graphs.
  Eigen::VectorXd inverse_gain() const;
  Eigen::VectorXd inverse_bias() const;

  nlohmann::json to_json() const;
  static CoeffScaler from_json(const nlohmann::json& j);
};

CoeffScaler coeff_scaler(std::span<const ChebSurrogate> train_coeffs);
// Same, from coefficient columns.
CoeffScaler coeff_scaler(const Eigen::MatrixXd& coeff_columns);

// One image per row, coefficients in lexicographic order.
void write_coeff_csv(const Eigen::MatrixXd& coeff_columns, std::ostream& os);
Eigen::MatrixXd read_coeff_csv(std::istream& is);

}  // namespace topoae::chebyshev
