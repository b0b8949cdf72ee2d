#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "topoae/training/autoencoder.hpp"

namespace topoae::evaluation {

using Matrix = Eigen::MatrixXd;
using IndexPair = std::pair<std::size_t, std::size_t>;

struct CurveCheck {
  bool simple = true;
  // Segment pairs (indices into the collapsed loop) that touch or cross.
  std::vector<IndexPair> crossing_pairs;
  // Adjacent segments that fold back onto each other.
  std::vector<IndexPair> overlaps;
  std::size_t distinct_points = 0;

  nlohmann::json to_json() const;
};

// Closed polyline through the columns of a 2 x N matrix (segment i joins
// point i and i+1 mod N). Consecutive duplicates are collapsed first.
CurveCheck simple_closed_curve_check(const Matrix& loop);

// Per-coordinate wrap-around distance on [0, 2 pi)^k.
double toroidal_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Pairs with latent distance < delta whose intrinsic toroidal distance exceeds big_delta.
std::vector<IndexPair> injectivity_proxy(const Matrix& latent, const Matrix& intrinsic, double delta,
                                         double big_delta);

// q-quantile (0..1, nearest rank) of all pairwise latent distances.
double pairwise_distance_quantile(const Matrix& points, double q);

struct ResidualStats {
  double mean = 0.0;
  double max = 0.0;
};

// ||J(phi o nu)(p) - I||_F for each column of `points`.
std::vector<double> jacobian_identity_residuals(const training::Autoencoder& ae, const Matrix& points);
ResidualStats jacobian_identity_residual(const training::Autoencoder& ae, const Matrix& points);

}  // namespace topoae::evaluation
