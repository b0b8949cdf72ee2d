#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace topoae::evaluation {

struct GeodesicResult {
  double epsilon_star = 0.0;
  std::vector<std::size_t> path;
  double path_length = 0.0;

  nlohmann::json to_json() const;
};

// Smallest Vietoris-Rips radius joining a and b (columns of `points`), then the
// Euclidean shortest path inside that epsilon graph.
GeodesicResult vr_geodesic(const Eigen::MatrixXd& points, std::size_t a, std::size_t b);

}  // namespace topoae::evaluation
