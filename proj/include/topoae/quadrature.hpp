#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace topoae::quadrature {

// Value and first derivative of the Legendre polynomial P_k at x, with
// P_k(1) = 1. Three-term recurrence; exact endpoint derivatives at x = +-1.
std::pair<double, double> legendre_eval(int k, double x);

// Gauss-Legendre rule with num_nodes = degree + 1 points on (-1, 1).
struct LegendreGrid1D {
  int degree = 0;
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // positive, sum to 2

  std::size_t num_nodes() const { return nodes.size(); }
};

// Roots of P_{n+1} and their Gauss weights. Throws ConvergenceError if the
// Newton iteration fails to settle within 100 steps.
LegendreGrid1D legendre_nodes(int n);

inline constexpr std::size_t kDefaultGridCap = 5'000'000;

// Tensor-product grid P_{m,n} over (-1,1)^m. Points are enumerated
// lexicographically with the first coordinate varying slowest; nothing is
// materialised beyond the 1-D rule.
class TensorLegendreGrid {
 public:
  TensorLegendreGrid(int dim, int degree, std::size_t cap = kDefaultGridCap);

  int dim() const { return dim_; }
  int degree() const { return grid1d_.degree; }
  const LegendreGrid1D& grid1d() const { return grid1d_; }
  std::size_t size() const { return size_; }

  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::span<const int> alpha) const;
  Eigen::VectorXd point(std::size_t flat) const;
  double weight(std::size_t flat) const;

  // All points as columns (dim x size). Only sensible for small grids.
  Eigen::MatrixXd points() const;

 private:
  int dim_;
  std::size_t size_;
  LegendreGrid1D grid1d_;
};

TensorLegendreGrid tensor_grid(int m, int n, std::size_t cap = kDefaultGridCap);

// Sum of w_alpha f(p_alpha) in lexicographic order.
double cubature_integrate(const std::function<double(const Eigen::VectorXd&)>& f,
                          const TensorLegendreGrid& grid);

struct GridSample {
  std::size_t index;
  Eigen::VectorXd point;
  double weight;
};

// k distinct grid points drawn uniformly without replacement (Floyd's
// algorithm over flat indices). Deterministic for a fixed seed.
std::vector<GridSample> sample_grid_batch(const TensorLegendreGrid& grid, std::size_t k,
                                          std::uint64_t seed);

// Lagrange cardinal polynomial l_j on the 1-D nodes (barycentric form).
double lagrange_1d(const LegendreGrid1D& grid, std::size_t j, double x);

// Tensor Lagrange polynomial L_alpha = prod_i l_{alpha_i}(x_i).
double lagrange(const TensorLegendreGrid& grid, std::span<const int> alpha,
                const Eigen::VectorXd& x);

// One row per point: alpha_1..alpha_m, x_1..x_m, weight.
void write_grid_csv(const TensorLegendreGrid& grid, std::ostream& os);

}  // namespace topoae::quadrature
